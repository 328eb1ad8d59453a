//! Evaluates threat profiles against discovered resources and rebuilds the
//! per-asset attack map.
//!
//! Evaluation filters each variable's candidates with its single-variable
//! clauses first, then joins the surviving candidates on the cross-variable
//! clauses. Single-variable profiles therefore cost one pass over the
//! universe. [`brute_force_oracle`] computes the same result by plain
//! enumeration and is used to check the engine.

mod attack_map;
mod oracle;

use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use smallvec::SmallVec;

use crate::document::{values_equal, DocumentValue};
use crate::iac::{resolve_path, visit_path, ResourceDescriptor};
use crate::ontology::OntologyResource;
use crate::profile::{Clause, Op, Operand, ProfileName, Scope, ThreatProfile};

pub use attack_map::{reconstruct_attack_map, AssetThreatMap};
pub use oracle::{brute_force_oracle, OracleError, ORACLE_TUPLE_LIMIT};

/// Assignment of every profile variable to a resource id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding {
    vars: Arc<[String]>,
    ids: SmallVec<[Arc<str>; 2]>,
}

impl Binding {
    pub fn new(vars: Arc<[String]>, ids: impl IntoIterator<Item = Arc<str>>) -> Self {
        let ids: SmallVec<[Arc<str>; 2]> = ids.into_iter().collect();
        assert_eq!(vars.len(), ids.len(), "binding must be total");
        Self { vars, ids }
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.vars
            .iter()
            .position(|v| v == var)
            .map(|i| &*self.ids[i])
    }

    /// (variable, resource id) pairs in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.vars.iter().map(String::as_str).zip(self.ids.iter().map(|i| &**i))
    }

    fn map_ids(&self, f: impl Fn(&Arc<str>) -> Arc<str>) -> Self {
        Self {
            vars: self.vars.clone(),
            ids: self.ids.iter().map(f).collect(),
        }
    }
}

impl Serialize for Binding {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let sorted: BTreeMap<&str, &str> = self.iter().collect();
        serializer.collect_map(sorted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentifiedThreat {
    pub profile_name: ProfileName,
    pub scope: Scope,
    pub affected_assets: BTreeSet<Arc<str>>,
    /// Full witness tuples, sorted by subject id then the remaining
    /// variables in declaration order.
    pub bindings: Vec<Binding>,
}

impl IdentifiedThreat {
    /// Affected asset ids in sorted order.
    pub fn affected(&self) -> Vec<&str> {
        self.affected_assets.iter().map(|a| &**a).collect()
    }

    /// Builds the result from raw witness tuples: dedupes, sorts, and derives
    /// the affected set from the subject variable.
    pub(crate) fn from_bindings(profile: &ThreatProfile, mut bindings: Vec<Binding>) -> Self {
        let subject = profile
            .variable_index(&profile.subject)
            .expect("validated subject");
        let order: Vec<usize> = std::iter::once(subject)
            .chain((0..profile.variables.len()).filter(|&i| i != subject))
            .collect();
        bindings.sort_by(|a, b| {
            order
                .iter()
                .map(|&i| a.ids[i].cmp(&b.ids[i]))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        });
        bindings.dedup_by(|a, b| a.ids == b.ids);
        let affected_assets = bindings.iter().map(|b| b.ids[subject].clone()).collect();
        Self {
            profile_name: profile.name.clone(),
            scope: profile.scope,
            affected_assets,
            bindings,
        }
    }
}

/// The documents a profile is evaluated over, with the id reported for each.
struct Universe<'a> {
    entries: Vec<(Arc<str>, Cow<'a, DocumentValue>)>,
}

impl<'a> Universe<'a> {
    fn provider(resources: &'a [ResourceDescriptor]) -> Self {
        Self {
            entries: resources
                .iter()
                .map(|r| (Arc::from(r.name.as_str()), Cow::Borrowed(&r.body)))
                .collect(),
        }
    }

    fn ontology(resources: &'a [OntologyResource]) -> Self {
        Self {
            entries: resources
                .iter()
                .map(|r| (Arc::from(r.id.as_str()), Cow::Owned(r.document())))
                .collect(),
        }
    }
}

pub fn evaluate_profile(
    profile: &ThreatProfile,
    provider: &[ResourceDescriptor],
    onto: &[OntologyResource],
) -> IdentifiedThreat {
    let universe = match profile.scope {
        Scope::Ontology => Universe::ontology(onto),
        Scope::SpecificResource | Scope::ResourceType => Universe::provider(provider),
    };
    evaluate_in(profile, &universe)
}

/// Evaluates every profile. Runs on the current rayon pool; the output is
/// sorted by profile name regardless of completion order.
pub fn evaluate_all(
    profiles: &[ThreatProfile],
    provider: &[ResourceDescriptor],
    onto: &[OntologyResource],
) -> Vec<IdentifiedThreat> {
    let provider_universe = Universe::provider(provider);
    let onto_universe = if profiles.iter().any(|p| p.scope == Scope::Ontology) {
        Universe::ontology(onto)
    } else {
        Universe { entries: Vec::new() }
    };
    let mut out: Vec<IdentifiedThreat> = profiles
        .par_iter()
        .map(|p| {
            let universe = match p.scope {
                Scope::Ontology => &onto_universe,
                _ => &provider_universe,
            };
            evaluate_in(p, universe)
        })
        .collect();
    out.sort_by(|a, b| a.profile_name.cmp(&b.profile_name));
    out
}

fn evaluate_in(profile: &ThreatProfile, universe: &Universe<'_>) -> IdentifiedThreat {
    let nvars = profile.variables.len();
    let var_of = |name: &str| profile.variable_index(name).expect("validated variable");

    // Split clauses into single-variable filters and cross-variable joins.
    let mut unary: Vec<Vec<&Clause>> = vec![Vec::new(); nvars];
    let mut joins: Vec<(usize, usize, &Clause)> = Vec::new();
    for clause in &profile.clauses {
        let lhs = var_of(&clause.var);
        match &clause.rhs {
            Operand::Ref { var, .. } if *var != clause.var => {
                joins.push((lhs, var_of(var), clause));
            }
            _ => unary[lhs].push(clause),
        }
    }

    let candidates: Vec<Vec<usize>> = unary
        .iter()
        .map(|clauses| {
            universe
                .entries
                .iter()
                .enumerate()
                .filter(|(_, (_, doc))| clauses.iter().all(|c| clause_holds(c, doc, doc)))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    // A join clause is checked once both of its variables are bound, i.e. at
    // the later of the two in binding order.
    let mut checks_at: Vec<Vec<(usize, usize, &Clause)>> = vec![Vec::new(); nvars];
    for &(lhs, rhs, clause) in &joins {
        checks_at[lhs.max(rhs)].push((lhs, rhs, clause));
    }

    let mut tuples = Vec::new();
    let mut current = vec![0usize; nvars];
    join(0, &candidates, &checks_at, universe, &mut current, &mut tuples);

    let vars: Arc<[String]> = profile.variables.clone().into();
    let bindings = tuples
        .into_iter()
        .map(|tuple| {
            Binding::new(
                vars.clone(),
                tuple.into_iter().map(|i| universe.entries[i].0.clone()),
            )
        })
        .collect();
    IdentifiedThreat::from_bindings(profile, bindings)
}

fn join(
    depth: usize,
    candidates: &[Vec<usize>],
    checks_at: &[Vec<(usize, usize, &Clause)>],
    universe: &Universe<'_>,
    current: &mut Vec<usize>,
    out: &mut Vec<SmallVec<[usize; 2]>>,
) {
    if depth == candidates.len() {
        out.push(SmallVec::from_slice(current));
        return;
    }
    for &idx in &candidates[depth] {
        current[depth] = idx;
        let ok = checks_at[depth].iter().all(|&(lhs, rhs, clause)| {
            let lhs_doc = &universe.entries[current[lhs]].1;
            let rhs_doc = &universe.entries[current[rhs]].1;
            clause_holds(clause, lhs_doc, rhs_doc)
        });
        if ok {
            join(depth + 1, candidates, checks_at, universe, current, out);
        }
    }
}

/// Truth of one clause with `lhs_doc` bound to the clause variable and
/// `rhs_doc` bound to the ref variable (ignored for literals).
pub(crate) fn clause_holds(clause: &Clause, lhs_doc: &DocumentValue, rhs_doc: &DocumentValue) -> bool {
    let rhs: Vec<&DocumentValue> = match &clause.rhs {
        Operand::Literal(v) => vec![v],
        Operand::Ref { path, .. } => resolve_path(rhs_doc, path),
    };
    if rhs.is_empty() {
        return false;
    }
    match clause.op {
        Op::Eq => visit_path(lhs_doc, &clause.path, &mut |l| {
            rhs.iter().any(|r| values_equal(l, r))
        }),
        Op::Neq => {
            let mut any = false;
            let found_equal = visit_path(lhs_doc, &clause.path, &mut |l| {
                any = true;
                rhs.iter().any(|r| values_equal(l, r))
            });
            any && !found_equal
        }
        Op::Contains => visit_path(lhs_doc, &clause.path, &mut |l| {
            l.as_str().is_some_and(|l| {
                rhs.iter()
                    .any(|r| r.as_str().is_some_and(|r| l.contains(r)))
            })
        }),
    }
}

/// Rewrites ontology-scope results so assets are named like provider-scope
/// results: ontology ids are replaced by their source resource names.
pub fn join_views(threats: &[IdentifiedThreat], onto: &[OntologyResource]) -> Vec<IdentifiedThreat> {
    let names: BTreeMap<&str, &str> = onto
        .iter()
        .map(|o| (o.id.as_str(), o.source_name.as_str()))
        .collect();
    let rename = |id: &Arc<str>| names.get(&**id).map_or_else(|| id.clone(), |n| Arc::from(*n));
    threats
        .iter()
        .map(|t| match t.scope {
            Scope::Ontology => IdentifiedThreat {
                profile_name: t.profile_name.clone(),
                scope: t.scope,
                affected_assets: t.affected_assets.iter().map(rename).collect(),
                bindings: t
                    .bindings
                    .iter()
                    .map(|b| b.map_ids(rename))
                    .collect(),
            },
            _ => t.clone(),
        })
        .collect()
}
