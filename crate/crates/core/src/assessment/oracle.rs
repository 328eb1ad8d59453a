//! Reference evaluator: enumerates every variable-to-resource tuple and checks
//! each clause with its own document traversal and comparisons. Shares no
//! evaluation code with the engine.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;
use thiserror::Error;

use super::{Binding, IdentifiedThreat};
use crate::iac::{ResourceDescriptor, Segment};
use crate::ontology::OntologyResource;
use crate::profile::{Op, Operand, Scope, ThreatProfile};

pub const ORACLE_TUPLE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{tuples} tuples exceed the oracle limit of {ORACLE_TUPLE_LIMIT}")]
    TooLarge { tuples: u128 },
}

pub fn brute_force_oracle(
    profile: &ThreatProfile,
    provider: &[ResourceDescriptor],
    onto: &[OntologyResource],
) -> Result<IdentifiedThreat, OracleError> {
    let universe: Vec<(String, Value)> = match profile.scope {
        Scope::Ontology => onto.iter().map(|o| (o.id.clone(), o.document())).collect(),
        _ => provider
            .iter()
            .map(|r| (r.name.clone(), r.body.clone()))
            .collect(),
    };
    let nvars = profile.variables.len() as u32;
    let tuples = (universe.len() as u128).pow(nvars);
    if tuples > ORACLE_TUPLE_LIMIT {
        return Err(OracleError::TooLarge { tuples });
    }

    let vars: Arc<[String]> = profile.variables.clone().into();
    let mut bindings = Vec::new();
    for t in 0..tuples {
        // Decode t as a base-|universe| number, one digit per variable.
        let mut rest = t;
        let mut assignment: BTreeMap<&str, usize> = BTreeMap::new();
        let mut chosen = Vec::with_capacity(profile.variables.len());
        for var in &profile.variables {
            let pick = (rest % universe.len() as u128) as usize;
            assignment.insert(var, pick);
            chosen.push(pick);
            rest /= universe.len() as u128;
        }
        let all_hold = profile.clauses.iter().all(|c| {
            let lhs_doc = &universe[assignment[c.var.as_str()]].1;
            let lhs = collect(lhs_doc, c.path.segments());
            let rhs = match &c.rhs {
                Operand::Literal(v) => vec![v.clone()],
                Operand::Ref { var, path } => {
                    collect(&universe[assignment[var.as_str()]].1, path.segments())
                }
            };
            holds(c.op, &lhs, &rhs)
        });
        if all_hold {
            bindings.push(Binding::new(
                vars.clone(),
                chosen.iter().map(|&i| Arc::from(universe[i].0.as_str())),
            ));
        }
    }
    Ok(IdentifiedThreat::from_bindings(profile, bindings))
}

fn collect(doc: &Value, segments: &[Segment]) -> Vec<Value> {
    match segments {
        [] => vec![doc.clone()],
        [Segment::Key(k), rest @ ..] => match doc {
            Value::Object(map) => map.get(k).map(|v| collect(v, rest)).unwrap_or_default(),
            _ => vec![],
        },
        [Segment::Wildcard, rest @ ..] => match doc {
            Value::Array(items) => items.iter().flat_map(|v| collect(v, rest)).collect(),
            _ => vec![],
        },
    }
}

fn same(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64().unwrap() == y.as_f64().unwrap(),
        (Value::Array(x), Value::Array(y)) => {
            x.len() == y.len() && (0..x.len()).all(|i| same(&x[i], &y[i]))
        }
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| same(v, w)))
        }
        (Value::Null, Value::Null) => true,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::String(x), Value::String(y)) => x == y,
        _ => false,
    }
}

fn holds(op: Op, lhs: &[Value], rhs: &[Value]) -> bool {
    let mut pairs = lhs.iter().flat_map(|l| rhs.iter().map(move |r| (l, r)));
    match op {
        Op::Eq => pairs.any(|(l, r)| same(l, r)),
        Op::Neq => !lhs.is_empty() && !rhs.is_empty() && pairs.all(|(l, r)| !same(l, r)),
        Op::Contains => pairs.any(|(l, r)| match (l, r) {
            (Value::String(l), Value::String(r)) => l.contains(r.as_str()),
            _ => false,
        }),
    }
}
