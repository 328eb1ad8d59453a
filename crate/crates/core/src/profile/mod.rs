//! Threat profiles: named, scoped conjunctive queries over resource variables.
//!
//! A profile file (`*.tp.json`) looks like:
//!
//! ```json
//! {
//!   "name": "storageaccount_integrity_uploadFromMaliciousIoTDevice",
//!   "scope": "resource_type",
//!   "variables": ["account", "hub"],
//!   "subject": "account",
//!   "clauses": [
//!     {"var": "account", "path": "type", "op": "eq", "value": "Microsoft.Storage/storageAccounts"},
//!     {"var": "hub", "path": "properties.routing.endpoints.storageContainers[_].connectionString",
//!      "op": "contains", "ref": {"var": "account", "path": "name"}}
//!   ],
//!   "threat_value": 2,
//!   "description": "..."
//! }
//! ```
//!
//! Clause semantics (`lhs` = values resolved from the clause path on the bound
//! resource, `rhs` = the literal or the values resolved through the ref):
//!
//! * `eq`: some `lhs` value equals some `rhs` value.
//! * `neq`: both sides resolve to at least one value and no pair is equal.
//! * `contains`: some string `lhs` value contains some string `rhs` value.
//!
//! Wildcards are existential per clause; they do not unify across clauses.

mod lint;
mod name;

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::document::DocumentValue;
use crate::iac::{parse_path, PathExpr};

pub use lint::{lint_repository, lint_repository_with, LintFinding, LintKind, Severity};
pub use name::{validate_name, ProfileName, ProtectionGoal};

pub const PROFILE_EXTENSION: &str = ".tp.json";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("malformed profile: {0}")]
    MalformedProfile(String),
    #[error("profile name {0:?} does not follow <assetType>_<protectionGoal>_<attackShortDescription>")]
    BadName(String),
    #[error("unknown protection goal {0:?}")]
    UnknownGoal(String),
    #[error("variable {0:?} is not declared")]
    UnboundVariable(String),
    #[error("threat value {0} is outside [1,3]")]
    BadThreatValue(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    SpecificResource,
    ResourceType,
    /// Evaluated against ontology documents instead of provider bodies.
    Ontology,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Eq,
    Neq,
    Contains,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Literal(DocumentValue),
    Ref { var: String, path: PathExpr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub var: String,
    pub path: PathExpr,
    pub op: Op,
    pub rhs: Operand,
}

impl Clause {
    /// Variables this clause mentions, subject first.
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        let other = match &self.rhs {
            Operand::Ref { var, .. } if *var != self.var => Some(var.as_str()),
            _ => None,
        };
        std::iter::once(self.var.as_str()).chain(other)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreatProfile {
    pub name: ProfileName,
    pub scope: Scope,
    pub variables: Vec<String>,
    /// The variable whose resource is reported as affected.
    pub subject: String,
    pub clauses: Vec<Clause>,
    pub threat_value: Option<u8>,
    pub description: String,
    /// `Some(false)` marks a profile imported from a shared repository that
    /// nobody has reviewed yet.
    pub reviewed: Option<bool>,
}

impl ThreatProfile {
    pub fn is_unreviewed(&self) -> bool {
        self.reviewed == Some(false)
    }

    pub fn variable_index(&self, var: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == var)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    name: String,
    scope: Scope,
    variables: Vec<String>,
    subject: String,
    clauses: Vec<ClauseFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threat_value: Option<i64>,
    #[serde(default)]
    description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reviewed: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClauseFile {
    var: String,
    path: String,
    op: Op,
    #[serde(
        default,
        deserialize_with = "present_value",
        skip_serializing_if = "Option::is_none"
    )]
    value: Option<Value>,
    #[serde(default, rename = "ref", skip_serializing_if = "Option::is_none")]
    reference: Option<RefFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RefFile {
    var: String,
    path: String,
}

// Distinguishes `"value": null` from an absent key.
fn present_value<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Value>, D::Error> {
    Value::deserialize(d).map(Some)
}

pub fn parse_profile(bytes: &[u8]) -> Result<ThreatProfile, ProfileError> {
    let file: ProfileFile = serde_json::from_slice(bytes)
        .map_err(|e| ProfileError::MalformedProfile(e.to_string()))?;
    from_file(file)
}

fn malformed(msg: impl Into<String>) -> ProfileError {
    ProfileError::MalformedProfile(msg.into())
}

fn path(text: &str) -> Result<PathExpr, ProfileError> {
    parse_path(text).map_err(|e| malformed(e.to_string()))
}

fn from_file(file: ProfileFile) -> Result<ThreatProfile, ProfileError> {
    let name = validate_name(&file.name)?;
    if file.variables.is_empty() {
        return Err(malformed("at least one variable is required"));
    }
    let declared: BTreeSet<&str> = file.variables.iter().map(String::as_str).collect();
    if declared.len() != file.variables.len() {
        return Err(malformed("duplicate variable name"));
    }
    if let Some(v) = file.variables.iter().find(|v| v.is_empty()) {
        return Err(malformed(format!("empty variable name {v:?}")));
    }
    let bound = |var: &str| {
        if declared.contains(var) {
            Ok(var.to_string())
        } else {
            Err(ProfileError::UnboundVariable(var.to_string()))
        }
    };
    let subject = bound(&file.subject)?;

    let mut clauses = Vec::with_capacity(file.clauses.len());
    for c in file.clauses {
        let rhs = match (c.value, c.reference) {
            (Some(v), None) => Operand::Literal(v),
            (None, Some(r)) => Operand::Ref {
                var: bound(&r.var)?,
                path: path(&r.path)?,
            },
            _ => return Err(malformed("each clause needs exactly one of \"value\" or \"ref\"")),
        };
        if c.op == Op::Contains {
            if let Operand::Literal(v) = &rhs {
                if !v.is_string() {
                    return Err(malformed("\"contains\" needs a string value"));
                }
            }
        }
        clauses.push(Clause {
            var: bound(&c.var)?,
            path: path(&c.path)?,
            op: c.op,
            rhs,
        });
    }

    let threat_value = match file.threat_value {
        None => None,
        Some(v @ 1..=3) => Some(v as u8),
        Some(v) => return Err(ProfileError::BadThreatValue(v)),
    };

    Ok(ThreatProfile {
        name,
        scope: file.scope,
        variables: file.variables,
        subject,
        clauses,
        threat_value,
        description: file.description,
        reviewed: file.reviewed,
    })
}

fn to_file(p: &ThreatProfile) -> ProfileFile {
    ProfileFile {
        name: p.name.to_string(),
        scope: p.scope,
        variables: p.variables.clone(),
        subject: p.subject.clone(),
        clauses: p
            .clauses
            .iter()
            .map(|c| {
                let (value, reference) = match &c.rhs {
                    Operand::Literal(v) => (Some(v.clone()), None),
                    Operand::Ref { var, path } => (
                        None,
                        Some(RefFile {
                            var: var.clone(),
                            path: path.to_string(),
                        }),
                    ),
                };
                ClauseFile {
                    var: c.var.clone(),
                    path: c.path.to_string(),
                    op: c.op,
                    value,
                    reference,
                }
            })
            .collect(),
        threat_value: p.threat_value.map(i64::from),
        description: p.description.clone(),
        reviewed: p.reviewed,
    }
}

/// Renders a profile in the file format accepted by [`parse_profile`].
pub fn serialize_profile(profile: &ThreatProfile) -> String {
    serde_json::to_string_pretty(&to_file(profile)).expect("profile serializes") + "\n"
}

impl Serialize for ThreatProfile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        to_file(self).serialize(serializer)
    }
}
