//! Provider-independent resource classification.
//!
//! A [`RuleSet`] holds the class forest (rooted at `Resource`) and one
//! [`MappingRule`] per provider type. Translation copies selected provider
//! properties into a normalized feature document, e.g.
//! `httpEndpoint.transportEncryption.enforced`, so ontology-scoped profiles
//! can be written once for every provider.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::document::DocumentValue;
use crate::iac::{resolve_path, IacTemplate, PathExpr, ResourceDescriptor, Segment};

pub const ROOT_CLASS: &str = "Resource";

/// Classes that exist in every rule set, with their parents.
pub const BUILTIN_CLASSES: &[(&str, Option<&str>)] = &[
    (ROOT_CLASS, None),
    ("ComputingResource", Some(ROOT_CLASS)),
    ("Storage", Some(ROOT_CLASS)),
    ("ObjectStorage", Some("Storage")),
    ("Networking", Some(ROOT_CLASS)),
    ("MessagingHub", Some(ROOT_CLASS)),
];

/// The mapping rules shipped with the crate.
pub const DEFAULT_RULES_JSON: &str = include_str!("../data/mapping-rules.json");

const RESERVED_KEYS: &[&str] = &["id", "type"];

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("malformed rules file: {0}")]
    MalformedRules(String),
    #[error("class {0:?} is declared twice with different parents")]
    ClassRedefined(String),
    #[error("class {class:?} has unknown parent {parent:?}")]
    UnknownParent { class: String, parent: String },
    #[error("class {0:?} has no parent; only {ROOT_CLASS} may be a root")]
    ExtraRoot(String),
    #[error("class hierarchy has a cycle through {0:?}")]
    Cycle(String),
    #[error("rule for {provider_type}: {reason}")]
    BadChain {
        provider_type: String,
        reason: String,
    },
    #[error("two rules for provider type {0}")]
    DuplicateRule(String),
    #[error("rule for {provider_type}: extractors conflict on feature path {feature_path}")]
    RuleConflict {
        provider_type: String,
        feature_path: String,
    },
    #[error("rule for {provider_type}: invalid feature path {feature_path}: {reason}")]
    BadFeaturePath {
        provider_type: String,
        feature_path: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// Boolean negation; non-boolean sources write nothing.
    Negate,
    /// Copies a TLS version string verbatim; non-string sources write nothing.
    TlsVersion,
    /// Writes a fixed value whenever the source path is present.
    Constant(DocumentValue),
}

impl Transform {
    fn apply(&self, source: &DocumentValue) -> Option<DocumentValue> {
        match self {
            Transform::Identity => Some(source.clone()),
            Transform::Negate => source.as_bool().map(|b| Value::Bool(!b)),
            Transform::TlsVersion => source.as_str().map(|s| Value::String(s.to_string())),
            Transform::Constant(v) => Some(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureExtractor {
    pub feature_path: PathExpr,
    pub source_path: PathExpr,
    pub transform: Transform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingRule {
    pub provider_type: String,
    /// Most specific first, ending in `Resource`.
    pub classes: Vec<String>,
    #[serde(default)]
    pub extractors: Vec<FeatureExtractor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntologyClass {
    pub name: String,
    pub parent: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RulesFile {
    #[serde(default)]
    #[allow(dead_code)]
    version: Option<u32>,
    #[serde(default)]
    classes: Vec<OntologyClass>,
    #[serde(default)]
    rules: Vec<MappingRule>,
}

/// A validated class forest plus provider mapping rules.
#[derive(Debug, Clone)]
pub struct RuleSet {
    parents: BTreeMap<String, Option<String>>,
    rules: BTreeMap<String, MappingRule>,
}

impl RuleSet {
    pub fn from_json(bytes: &[u8]) -> Result<Self, OntologyError> {
        let file: RulesFile = serde_json::from_slice(bytes)
            .map_err(|e| OntologyError::MalformedRules(e.to_string()))?;
        Self::new(file.classes, file.rules)
    }

    /// The rule set shipped in `data/mapping-rules.json`.
    pub fn default_rules() -> Self {
        Self::from_json(DEFAULT_RULES_JSON.as_bytes()).expect("shipped mapping rules are valid")
    }

    pub fn new(classes: Vec<OntologyClass>, rules: Vec<MappingRule>) -> Result<Self, OntologyError> {
        let mut parents: BTreeMap<String, Option<String>> = BUILTIN_CLASSES
            .iter()
            .map(|(n, p)| (n.to_string(), p.map(str::to_string)))
            .collect();
        for class in classes {
            match parents.get(&class.name) {
                Some(existing) if *existing != class.parent => {
                    return Err(OntologyError::ClassRedefined(class.name))
                }
                Some(_) => {}
                None => {
                    parents.insert(class.name, class.parent);
                }
            }
        }
        check_forest(&parents)?;

        let mut by_type = BTreeMap::new();
        for rule in rules {
            check_chain(&parents, &rule)?;
            check_extractors(&rule)?;
            if by_type.contains_key(&rule.provider_type) {
                return Err(OntologyError::DuplicateRule(rule.provider_type));
            }
            by_type.insert(rule.provider_type.clone(), rule);
        }
        Ok(Self {
            parents,
            rules: by_type,
        })
    }

    pub fn rule_for(&self, provider_type: &str) -> Option<&MappingRule> {
        self.rules.get(provider_type)
    }

    pub fn rules(&self) -> impl Iterator<Item = &MappingRule> {
        self.rules.values()
    }

    pub fn parent_of(&self, class: &str) -> Option<&str> {
        self.parents.get(class).and_then(|p| p.as_deref())
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.parents.contains_key(class)
    }
}

fn check_forest(parents: &BTreeMap<String, Option<String>>) -> Result<(), OntologyError> {
    for (name, parent) in parents {
        match parent {
            None if name != ROOT_CLASS => return Err(OntologyError::ExtraRoot(name.clone())),
            Some(p) if !parents.contains_key(p) => {
                return Err(OntologyError::UnknownParent {
                    class: name.clone(),
                    parent: p.clone(),
                })
            }
            _ => {}
        }
        let mut seen = BTreeSet::new();
        let mut cursor = Some(name.as_str());
        while let Some(c) = cursor {
            if !seen.insert(c) {
                return Err(OntologyError::Cycle(name.clone()));
            }
            cursor = parents.get(c).and_then(|p| p.as_deref());
        }
    }
    Ok(())
}

fn check_chain(
    parents: &BTreeMap<String, Option<String>>,
    rule: &MappingRule,
) -> Result<(), OntologyError> {
    let bad = |reason: String| OntologyError::BadChain {
        provider_type: rule.provider_type.clone(),
        reason,
    };
    let Some(first) = rule.classes.first() else {
        return Err(bad("empty class chain".to_string()));
    };
    if !parents.contains_key(first) {
        return Err(bad(format!("unknown class {first:?}")));
    }
    // The chain must be exactly the ancestor walk from its first class.
    let mut expected = Vec::new();
    let mut cursor = Some(first.as_str());
    while let Some(c) = cursor {
        expected.push(c);
        cursor = parents.get(c).and_then(|p| p.as_deref());
    }
    if expected != rule.classes {
        return Err(bad(format!(
            "chain {:?} is not the ancestor chain {:?}",
            rule.classes, expected
        )));
    }
    Ok(())
}

fn check_extractors(rule: &MappingRule) -> Result<(), OntologyError> {
    let mut targets: Vec<Vec<&str>> = Vec::new();
    for ex in &rule.extractors {
        let bad = |reason: &str| OntologyError::BadFeaturePath {
            provider_type: rule.provider_type.clone(),
            feature_path: ex.feature_path.to_string(),
            reason: reason.to_string(),
        };
        let keys = feature_keys(&ex.feature_path).ok_or_else(|| bad("wildcards not allowed"))?;
        if RESERVED_KEYS.contains(&keys[0]) {
            return Err(bad("reserved top-level key"));
        }
        // Same path, or one path nested inside another's scalar.
        if targets.iter().any(|t| is_prefix(t, &keys) || is_prefix(&keys, t)) {
            return Err(OntologyError::RuleConflict {
                provider_type: rule.provider_type.clone(),
                feature_path: ex.feature_path.to_string(),
            });
        }
        targets.push(keys);
    }
    Ok(())
}

fn feature_keys(path: &PathExpr) -> Option<Vec<&str>> {
    path.segments()
        .iter()
        .map(|s| match s {
            Segment::Key(k) => Some(k.as_str()),
            Segment::Wildcard => None,
        })
        .collect()
}

fn is_prefix(short: &[&str], long: &[&str]) -> bool {
    short.len() <= long.len() && long[..short.len()] == *short
}

/// The provider-agnostic view of one resource.
#[derive(Debug, Clone, PartialEq)]
pub struct OntologyResource {
    pub id: String,
    /// Name of the source resource, used to join the two views.
    pub source_name: String,
    pub type_chain: Vec<String>,
    pub features: DocumentValue,
}

impl OntologyResource {
    /// The evaluation document: `{"id", "type", ...features}`.
    pub fn document(&self) -> DocumentValue {
        let mut map = match &self.features {
            Value::Object(m) => m.clone(),
            _ => Map::new(),
        };
        map.insert("id".to_string(), Value::String(self.id.clone()));
        map.insert(
            "type".to_string(),
            Value::Array(self.type_chain.iter().cloned().map(Value::String).collect()),
        );
        Value::Object(map)
    }
}

/// Ancestor chain for a provider type; unknown types map to `["Resource"]`.
pub fn classify(provider_type: &str, rules: &RuleSet) -> Vec<String> {
    rules
        .rule_for(provider_type)
        .map(|r| r.classes.clone())
        .unwrap_or_else(|| vec![ROOT_CLASS.to_string()])
}

pub fn translate_resource(
    resource: &ResourceDescriptor,
    rules: &RuleSet,
) -> Result<OntologyResource, OntologyError> {
    let mut features = Map::new();
    if let Some(rule) = rules.rule_for(&resource.provider_type) {
        check_extractors(rule)?;
        for ex in &rule.extractors {
            let Some(source) = resolve_path(&resource.body, &ex.source_path).into_iter().next()
            else {
                continue;
            };
            if let Some(value) = ex.transform.apply(source) {
                let keys = feature_keys(&ex.feature_path).expect("validated feature path");
                write_feature(&mut features, &keys, value);
            }
        }
    }
    Ok(OntologyResource {
        id: resource.full_id().to_string(),
        source_name: resource.name.clone(),
        type_chain: classify(&resource.provider_type, rules),
        features: Value::Object(features),
    })
}

fn write_feature(map: &mut Map<String, Value>, keys: &[&str], value: Value) {
    let (last, parents) = keys.split_last().expect("non-empty feature path");
    let mut cursor = map;
    for key in parents {
        let slot = cursor
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
        if !slot.is_object() {
            *slot = Value::Object(Map::new());
        }
        cursor = slot.as_object_mut().expect("object slot");
    }
    cursor.insert(last.to_string(), value);
}

/// Per-resource failures from [`translate_all`], with template indices.
#[derive(Debug, Error)]
#[error("{} resource(s) failed to translate: {}", .0.len(), summarize(.0))]
pub struct TranslateErrors(pub Vec<(usize, OntologyError)>);

fn summarize(errors: &[(usize, OntologyError)]) -> String {
    errors
        .iter()
        .map(|(i, e)| format!("#{i}: {e}"))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn translate_all(
    template: &IacTemplate,
    rules: &RuleSet,
) -> Result<Vec<OntologyResource>, TranslateErrors> {
    let mut out = Vec::with_capacity(template.resources.len());
    let mut errors = Vec::new();
    for r in &template.resources {
        match translate_resource(r, rules) {
            Ok(o) => out.push(o),
            Err(e) => errors.push((r.source_index, e)),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(TranslateErrors(errors))
    }
}
