//! Random small universes and profiles for engine-vs-oracle checks.

use cloudrisk_core::iac::{parse_path, parse_template, ResourceDescriptor};
use cloudrisk_core::ontology::OntologyResource;
use cloudrisk_core::profile::{validate_name, Clause, Op, Operand, Scope, ThreatProfile};
use proptest::prelude::*;
use serde_json::{json, Map, Value};

const KEYS: &[&str] = &["a", "b", "name", "type", "c"];

#[derive(Debug, Clone)]
pub struct Case {
    pub provider: Vec<ResourceDescriptor>,
    pub onto: Vec<OntologyResource>,
    pub profile: ThreatProfile,
}

fn leaf() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::Bool),
        (0i64..3).prop_map(|n| json!(n)),
        (0i64..3).prop_map(|n| json!(n as f64)),
        prop::sample::select(vec!["x", "y", "xy", "r1", ""]).prop_map(|s| json!(s)),
    ]
}

fn value() -> impl Strategy<Value = Value> {
    leaf().prop_recursive(2, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(Value::Array),
            prop::collection::btree_map(prop::sample::select(KEYS.to_vec()), inner, 0..3)
                .prop_map(|m| Value::Object(m.into_iter().map(|(k, v)| (k.to_string(), v)).collect())),
        ]
    })
}

fn fields() -> impl Strategy<Value = Map<String, Value>> {
    (value(), value(), any::<bool>()).prop_map(|(a, b, with_b)| {
        let mut m = Map::new();
        m.insert("a".into(), a);
        if with_b {
            m.insert("b".into(), b);
        }
        m
    })
}

fn resource() -> impl Strategy<Value = Value> {
    (
        prop::sample::select(vec!["r0", "r1", "r2", "r3", "r4", "r5", "xy"]),
        prop::sample::select(vec!["T1", "T2"]),
        fields(),
    )
        .prop_map(|(name, ty, mut m)| {
            m.insert("name".into(), json!(name));
            m.insert("type".into(), json!(ty));
            Value::Object(m)
        })
}

pub fn provider_universe(max: usize) -> impl Strategy<Value = Vec<ResourceDescriptor>> {
    prop::collection::vec(resource(), 0..=max).prop_map(|rs| {
        parse_template(json!({ "resources": rs }).to_string().as_bytes())
            .expect("generated template parses")
            .resources
    })
}

pub fn ontology_universe(max: usize) -> impl Strategy<Value = Vec<OntologyResource>> {
    prop::collection::vec(
        (prop::sample::select(vec!["o0", "o1", "o2", "o3"]), fields()),
        0..=max,
    )
    .prop_map(|items| {
        items
            .into_iter()
            .map(|(id, features)| OntologyResource {
                id: format!("/subs/{id}"),
                source_name: id.to_string(),
                type_chain: vec!["Resource".into()],
                features: Value::Object(features),
            })
            .collect()
    })
}

fn path() -> impl Strategy<Value = String> {
    prop::collection::vec((prop::sample::select(KEYS.to_vec()), prop::bool::weighted(0.3)), 1..4)
        .prop_map(|segs| {
            segs.into_iter()
                .map(|(k, w)| if w { format!("{k}[_]") } else { k.to_string() })
                .collect::<Vec<_>>()
                .join(".")
        })
}

fn clause(nvars: usize) -> impl Strategy<Value = Clause> {
    (
        0..nvars,
        path(),
        prop::sample::select(vec![Op::Eq, Op::Neq, Op::Contains]),
        prop::bool::weighted(0.4),
        0..nvars,
        path(),
        leaf(),
        prop::sample::select(vec!["x", "y", "r", ""]),
    )
        .prop_map(|(v, p, op, use_ref, rv, rp, lit, s)| Clause {
            var: format!("v{v}"),
            path: parse_path(&p).unwrap(),
            op,
            rhs: if use_ref {
                Operand::Ref {
                    var: format!("v{rv}"),
                    path: parse_path(&rp).unwrap(),
                }
            } else if op == Op::Contains {
                Operand::Literal(json!(s))
            } else {
                Operand::Literal(lit)
            },
        })
}

pub fn profile() -> impl Strategy<Value = ThreatProfile> {
    (1usize..=2, any::<bool>())
        .prop_flat_map(|(nvars, ontology)| {
            (
                Just(nvars),
                Just(ontology),
                0..nvars,
                prop::collection::vec(clause(nvars), 0..4),
            )
        })
        .prop_map(|(nvars, ontology, subject, clauses)| ThreatProfile {
            name: validate_name("generated_integrity_randomCase").unwrap(),
            scope: if ontology { Scope::Ontology } else { Scope::ResourceType },
            variables: (0..nvars).map(|i| format!("v{i}")).collect(),
            subject: format!("v{subject}"),
            clauses,
            threat_value: None,
            description: String::new(),
            reviewed: None,
        })
}

/// At most 6 resources per view and at most 2 variables.
pub fn case() -> impl Strategy<Value = Case> {
    (provider_universe(6), ontology_universe(6), profile()).prop_map(|(provider, onto, profile)| Case {
        provider,
        onto,
        profile,
    })
}
