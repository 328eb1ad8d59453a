//! Deterministic synthetic workloads: generic resources with one
//! firewall-like property, and profiles that match it.

use cloudrisk_core::{parse_profile, ThreatProfile};
use serde_json::{json, Value};

pub const SYNTHETIC_TYPE: &str = "Generic/resource";

pub fn generate_synthetic(n_resources: usize) -> Value {
    let resources: Vec<Value> = (0..n_resources)
        .map(|i| {
            json!({
                "name": format!("res-{i}"),
                "type": SYNTHETIC_TYPE,
                "properties": {"security": "allow"},
            })
        })
        .collect();
    json!({ "resources": resources })
}

pub fn synthetic_profile_json(i: usize) -> Value {
    json!({
        "name": format!("generic{i}_availability_openFirewall"),
        "scope": "resource_type",
        "variables": ["r"],
        "subject": "r",
        "clauses": [
            {"var": "r", "path": "properties.security", "op": "eq", "value": "allow"}
        ],
        "threat_value": 1,
    })
}

pub fn generate_profiles(n_profiles: usize) -> Vec<ThreatProfile> {
    (0..n_profiles)
        .map(|i| {
            parse_profile(synthetic_profile_json(i).to_string().as_bytes())
                .expect("synthetic profile is valid")
        })
        .collect()
}
