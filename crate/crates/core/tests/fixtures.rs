use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{TimeZone, Utc};
use cloudrisk_core::assessment::{
    brute_force_oracle, evaluate_all, evaluate_profile, join_views, reconstruct_attack_map,
};
use cloudrisk_core::iac::{parse_path, parse_template, resolve_path, IacTemplate};
use cloudrisk_core::ontology::{translate_all, translate_resource, RuleSet};
use cloudrisk_core::profile::{lint_repository, parse_profile, ProtectionGoal, Scope, ThreatProfile};
use cloudrisk_core::risk::{
    build_report, compute_risk, effective_threat_levels, Fingerprint, LevelRepository,
};
use serde_json::{json, Value};

fn fixture(rel: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/cloudara")
        .join(rel);
    std::fs::read(&path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn template(rel: &str) -> IacTemplate {
    parse_template(&fixture(rel)).unwrap()
}

fn iot_profile() -> ThreatProfile {
    parse_profile(&fixture(
        "profiles/storageaccount_integrity_uploadFromMaliciousIoTDevice.tp.json",
    ))
    .unwrap()
}

fn eavesdrop_profile() -> ThreatProfile {
    parse_profile(&fixture("profiles/all_confidentiality_eavesdropOnConnection.tp.json")).unwrap()
}

#[test]
fn storage_excerpt_parses() {
    let t = template("storage-excerpt.json");
    assert_eq!(t.resources.len(), 1);
    let r = &t.resources[0];
    assert_eq!(r.name, "risky_storage");
    assert_eq!(r.provider_type, "Microsoft.Storage/storageAccounts");
    assert!(t.schema_uri.unwrap().ends_with("deploymentTemplate.json#"));
    let https = resolve_path(&r.body, &parse_path("properties.supportsHttpsTrafficOnly").unwrap());
    assert_eq!(https, [&json!(false)]);
}

#[test]
fn raw_document_round_trips() {
    let bytes = fixture("template.json");
    let t = parse_template(&bytes).unwrap();
    let reparsed: Value = serde_json::from_str(&serde_json::to_string(&t.raw).unwrap()).unwrap();
    let original: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(reparsed, original);
    for r in &t.resources {
        let again: Value = serde_json::from_str(&r.body.to_string()).unwrap();
        assert_eq!(again, r.body);
    }
}

#[test]
fn storage_excerpt_translates_to_golden() {
    let t = template("storage-excerpt.json");
    let o = translate_resource(&t.resources[0], &RuleSet::default_rules()).unwrap();
    let golden: Value = serde_json::from_slice(&fixture("storage-ontology.json")).unwrap();
    assert_eq!(o.document(), golden);
    assert_eq!(o.type_chain, ["ObjectStorage", "Storage", "Resource"]);
}

#[test]
fn fixture_profile_shape() {
    let p = iot_profile();
    assert_eq!(p.name.to_string(), "storageaccount_integrity_uploadFromMaliciousIoTDevice");
    assert_eq!(p.variables.len(), 2);
    assert_eq!(p.clauses.len(), 4);
    let e = eavesdrop_profile();
    assert_eq!(e.scope, Scope::Ontology);
    assert_eq!(e.variables.len(), 1);
}

#[test]
fn iot_upload_found_only_when_hub_is_public() {
    let rules = RuleSet::default_rules();
    let open = template("template.json");
    let onto = translate_all(&open, &rules).unwrap();
    let hit = evaluate_profile(&iot_profile(), &open.resources, &onto);
    assert_eq!(hit.affected(), ["risky_storage"]);
    assert_eq!(hit.bindings.len(), 1);
    assert_eq!(hit.bindings[0].get("hub"), Some("cloudara-hub"));
    assert_eq!(
        brute_force_oracle(&iot_profile(), &open.resources, &onto).unwrap(),
        hit
    );

    let closed = template("template-private-hub.json");
    let onto = translate_all(&closed, &rules).unwrap();
    assert!(evaluate_profile(&iot_profile(), &closed.resources, &onto)
        .affected_assets
        .is_empty());
}

#[test]
fn ontology_profile_against_translated_storage() {
    let t = template("storage-excerpt.json");
    let onto = translate_all(&t, &RuleSet::default_rules()).unwrap();
    let hit = evaluate_profile(&eavesdrop_profile(), &t.resources, &onto);
    assert_eq!(hit.affected(), ["/subscriptions/.../storageAccounts/risky_storage"]);
    assert_eq!(
        brute_force_oracle(&eavesdrop_profile(), &t.resources, &onto).unwrap(),
        hit
    );
}

#[test]
fn fixture_bundle_end_to_end() {
    let t = template("template.json").with_default_group("cloudara-data");
    let onto = translate_all(&t, &RuleSet::default_rules()).unwrap();
    let profiles = [iot_profile(), eavesdrop_profile()];
    let threats = evaluate_all(&profiles, &t.resources, &onto);
    assert_eq!(threats.len(), 2);
    assert!(threats.iter().all(|t| !t.affected_assets.is_empty()));

    let joined = join_views(&threats, &onto);
    let map = reconstruct_attack_map(&joined);
    assert_eq!(
        map.get("risky_storage", ProtectionGoal::Integrity)
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>(),
        ["storageaccount_integrity_uploadFromMaliciousIoTDevice"]
    );
    assert!(map.get("risky_storage", ProtectionGoal::Confidentiality).is_some());

    let repo = LevelRepository::from_json(&fixture("levels.json")).unwrap();
    let levels = effective_threat_levels(&profiles, &repo.threat_levels).unwrap();
    let groups: BTreeMap<String, String> = t
        .resources
        .iter()
        .map(|r| (r.name.clone(), r.resource_group.clone().unwrap()))
        .collect();
    let scores = compute_risk(&map, &repo.impacts, &levels, &groups).unwrap();
    let integrity = scores
        .iter()
        .find(|s| s.protection_goal == ProtectionGoal::Integrity)
        .unwrap();
    assert_eq!(
        (integrity.threat_level, integrity.impact_level, integrity.risk),
        (2, 2, 4)
    );
    assert!(scores.iter().all(|s| !s.needs_assessment));

    let assets: Vec<String> = t.resources.iter().map(|r| r.name.clone()).collect();
    let mut fp = Fingerprint::new();
    fp.update("template", &fixture("template.json"));
    let at = Utc.with_ymd_and_hms(2026, 10, 18, 0, 0, 0).unwrap();
    let report = build_report(threats, &map, scores, lint_repository(&profiles), &assets, &fp, at);
    assert_eq!(report.clean_assets, ["cloudara-hub"]);
    assert!(report.scores.iter().any(|s| s.risk == 4));
}

#[test]
fn synthetic_thousand_resources_keep_order() {
    let resources: Vec<Value> = (0..1000)
        .map(|i| json!({"name": format!("res-{i}"), "type": "Generic/resource", "properties": {"security": "allow"}}))
        .collect();
    let t = parse_template(json!({ "resources": resources }).to_string().as_bytes()).unwrap();
    assert_eq!(t.resources.len(), 1000);
    for (i, r) in t.resources.iter().enumerate() {
        assert_eq!(r.name, format!("res-{i}"));
        assert_eq!(r.source_index, i);
    }
    let onto = translate_all(&t, &RuleSet::default_rules()).unwrap();
    assert_eq!(onto.len(), 1000);
}
