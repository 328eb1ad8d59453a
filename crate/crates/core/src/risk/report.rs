use std::collections::BTreeSet;
use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::RiskScore;
use crate::assessment::{AssetThreatMap, IdentifiedThreat};
use crate::profile::LintFinding;

/// Content hash over labeled input chunks.
#[derive(Clone)]
pub struct Fingerprint {
    hasher: Sha256,
}

impl Default for Fingerprint {
    fn default() -> Self {
        Self::new()
    }
}

impl Fingerprint {
    pub fn new() -> Self {
        Self {
            hasher: Sha256::new(),
        }
    }

    /// Adds one input. Label and content are length-prefixed so chunk
    /// boundaries cannot be shifted between inputs.
    pub fn update(&mut self, label: &str, content: &[u8]) -> &mut Self {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update((content.len() as u64).to_le_bytes());
        self.hasher.update(content);
        self
    }

    pub fn finish(&self) -> String {
        format!("sha256:{}", hex::encode(self.hasher.clone().finalize()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    #[serde(serialize_with = "rfc3339")]
    pub generated_at: DateTime<Utc>,
    pub fingerprint: String,
    pub scores: Vec<RiskScore>,
    /// Assets without any matched profile.
    pub clean_assets: Vec<String>,
    pub threats: Vec<IdentifiedThreat>,
    pub lint: Vec<LintFinding>,
}

fn rfc3339<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::AutoSi, true))
}

impl RiskReport {
    pub fn needs_assessment(&self) -> bool {
        self.scores.iter().any(|s| s.needs_assessment)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Assembles the report. `assets` is the full discovered asset list; those
/// absent from `map` become `clean_assets`.
pub fn build_report(
    mut threats: Vec<IdentifiedThreat>,
    map: &AssetThreatMap,
    mut scores: Vec<RiskScore>,
    mut lint: Vec<LintFinding>,
    assets: &[String],
    fingerprint: &Fingerprint,
    generated_at: DateTime<Utc>,
) -> RiskReport {
    threats.sort_by(|a, b| a.profile_name.cmp(&b.profile_name));
    scores.sort();
    lint.sort();
    let clean_assets = assets
        .iter()
        .filter(|a| !map.contains_asset(a))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    RiskReport {
        generated_at,
        fingerprint: fingerprint.finish(),
        scores,
        clean_assets,
        threats,
        lint,
    }
}

/// Plain-text table: asset | goal | CWs | threat | impact | risk | flag.
pub fn render_table(report: &RiskReport) -> String {
    let header = ["asset", "goal", "CWs", "threat", "impact", "risk", "flag"].map(String::from);
    let rows: Vec<[String; 7]> = report
        .scores
        .iter()
        .map(|s| {
            [
                s.asset.clone(),
                s.protection_goal.to_string(),
                s.matched_profiles
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(", "),
                s.threat_level.to_string(),
                s.impact_level.to_string(),
                s.risk.to_string(),
                if s.needs_assessment {
                    "needs-assessment".to_string()
                } else {
                    String::new()
                },
            ]
        })
        .collect();
    let mut widths = header.clone().map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String; 7]| {
        let text = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join(" | ");
        let _ = writeln!(out, "{}", text.trim_end());
    };
    line(&header);
    line(&widths.map(|w| "-".repeat(w)));
    for row in &rows {
        line(row);
    }
    if !report.clean_assets.is_empty() {
        let _ = writeln!(out, "\nclean assets: {}", report.clean_assets.join(", "));
    }
    out
}
