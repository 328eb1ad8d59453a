use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{ProfileName, ProtectionGoal, ThreatProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LintKind {
    DuplicateName,
    OverlapHint,
    MissingThreatValue,
    /// No clauses: every resource matches.
    VacuousProfile,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LintFinding {
    pub kind: LintKind,
    pub severity: Severity,
    pub profiles: Vec<String>,
    pub message: String,
}

pub fn lint_repository(profiles: &[ThreatProfile]) -> Vec<LintFinding> {
    lint_repository_with(profiles, |_| false)
}

/// Like [`lint_repository`], but a profile whose threat value is supplied
/// elsewhere (`has_external_level`) is not reported as missing one.
pub fn lint_repository_with<F>(profiles: &[ThreatProfile], has_external_level: F) -> Vec<LintFinding>
where
    F: Fn(&ProfileName) -> bool,
{
    let mut findings = Vec::new();

    let mut by_name: BTreeMap<String, usize> = BTreeMap::new();
    for p in profiles {
        *by_name.entry(p.name.to_string()).or_default() += 1;
    }
    for (name, count) in &by_name {
        if *count > 1 {
            findings.push(LintFinding {
                kind: LintKind::DuplicateName,
                severity: Severity::Error,
                profiles: vec![name.clone()],
                message: format!("{count} profiles are named {name}"),
            });
        }
    }

    let mut overlaps: BTreeMap<(ProtectionGoal, &str), BTreeSet<String>> = BTreeMap::new();
    for p in profiles {
        overlaps
            .entry((p.name.protection_goal, p.name.attack.as_str()))
            .or_default()
            .insert(p.name.to_string());
    }
    for ((goal, attack), names) in overlaps {
        let asset_types: BTreeSet<&str> = profiles
            .iter()
            .filter(|p| p.name.protection_goal == goal && p.name.attack == attack)
            .map(|p| p.name.asset_type.as_str())
            .collect();
        if asset_types.len() > 1 {
            findings.push(LintFinding {
                kind: LintKind::OverlapHint,
                severity: Severity::Info,
                message: format!(
                    "{attack} on {goal} is described for several asset types: {}",
                    asset_types.into_iter().collect::<Vec<_>>().join(", ")
                ),
                profiles: names.into_iter().collect(),
            });
        }
    }

    for p in profiles {
        if p.threat_value.is_none() && !has_external_level(&p.name) {
            findings.push(LintFinding {
                kind: LintKind::MissingThreatValue,
                severity: Severity::Warning,
                profiles: vec![p.name.to_string()],
                message: format!("{} has no threat value; its risk evaluates to 0", p.name),
            });
        }
        if p.clauses.is_empty() {
            findings.push(LintFinding {
                kind: LintKind::VacuousProfile,
                severity: Severity::Warning,
                profiles: vec![p.name.to_string()],
                message: format!("{} has no clauses and matches every resource", p.name),
            });
        }
    }

    findings.sort();
    findings.dedup();
    findings
}
