//! Risk calculation from the attack map and the Impact & Threat Level
//! Repository.
//!
//! Per (asset, goal) the threat level is the maximum threat value among the
//! matched profiles and the impact level comes from the repository (asset
//! entries before resource-group entries). A missing value counts as 0, which
//! zeroes the risk and sets `needs_assessment`.

mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessment::AssetThreatMap;
use crate::profile::{ProfileName, ProtectionGoal, ThreatProfile};

pub use report::{build_report, render_table, Fingerprint, RiskReport};

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("malformed level repository: {0}")]
    MalformedRepository(String),
    #[error("level {0} is outside [1,3]")]
    BadLevel(i64),
    #[error("conflicting impact entries for {target} / {goal}")]
    ConflictingEntries { target: String, goal: ProtectionGoal },
    #[error("conflicting threat levels for {0}")]
    ConflictingThreatLevels(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ImpactTarget {
    Asset(String),
    Group(String),
}

impl std::fmt::Display for ImpactTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ImpactTarget::Asset(a) => write!(f, "asset {a}"),
            ImpactTarget::Group(g) => write!(f, "group {g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactEntry {
    pub target: ImpactTarget,
    pub goal: ProtectionGoal,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreatLevelEntry {
    pub profile: ProfileName,
    pub value: u8,
}

/// The Impact & Threat Level Repository file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRepository {
    #[serde(default)]
    pub impacts: Vec<ImpactEntry>,
    #[serde(default)]
    pub threat_levels: Vec<ThreatLevelEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRepository {
    #[serde(default)]
    impacts: Vec<RawImpact>,
    #[serde(default)]
    threat_levels: Vec<RawThreatLevel>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImpact {
    target: ImpactTarget,
    goal: ProtectionGoal,
    value: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThreatLevel {
    profile: ProfileName,
    value: i64,
}

fn level(v: i64) -> Result<u8, RiskError> {
    match v {
        1..=3 => Ok(v as u8),
        _ => Err(RiskError::BadLevel(v)),
    }
}

impl LevelRepository {
    pub fn from_json(bytes: &[u8]) -> Result<Self, RiskError> {
        let raw: RawRepository = serde_json::from_slice(bytes)
            .map_err(|e| RiskError::MalformedRepository(e.to_string()))?;
        Ok(Self {
            impacts: raw
                .impacts
                .into_iter()
                .map(|i| {
                    Ok(ImpactEntry {
                        target: i.target,
                        goal: i.goal,
                        value: level(i.value)?,
                    })
                })
                .collect::<Result<_, RiskError>>()?,
            threat_levels: raw
                .threat_levels
                .into_iter()
                .map(|t| {
                    Ok(ThreatLevelEntry {
                        profile: t.profile,
                        value: level(t.value)?,
                    })
                })
                .collect::<Result<_, RiskError>>()?,
        })
    }
}

/// Combines a threat level and an impact level into a risk value.
pub trait RiskModel {
    fn combine(&self, threat: u8, impact: u8) -> u8;
}

/// `risk = threat × impact`; levels in [1,3] give risks in [1,9].
#[derive(Debug, Clone, Copy, Default)]
pub struct ProductModel;

impl RiskModel for ProductModel {
    fn combine(&self, threat: u8, impact: u8) -> u8 {
        threat * impact
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct RiskScore {
    pub asset: String,
    pub protection_goal: ProtectionGoal,
    pub matched_profiles: Vec<ProfileName>,
    pub threat_level: u8,
    pub impact_level: u8,
    pub risk: u8,
    pub needs_assessment: bool,
}

/// Impact for (asset, goal): an asset entry wins over a group entry; nothing
/// found gives 0.
pub fn lookup_impact(
    asset: &str,
    group: Option<&str>,
    goal: ProtectionGoal,
    repo: &[ImpactEntry],
) -> Result<u8, RiskError> {
    let find = |target: ImpactTarget| -> Result<Option<u8>, RiskError> {
        let mut found: Option<u8> = None;
        for e in repo.iter().filter(|e| e.goal == goal && e.target == target) {
            match found {
                Some(v) if v != e.value => {
                    return Err(RiskError::ConflictingEntries {
                        target: target.to_string(),
                        goal,
                    })
                }
                _ => found = Some(e.value),
            }
        }
        Ok(found)
    };
    if let Some(v) = find(ImpactTarget::Asset(asset.to_string()))? {
        return Ok(v);
    }
    match group {
        Some(g) => Ok(find(ImpactTarget::Group(g.to_string()))?.unwrap_or(0)),
        None => Ok(0),
    }
}

/// Threat values per profile: repository entries override values embedded in
/// profile files.
pub fn effective_threat_levels(
    profiles: &[ThreatProfile],
    repo: &[ThreatLevelEntry],
) -> Result<Vec<ThreatLevelEntry>, RiskError> {
    let mut from_repo: BTreeMap<&ProfileName, u8> = BTreeMap::new();
    for e in repo {
        match from_repo.insert(&e.profile, e.value) {
            Some(prev) if prev != e.value => {
                return Err(RiskError::ConflictingThreatLevels(e.profile.to_string()))
            }
            _ => {}
        }
    }
    let mut levels: BTreeMap<ProfileName, u8> = BTreeMap::new();
    for p in profiles {
        if let Some(v) = p.threat_value {
            // Duplicate names with different embedded values: keep the higher.
            let slot = levels.entry(p.name.clone()).or_insert(v);
            *slot = (*slot).max(v);
        }
    }
    for (name, v) in from_repo {
        levels.insert(name.clone(), v);
    }
    Ok(levels
        .into_iter()
        .map(|(profile, value)| ThreatLevelEntry { profile, value })
        .collect())
}

/// Maximum threat value among the profiles matched for (asset, goal); a
/// profile without any value contributes 0.
pub fn threat_level_for(
    asset: &str,
    goal: ProtectionGoal,
    map: &AssetThreatMap,
    levels: &[ThreatLevelEntry],
) -> u8 {
    map.get(asset, goal)
        .map_or(0, |matched| max_threat(matched, &level_table(levels)))
}

fn level_table(levels: &[ThreatLevelEntry]) -> BTreeMap<&ProfileName, u8> {
    levels.iter().map(|l| (&l.profile, l.value)).collect()
}

fn max_threat(matched: &[ProfileName], table: &BTreeMap<&ProfileName, u8>) -> u8 {
    matched
        .iter()
        .map(|name| table.get(name).copied().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

pub fn compute_risk(
    map: &AssetThreatMap,
    impacts: &[ImpactEntry],
    levels: &[ThreatLevelEntry],
    group_of: &BTreeMap<String, String>,
) -> Result<Vec<RiskScore>, RiskError> {
    compute_risk_with(&ProductModel, map, impacts, levels, group_of)
}

/// One row per (asset, goal) key of the map, ordered by asset then goal.
pub fn compute_risk_with<M: RiskModel + ?Sized>(
    model: &M,
    map: &AssetThreatMap,
    impacts: &[ImpactEntry],
    levels: &[ThreatLevelEntry],
    group_of: &BTreeMap<String, String>,
) -> Result<Vec<RiskScore>, RiskError> {
    let table = level_table(levels);
    let mut scores = Vec::with_capacity(map.len());
    for (asset, goal, matched) in map.iter() {
        let threat_level = max_threat(matched, &table);
        let group = group_of.get(asset).map(String::as_str);
        let impact_level = lookup_impact(asset, group, goal, impacts)?;
        let needs_assessment = (threat_level == 0 || impact_level == 0) && !matched.is_empty();
        let risk = if threat_level == 0 || impact_level == 0 {
            0
        } else {
            model.combine(threat_level, impact_level)
        };
        scores.push(RiskScore {
            asset: asset.to_string(),
            protection_goal: goal,
            matched_profiles: matched.to_vec(),
            threat_level,
            impact_level,
            risk,
            needs_assessment,
        });
    }
    scores.sort();
    Ok(scores)
}
