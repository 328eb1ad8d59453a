use std::collections::BTreeMap;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use super::IdentifiedThreat;
use crate::profile::{ProfileName, ProtectionGoal};

/// Matched configuration weaknesses per (asset, protection goal). Each list is
/// sorted and duplicate-free.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssetThreatMap {
    entries: BTreeMap<(String, ProtectionGoal), Vec<ProfileName>>,
}

impl AssetThreatMap {
    pub fn get(&self, asset: &str, goal: ProtectionGoal) -> Option<&[ProfileName]> {
        self.entries
            .get(&(asset.to_string(), goal))
            .map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ProtectionGoal, &[ProfileName])> {
        self.entries
            .iter()
            .map(|((a, g), ps)| (a.as_str(), *g, ps.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_asset(&self, asset: &str) -> bool {
        ProtectionGoal::ALL
            .iter()
            .any(|g| self.entries.contains_key(&(asset.to_string(), *g)))
    }
}

pub fn reconstruct_attack_map(threats: &[IdentifiedThreat]) -> AssetThreatMap {
    let mut entries: BTreeMap<(String, ProtectionGoal), Vec<ProfileName>> = BTreeMap::new();
    for t in threats {
        for asset in &t.affected_assets {
            entries
                .entry((asset.to_string(), t.profile_name.protection_goal))
                .or_default()
                .push(t.profile_name.clone());
        }
    }
    for list in entries.values_mut() {
        list.sort();
        list.dedup();
    }
    AssetThreatMap { entries }
}

#[derive(Serialize)]
struct Row<'a> {
    asset: &'a str,
    goal: ProtectionGoal,
    profiles: &'a [ProfileName],
}

impl Serialize for AssetThreatMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.entries.len()))?;
        for (asset, goal, profiles) in self.iter() {
            seq.serialize_element(&Row {
                asset,
                goal,
                profiles,
            })?;
        }
        seq.end()
    }
}
