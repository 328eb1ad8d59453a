use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ProfileError;

/// One of the classic CIA protection goals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtectionGoal {
    Confidentiality,
    Integrity,
    Availability,
}

impl ProtectionGoal {
    pub const ALL: [ProtectionGoal; 3] = [
        ProtectionGoal::Confidentiality,
        ProtectionGoal::Integrity,
        ProtectionGoal::Availability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtectionGoal::Confidentiality => "confidentiality",
            ProtectionGoal::Integrity => "integrity",
            ProtectionGoal::Availability => "availability",
        }
    }
}

impl fmt::Display for ProtectionGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtectionGoal {
    type Err = ProfileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtectionGoal::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| ProfileError::UnknownGoal(s.to_string()))
    }
}

/// `<assetType>_<protectionGoal>_<attackShortDescription>`.
///
/// Ordering and equality follow the rendered string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProfileName {
    pub asset_type: String,
    pub protection_goal: ProtectionGoal,
    pub attack: String,
}

impl ProfileName {
    pub fn new(
        asset_type: impl Into<String>,
        protection_goal: ProtectionGoal,
        attack: impl Into<String>,
    ) -> Result<Self, ProfileError> {
        validate_name(&format!(
            "{}_{}_{}",
            asset_type.into(),
            protection_goal,
            attack.into()
        ))
    }
}

/// Splits on the first two underscores and checks the goal segment. The
/// description may itself contain underscores.
pub fn validate_name(text: &str) -> Result<ProfileName, ProfileError> {
    let bad = || ProfileError::BadName(text.to_string());
    let mut parts = text.splitn(3, '_');
    let (Some(asset_type), Some(goal), Some(attack)) = (parts.next(), parts.next(), parts.next())
    else {
        return Err(bad());
    };
    if asset_type.is_empty() || goal.is_empty() || attack.is_empty() {
        return Err(bad());
    }
    if text.chars().any(char::is_whitespace) {
        return Err(bad());
    }
    Ok(ProfileName {
        asset_type: asset_type.to_string(),
        protection_goal: goal.parse()?,
        attack: attack.to_string(),
    })
}

impl fmt::Display for ProfileName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}_{}", self.asset_type, self.protection_goal, self.attack)
    }
}

impl FromStr for ProfileName {
    type Err = ProfileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        validate_name(s)
    }
}

impl Ord for ProfileName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

impl PartialOrd for ProfileName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for ProfileName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProfileName {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        validate_name(&text).map_err(serde::de::Error::custom)
    }
}
