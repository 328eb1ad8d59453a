//! Pulls profiles from a shared repository into the local one.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cloudrisk_core::parse_profile;
use cloudrisk_core::profile::{serialize_profile, PROFILE_EXTENSION};
use serde::Serialize;

use crate::pipeline::profile_files;

#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize)]
pub struct ImportSummary {
    /// Profiles copied, flagged unreviewed.
    pub imported: Vec<String>,
    /// Shared profiles whose name already exists locally.
    pub duplicates: Vec<String>,
    /// Shared files that failed to parse, with the reason.
    pub invalid: Vec<(PathBuf, String)>,
}

impl ImportSummary {
    pub fn is_empty(&self) -> bool {
        self.imported.is_empty() && self.duplicates.is_empty() && self.invalid.is_empty()
    }
}

/// Copies shared profiles whose names are not present locally. Local files
/// are never overwritten; copies carry `"reviewed": false`.
pub fn import_shared(shared_dir: &Path, local_dir: &Path) -> Result<ImportSummary> {
    for dir in [shared_dir, local_dir] {
        if !dir.is_dir() {
            bail!("{} is not a directory", dir.display());
        }
    }
    let mut taken = BTreeSet::new();
    for path in profile_files(local_dir)? {
        let bytes = fs::read(&path).with_context(|| format!("cannot read {}", path.display()))?;
        let p = parse_profile(&bytes).with_context(|| format!("invalid profile {}", path.display()))?;
        taken.insert(p.name.to_string());
    }

    let mut summary = ImportSummary::default();
    for path in profile_files(shared_dir)? {
        let bytes = fs::read(&path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut profile = match parse_profile(&bytes) {
            Ok(p) => p,
            Err(e) => {
                summary.invalid.push((path, e.to_string()));
                continue;
            }
        };
        let name = profile.name.to_string();
        let target = local_dir.join(format!("{name}{PROFILE_EXTENSION}"));
        if !taken.insert(name.clone()) || target.exists() {
            summary.duplicates.push(name);
            continue;
        }
        profile.reviewed = Some(false);
        fs::write(&target, serialize_profile(&profile))
            .with_context(|| format!("cannot write {}", target.display()))?;
        summary.imported.push(name);
    }
    Ok(summary)
}
