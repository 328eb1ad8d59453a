use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Result};
use chrono::{DateTime, Utc};

pub const DEFAULT_INTERVAL_SECS: u64 = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub templates: Vec<PathBuf>,
    pub profile_dir: PathBuf,
    pub shared_profile_dir: Option<PathBuf>,
    pub include_unreviewed: bool,
    /// Mapping rules; the embedded default set when absent.
    pub rules_file: Option<PathBuf>,
    /// Impact & threat level repository; treated as empty when absent.
    pub levels_file: Option<PathBuf>,
    pub report_out: PathBuf,
    pub interval_seconds: Option<u64>,
    pub parallelism: Option<usize>,
    /// Resource group for resources that do not name one.
    pub default_resource_group: Option<String>,
    /// Fixed report timestamp, for reproducible output.
    pub pinned_time: Option<DateTime<Utc>>,
}

impl RunConfig {
    pub fn new(templates: Vec<PathBuf>, profile_dir: PathBuf, report_out: PathBuf) -> Self {
        Self {
            templates,
            profile_dir,
            shared_profile_dir: None,
            include_unreviewed: false,
            rules_file: None,
            levels_file: None,
            report_out,
            interval_seconds: None,
            parallelism: None,
            default_resource_group: None,
            pinned_time: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.templates.is_empty() {
            bail!("at least one template is required");
        }
        if self.interval_seconds == Some(0) {
            bail!("interval must be at least 1 second");
        }
        if self.parallelism == Some(0) {
            bail!("parallelism must be at least 1");
        }
        Ok(())
    }

    pub fn interval(&self) -> Duration {
        Duration::from_secs(self.interval_seconds.unwrap_or(DEFAULT_INTERVAL_SECS))
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.pinned_time.unwrap_or_else(Utc::now)
    }
}
