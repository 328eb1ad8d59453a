//! ingest -> translate -> lint -> evaluate -> reconstruct -> risk -> report.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use cloudrisk_core::iac::ResourceDescriptor;
use cloudrisk_core::ontology::{translate_all, OntologyResource};
use cloudrisk_core::profile::{lint_repository_with, PROFILE_EXTENSION};
use cloudrisk_core::risk::{
    build_report, compute_risk, effective_threat_levels, render_table, Fingerprint,
    LevelRepository,
};
use cloudrisk_core::{
    evaluate_all, join_views, parse_profile, parse_template, reconstruct_attack_map, RiskReport,
    RuleSet, ThreatProfile,
};
use log::{debug, info, warn};

use crate::config::RunConfig;
use crate::exit;

/// Raw bytes of every input file, read once per run.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub templates: Vec<(PathBuf, Vec<u8>)>,
    pub local_profiles: Vec<(PathBuf, Vec<u8>)>,
    pub shared_profiles: Vec<(PathBuf, Vec<u8>)>,
    pub rules: Option<Vec<u8>>,
    pub levels: Option<Vec<u8>>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Profile files under `dir`, sorted by path.
pub fn profile_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        bail!("profile directory {} does not exist", dir.display());
    }
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.with_context(|| format!("cannot list {}", dir.display()))?;
        let is_profile = entry
            .file_name()
            .to_str()
            .is_some_and(|n| n.ends_with(PROFILE_EXTENSION));
        if entry.file_type().is_file() && is_profile {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

fn read_profiles(dir: &Path) -> Result<Vec<(PathBuf, Vec<u8>)>> {
    profile_files(dir)?
        .into_iter()
        .map(|p| read(&p).map(|b| (p, b)))
        .collect()
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    Ok(Inputs {
        templates: cfg
            .templates
            .iter()
            .map(|p| read(p).map(|b| (p.clone(), b)))
            .collect::<Result<_>>()?,
        local_profiles: read_profiles(&cfg.profile_dir)?,
        shared_profiles: match &cfg.shared_profile_dir {
            Some(dir) if cfg.include_unreviewed => read_profiles(dir)?,
            _ => Vec::new(),
        },
        rules: cfg.rules_file.as_deref().map(read).transpose()?,
        levels: cfg.levels_file.as_deref().map(read).transpose()?,
    })
}

fn relative_label(kind: &str, root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    format!("{kind}:{}", rel.display())
}

impl Inputs {
    /// Hash of everything that can change the report apart from the
    /// timestamp. Profile files are keyed by their path relative to the
    /// profile directory so moving the whole tree does not change it.
    pub fn fingerprint(&self, cfg: &RunConfig) -> Fingerprint {
        let mut fp = Fingerprint::new();
        for (i, (_, bytes)) in self.templates.iter().enumerate() {
            fp.update(&format!("template:{i}"), bytes);
        }
        for (path, bytes) in &self.local_profiles {
            fp.update(&relative_label("profile", &cfg.profile_dir, path), bytes);
        }
        if let Some(dir) = &cfg.shared_profile_dir {
            for (path, bytes) in &self.shared_profiles {
                fp.update(&relative_label("shared", dir, path), bytes);
            }
        }
        fp.update("rules", self.rules.as_deref().unwrap_or_default());
        fp.update("levels", self.levels.as_deref().unwrap_or_default());
        let options = format!(
            "include_unreviewed={};default_group={}",
            cfg.include_unreviewed,
            cfg.default_resource_group.as_deref().unwrap_or("")
        );
        fp.update("options", options.as_bytes());
        fp
    }
}

/// Local profiles, minus unreviewed ones unless asked for, plus shared
/// profiles whose names are not taken locally.
pub fn select_profiles(inputs: &Inputs, include_unreviewed: bool) -> Result<Vec<ThreatProfile>> {
    let parse = |(path, bytes): &(PathBuf, Vec<u8>)| {
        parse_profile(bytes).with_context(|| format!("invalid profile {}", path.display()))
    };
    let mut profiles = Vec::new();
    for file in &inputs.local_profiles {
        let p = parse(file)?;
        if p.is_unreviewed() && !include_unreviewed {
            debug!("skipping unreviewed profile {}", p.name);
            continue;
        }
        profiles.push(p);
    }
    if include_unreviewed {
        let local: BTreeSet<String> = profiles.iter().map(|p| p.name.to_string()).collect();
        for file in &inputs.shared_profiles {
            let p = parse(file)?;
            if local.contains(&p.name.to_string()) {
                warn!("shared profile {} shadowed by a local profile", p.name);
                continue;
            }
            profiles.push(p);
        }
    }
    Ok(profiles)
}

pub fn assess(cfg: &RunConfig, inputs: &Inputs, generated_at: DateTime<Utc>) -> Result<RiskReport> {
    let rules = match &inputs.rules {
        Some(bytes) => RuleSet::from_json(bytes).context("invalid mapping rules")?,
        None => RuleSet::default_rules(),
    };
    let repo = match &inputs.levels {
        Some(bytes) => LevelRepository::from_json(bytes).context("invalid level repository")?,
        None => LevelRepository::default(),
    };

    let mut provider: Vec<ResourceDescriptor> = Vec::new();
    let mut onto: Vec<OntologyResource> = Vec::new();
    for (path, bytes) in &inputs.templates {
        let mut template =
            parse_template(bytes).with_context(|| format!("invalid template {}", path.display()))?;
        if let Some(group) = &cfg.default_resource_group {
            template = template.with_default_group(group);
        }
        let translated = translate_all(&template, &rules)
            .with_context(|| format!("cannot translate {}", path.display()))?;
        provider.extend(template.resources);
        onto.extend(translated);
    }
    info!("{} resources discovered", provider.len());

    let profiles = select_profiles(inputs, cfg.include_unreviewed)?;
    let repo_levels: BTreeSet<_> = repo.threat_levels.iter().map(|l| &l.profile).collect();
    let lint = lint_repository_with(&profiles, |name| repo_levels.contains(name));
    for finding in &lint {
        warn!("lint: {}", finding.message);
    }

    let threats = evaluate_all(&profiles, &provider, &onto);
    let joined = join_views(&threats, &onto);
    let map = reconstruct_attack_map(&joined);
    info!("{} profiles evaluated, {} (asset, goal) pairs threatened", profiles.len(), map.len());

    let levels = effective_threat_levels(&profiles, &repo.threat_levels)?;
    let group_of: BTreeMap<String, String> = provider
        .iter()
        .filter_map(|r| Some((r.name.clone(), r.resource_group.clone()?)))
        .collect();
    let scores = compute_risk(&map, &repo.impacts, &levels, &group_of)?;
    let assets: Vec<String> = provider.iter().map(|r| r.name.clone()).collect();
    let fingerprint = inputs.fingerprint(cfg);
    Ok(build_report(joined, &map, scores, lint, &assets, &fingerprint, generated_at))
}

/// A finished run: the report and where it was written.
#[derive(Debug, Clone)]
pub struct Assessment {
    pub report: RiskReport,
    pub json_path: PathBuf,
    pub table_path: PathBuf,
}

pub fn report_stem(at: DateTime<Utc>) -> String {
    format!("report-{}", at.format("%Y%m%dT%H%M%S%.3fZ"))
}

/// Writes via a temporary file and rename so readers never see a partial
/// report.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_report(report: &RiskReport, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let stem = report_stem(report.generated_at);
    let json_path = out_dir.join(format!("{stem}.json"));
    let table_path = out_dir.join(format!("{stem}.txt"));
    write_atomic(&json_path, &report.to_json())?;
    write_atomic(&table_path, &render_table(report))?;
    Ok((json_path, table_path))
}

fn with_pool<T: Send>(parallelism: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match parallelism {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot start worker pool")?
            .install(f)),
        None => Ok(f()),
    }
}

pub(crate) fn assess_and_write(
    cfg: &RunConfig,
    inputs: &Inputs,
    generated_at: DateTime<Utc>,
) -> Result<Assessment> {
    let report = with_pool(cfg.parallelism, || assess(cfg, inputs, generated_at))??;
    let (json_path, table_path) = write_report(&report, &cfg.report_out)?;
    info!("report written to {}", json_path.display());
    Ok(Assessment {
        report,
        json_path,
        table_path,
    })
}

/// One-shot run. Nothing is written if any step fails.
pub fn run_assessment(cfg: &RunConfig) -> Result<Assessment> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    assess_and_write(cfg, &inputs, cfg.now())
}

pub fn exit_code(result: &Result<Assessment>) -> i32 {
    match result {
        Ok(a) if a.report.needs_assessment() => exit::NEEDS_ASSESSMENT,
        Ok(_) => exit::OK,
        Err(_) => exit::ERROR,
    }
}
