use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{Context, Result};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use cloudrisk::bench::{parse_grid, run_benchmark, to_csv};
use cloudrisk::config::{RunConfig, DEFAULT_INTERVAL_SECS};
use cloudrisk::import::import_shared;
use cloudrisk::synth::generate_synthetic;
use cloudrisk::watch::run_continuous;
use cloudrisk::{exit, exit_code, run_assessment};

#[derive(Parser)]
#[command(name = "cloudrisk", version, about = "Continuous risk assessment for IaC templates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one assessment and write a report.
    Assess(AssessArgs),
    /// Re-run the assessment every interval, writing a report on change.
    Watch {
        #[command(flatten)]
        assess: AssessArgs,
        #[arg(long, env = "CLOUDRISK_INTERVAL", default_value_t = DEFAULT_INTERVAL_SECS,
              value_parser = clap::value_parser!(u64).range(1..))]
        interval: u64,
        /// Stop after this many cycles.
        #[arg(long, env = "CLOUDRISK_CYCLES")]
        cycles: Option<u64>,
    },
    /// Copy new profiles from a shared repository, flagged unreviewed.
    Import {
        #[arg(long, env = "CLOUDRISK_SHARED")]
        shared: PathBuf,
        #[arg(long, env = "CLOUDRISK_PROFILES")]
        profiles: PathBuf,
    },
    /// Write a synthetic template of generic resources.
    Gen {
        #[arg(long, env = "CLOUDRISK_RESOURCES", value_parser = clap::value_parser!(u64).range(1..))]
        resources: u64,
        #[arg(long, env = "CLOUDRISK_OUT")]
        out: PathBuf,
    },
    /// Time profile evaluation over a grid of synthetic workloads.
    Bench {
        /// e.g. `1000-10000/1000x100,1000x1000-10000/1000`
        #[arg(long, env = "CLOUDRISK_GRID")]
        grid: String,
        #[arg(long, env = "CLOUDRISK_REPS", default_value_t = 3)]
        reps: usize,
        #[arg(long, env = "CLOUDRISK_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AssessArgs {
    #[arg(long = "template", env = "CLOUDRISK_TEMPLATE", required = true, value_delimiter = ',')]
    templates: Vec<PathBuf>,
    #[arg(long, env = "CLOUDRISK_PROFILES")]
    profiles: PathBuf,
    #[arg(long, env = "CLOUDRISK_SHARED")]
    shared: Option<PathBuf>,
    #[arg(long, env = "CLOUDRISK_INCLUDE_UNREVIEWED")]
    include_unreviewed: bool,
    /// Mapping rules; the built-in set when omitted.
    #[arg(long, env = "CLOUDRISK_RULES")]
    rules: Option<PathBuf>,
    #[arg(long, env = "CLOUDRISK_LEVELS")]
    levels: Option<PathBuf>,
    #[arg(long, env = "CLOUDRISK_OUT")]
    out: PathBuf,
    #[arg(long, env = "CLOUDRISK_PARALLELISM")]
    parallelism: Option<usize>,
    /// Resource group for resources that carry none.
    #[arg(long, env = "CLOUDRISK_RESOURCE_GROUP")]
    resource_group: Option<String>,
    /// Pin the report timestamp (RFC 3339).
    #[arg(long, env = "CLOUDRISK_NOW")]
    now: Option<DateTime<Utc>>,
}

impl AssessArgs {
    fn into_config(self, interval: Option<u64>) -> RunConfig {
        RunConfig {
            templates: self.templates,
            profile_dir: self.profiles,
            shared_profile_dir: self.shared,
            include_unreviewed: self.include_unreviewed,
            rules_file: self.rules,
            levels_file: self.levels,
            report_out: self.out,
            interval_seconds: interval,
            parallelism: self.parallelism,
            default_resource_group: self.resource_group,
            pinned_time: self.now,
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Assess(args) => {
            let result = run_assessment(&args.into_config(None));
            match &result {
                Ok(a) => print!("{}", fs::read_to_string(&a.table_path)?),
                Err(e) => eprintln!("error: {e:#}"),
            }
            Ok(exit_code(&result))
        }
        Command::Watch {
            assess,
            interval,
            cycles,
        } => {
            let stop = Arc::new(AtomicBool::new(false));
            let flag = stop.clone();
            ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst))
                .context("cannot install signal handler")?;
            run_continuous(assess.into_config(Some(interval)), stop, cycles)?;
            Ok(exit::OK)
        }
        Command::Import { shared, profiles } => {
            let summary = import_shared(&shared, &profiles)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(exit::OK)
        }
        Command::Gen { resources, out } => {
            let template = generate_synthetic(resources as usize);
            fs::write(&out, serde_json::to_string_pretty(&template)? + "\n")
                .with_context(|| format!("cannot write {}", out.display()))?;
            Ok(exit::OK)
        }
        Command::Bench { grid, reps, out } => {
            let csv = to_csv(&run_benchmark(&parse_grid(&grid)?, reps));
            match out {
                Some(path) => fs::write(&path, &csv)
                    .with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = run(cli.command).unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        exit::ERROR
    });
    ExitCode::from(code as u8)
}
