//! Polling loop: re-read inputs every interval and write a report whenever
//! their fingerprint changes.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::Result;
use chrono::{DateTime, Utc};
use log::{error, info};

use crate::config::RunConfig;
use crate::pipeline::{assess_and_write, load_inputs, Assessment};

#[derive(Debug)]
pub enum CycleOutcome {
    Written(Box<Assessment>),
    Unchanged,
}

#[derive(Debug)]
pub struct Watcher {
    cfg: RunConfig,
    last_fingerprint: Option<String>,
}

impl Watcher {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            last_fingerprint: None,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    /// Runs one cycle with the given report timestamp. The fingerprint is
    /// only remembered once its report is on disk, so a failed cycle is
    /// retried on the next tick.
    pub fn cycle_at(&mut self, now: DateTime<Utc>) -> Result<CycleOutcome> {
        let inputs = load_inputs(&self.cfg)?;
        let fingerprint = inputs.fingerprint(&self.cfg).finish();
        if self.last_fingerprint.as_deref() == Some(fingerprint.as_str()) {
            info!("unchanged ({fingerprint})");
            return Ok(CycleOutcome::Unchanged);
        }
        let assessment = assess_and_write(&self.cfg, &inputs, now)?;
        self.last_fingerprint = Some(fingerprint);
        Ok(CycleOutcome::Written(Box::new(assessment)))
    }

    pub fn cycle(&mut self) -> Result<CycleOutcome> {
        let now = self.cfg.now();
        self.cycle_at(now)
    }
}

/// Loops until `stop` is set or `max_cycles` cycles have run. Errors in a
/// cycle are logged and the loop carries on.
pub fn run_continuous(cfg: RunConfig, stop: Arc<AtomicBool>, max_cycles: Option<u64>) -> Result<u64> {
    let interval = cfg.interval();
    let mut watcher = Watcher::new(cfg)?;
    let mut cycles = 0;
    while !stop.load(Ordering::SeqCst) {
        let started = Instant::now();
        match watcher.cycle() {
            Ok(CycleOutcome::Written(a)) => info!("cycle {cycles}: wrote {}", a.json_path.display()),
            Ok(CycleOutcome::Unchanged) => {}
            Err(e) => error!("cycle {cycles} failed: {e:#}"),
        }
        cycles += 1;
        if max_cycles.is_some_and(|m| cycles >= m) {
            break;
        }
        sleep_until(started + interval, &stop);
    }
    Ok(cycles)
}

fn sleep_until(deadline: Instant, stop: &AtomicBool) {
    const TICK: Duration = Duration::from_millis(100);
    while !stop.load(Ordering::SeqCst) {
        let now = Instant::now();
        if now >= deadline {
            return;
        }
        std::thread::sleep(TICK.min(deadline - now));
    }
}
