//! Scaling benchmark over synthetic workloads. Only `evaluate_all` is timed.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use cloudrisk_core::{evaluate_all, parse_template};
use serde::Serialize;

use crate::synth::{generate_profiles, generate_synthetic};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkPoint {
    pub n_resources: usize,
    pub n_profiles: usize,
    pub eval_duration: f64,
}

/// `a` or `a-b/step`.
fn parse_range(text: &str) -> Result<Vec<usize>> {
    let num = |s: &str| {
        usize::from_str(s.trim()).with_context(|| format!("bad number {s:?} in grid"))
    };
    let values = match text.split_once('-') {
        None => vec![num(text)?],
        Some((lo, rest)) => {
            let (hi, step) = rest
                .split_once('/')
                .ok_or_else(|| anyhow!("range {text:?} needs a /step"))?;
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if step == 0 || lo > hi {
                bail!("empty range {text:?}");
            }
            (lo..=hi).step_by(step).collect()
        }
    };
    if values.contains(&0) {
        bail!("grid values must be at least 1");
    }
    Ok(values)
}

/// Parses a grid such as `1000-10000/1000x100,1000x500`: comma-separated
/// `<resources>x<profiles>` items, each side a number or `lo-hi/step`.
pub fn parse_grid(spec: &str) -> Result<Vec<(usize, usize)>> {
    let mut grid = Vec::new();
    for item in spec.split(',').filter(|s| !s.trim().is_empty()) {
        let (n, m) = item
            .split_once('x')
            .ok_or_else(|| anyhow!("grid item {item:?} must look like <resources>x<profiles>"))?;
        for n in parse_range(n)? {
            for m in parse_range(m)? {
                grid.push((n, m));
            }
        }
    }
    if grid.is_empty() {
        bail!("empty grid");
    }
    Ok(grid)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

/// Median of `reps` timed runs after one untimed warm-up run.
pub fn measure(n_resources: usize, n_profiles: usize, reps: usize) -> BenchmarkPoint {
    let template = parse_template(generate_synthetic(n_resources).to_string().as_bytes())
        .expect("synthetic template parses");
    let profiles = generate_profiles(n_profiles);
    drop(evaluate_all(&profiles, &template.resources, &[]));
    let samples = (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            let threats = evaluate_all(&profiles, &template.resources, &[]);
            let elapsed = start.elapsed().as_secs_f64();
            drop(threats);
            elapsed
        })
        .collect();
    BenchmarkPoint {
        n_resources,
        n_profiles,
        eval_duration: median(samples).max(f64::MIN_POSITIVE),
    }
}

pub fn run_benchmark(grid: &[(usize, usize)], reps: usize) -> Vec<BenchmarkPoint> {
    grid.iter().map(|&(n, m)| measure(n, m, reps)).collect()
}

pub fn to_csv(points: &[BenchmarkPoint]) -> String {
    let mut out = String::from("n_resources,n_profiles,median_seconds\n");
    for p in points {
        writeln!(out, "{},{},{:.9}", p.n_resources, p.n_profiles, p.eval_duration).unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares y = slope * x + intercept.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}
