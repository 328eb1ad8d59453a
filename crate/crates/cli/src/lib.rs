//! Command-line runner around `cloudrisk-core`: one-shot assessment, the
//! polling loop, shared profile import, synthetic workloads and the scaling
//! benchmark.

pub mod bench;
pub mod config;
pub mod import;
pub mod pipeline;
pub mod synth;
pub mod watch;

pub use config::RunConfig;
pub use pipeline::{exit_code, run_assessment, Assessment};
pub use watch::{CycleOutcome, Watcher};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const NEEDS_ASSESSMENT: i32 = 2;
}
