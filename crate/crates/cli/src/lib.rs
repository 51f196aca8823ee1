//! Sweeps, verification runs and file output for `nhpc-core`.

pub mod config;
pub mod error;
pub mod sweep;
pub mod verify;

pub use config::{Method, RunConfig};
pub use error::CliError;
pub use sweep::{run_sweep, RunSummary, EP_NUDGE};
pub use verify::{verify, Check, VerifyOptions};

/// Environment variable read for the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "NHPC_WORKERS";
