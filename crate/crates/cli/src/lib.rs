//! Experiment driver: optimization runs, the downtilt baseline, re-evaluation
//! of stored configurations, and the comparison report.

pub mod config;
pub mod report;
pub mod runner;

use corridor_bo::Error;

/// Overrides the worker-thread count.
pub const THREADS_ENV: &str = "CORRIDOR_BO_THREADS";

pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const RUNTIME: i32 = 2;
    pub const ITERATION_CAP: i32 = 3;
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => exit::CONFIG,
        _ => exit::RUNTIME,
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set.
pub fn init_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}
