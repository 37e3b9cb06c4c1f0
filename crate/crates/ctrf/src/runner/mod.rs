//! Experiment orchestration: sweep configs, deterministic parallel execution,
//! and the result tables the CLI writes.
//!
//! Every sweep follows one pattern: enumerate cells up front, derive each
//! cell's seed from the master seed and the cell coordinates, run cells on a
//! bounded worker pool, and collect results in cell order. Outputs are a pure
//! function of the effective config (seed included); the worker count only
//! changes the schedule, never a byte of any result file.

pub mod auction_run;
pub mod config;
pub mod models;
pub mod report;
pub mod shift;
pub mod simulate;
pub mod train;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::seeding::hash_bytes;

/// Builds the bounded pool used for one run; `workers = 0` means "let the
/// runtime pick".
pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
}

/// Hashes the effective config, minus fields that may not influence results
/// (worker count, output location). The hex digest is stamped on every row.
pub fn config_hash_hex<T: Serialize>(config: &T) -> Result<String> {
    let mut value = serde_json::to_value(config)?;
    if let Some(map) = value.as_object_mut() {
        map.remove("workers");
        map.remove("out_dir");
    }
    let canonical = serde_json::to_vec(&value)?;
    Ok(format!("{:016x}", hash_bytes(&canonical)))
}

/// CSV cell for an optional metric; errors leave the cell empty.
pub(crate) fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| format!("{v}")).unwrap_or_default()
}
