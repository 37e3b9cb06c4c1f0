//! Shift diagnostics on exported data: compare a factual and a
//! counterfactual feature table, report the per-feature JS divergences and
//! the aggregate distribution shift score.

use serde::Serialize;
use std::path::PathBuf;

use crate::dataset::read_csv_path;
use crate::error::Result;
use crate::metrics::{per_feature_js, shift_score_views};
use crate::runner::config::ShiftScoreConfig;
use crate::runner::config_hash_hex;

/// Result of one shift-score run; the score is also printed by the CLI.
#[derive(Debug, Serialize)]
pub struct ShiftScoreOutput {
    pub config_hash: String,
    pub n_bins: usize,
    /// Root mean square of the per-feature JS divergences.
    pub shift_score: f64,
    /// `(feature name, JS divergence)` in the factual file's column order.
    pub per_feature: Vec<(String, f64)>,
    #[serde(skip)]
    pub js_path: PathBuf,
    #[serde(skip)]
    pub summary_path: PathBuf,
}

/// Scores the shift between `cfg.factual_path` and `cfg.counterfactual_path`
/// and writes `shift_js.csv` (one row per feature) plus `shift_summary.json`
/// to `cfg.out_dir`. Label columns, if present, are ignored; only the
/// feature schemas must match.
pub fn shift_score(cfg: &ShiftScoreConfig) -> Result<ShiftScoreOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let config_hash = config_hash_hex(cfg)?;

    let factual = read_csv_path(&cfg.factual_path)?;
    let counterfactual = read_csv_path(&cfg.counterfactual_path)?;
    let per_feature = per_feature_js(
        factual.feature_view()?,
        counterfactual.feature_view()?,
        cfg.n_bins,
    )?;
    let score = shift_score_views(
        factual.feature_view()?,
        counterfactual.feature_view()?,
        cfg.n_bins,
    )?;

    let js_path = cfg.out_dir.join("shift_js.csv");
    let mut writer = csv::Writer::from_path(&js_path)?;
    writer.write_record(["feature", "js_divergence"])?;
    for (name, js) in &per_feature {
        writer.write_record([name.clone(), format!("{js}")])?;
    }
    writer.flush()?;

    let output = ShiftScoreOutput {
        config_hash,
        n_bins: cfg.n_bins,
        shift_score: score,
        per_feature,
        js_path,
        summary_path: cfg.out_dir.join("shift_summary.json"),
    };
    let file = std::fs::File::create(&output.summary_path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &output)?;
    Ok(output)
}
