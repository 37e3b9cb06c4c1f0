//! The explicit-mechanism sweep: for every (p, test inclusion rate,
//! replication) cell, generate the R/L/test triple, fit the selected models,
//! and score them on the shifted test set.

use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

use crate::datagen::{build_experiment_datasets, ExperimentSpec};
use crate::error::Result;
use crate::metrics::{evaluate_predictions, MetricsReport, ReplicationStats};
use crate::runner::config::{ModelKind, SimulationConfig};
use crate::runner::models::{fit_model, FitInputs};
use crate::runner::{config_hash_hex, fmt_opt, thread_pool};
use crate::seeding::{derive_seed, tag_f64};

const SIM_STREAM: u64 = 0x5349_4d55;

/// One row of `simulation_results.csv`: a model's scores in one cell, or the
/// error that stopped it. Failures never abort the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationRow {
    pub p: usize,
    pub inclusion_rate: f64,
    pub replication: usize,
    pub seed: u64,
    pub config_hash: String,
    pub model: String,
    pub status: String,
    pub n_test: Option<usize>,
    pub auc: Option<f64>,
    pub cumulative_bias: Option<f64>,
    pub rig: Option<f64>,
}

/// Per-cell aggregate written to the JSON summary.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationCellSummary {
    pub p: usize,
    pub inclusion_rate: f64,
    pub model: String,
    pub n_ok: usize,
    pub auc_mean: f64,
    pub auc_sd: f64,
    pub bias_mean: f64,
    pub bias_sd: f64,
    pub rig_mean: f64,
    pub rig_sd: f64,
    /// Mean paired AUC advantage over CNT-RF, when both models ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc_minus_cnt_mean: Option<f64>,
}

#[derive(Debug)]
pub struct SimulationOutput {
    pub rows: Vec<SimulationRow>,
    pub summaries: Vec<SimulationCellSummary>,
    pub results_path: PathBuf,
    pub summary_path: PathBuf,
}

fn row_from_report(
    base: &SimulationRow,
    model: ModelKind,
    outcome: Result<MetricsReport>,
) -> SimulationRow {
    let mut row = base.clone();
    row.model = model.to_string();
    match outcome {
        Ok(report) => {
            row.status = "ok".into();
            row.n_test = Some(report.n_test);
            row.auc = Some(report.auc);
            row.cumulative_bias = Some(report.cumulative_bias);
            row.rig = Some(report.rig);
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

fn run_cell(
    cfg: &SimulationConfig,
    config_hash: &str,
    p: usize,
    rate: f64,
    replication: usize,
) -> Vec<SimulationRow> {
    let cell_seed =
        derive_seed(cfg.seed, &[SIM_STREAM, p as u64, tag_f64(rate), replication as u64]);
    let base = SimulationRow {
        p,
        inclusion_rate: rate,
        replication,
        seed: cell_seed,
        config_hash: config_hash.to_string(),
        model: String::new(),
        status: String::new(),
        n_test: None,
        auc: None,
        cumulative_bias: None,
        rig: None,
    };

    let spec = ExperimentSpec {
        p_total: p,
        l_inclusion_rate: cfg.l_inclusion_rate,
        test_inclusion_rate: rate,
        n_r: cfg.n_r,
        n_l: cfg.n_l,
        n_t: cfg.n_t,
        seed: cell_seed,
    };
    let data = match build_experiment_datasets(&spec) {
        Ok(data) => data,
        Err(e) => {
            // Generation failed: report the same error for every model.
            let status = format!("error: {e}");
            return cfg
                .models
                .iter()
                .map(|&model| {
                    let mut row = base.clone();
                    row.model = model.to_string();
                    row.status = status.clone();
                    row
                })
                .collect();
        }
    };
    let inputs = FitInputs {
        r_data: Some(&data.r_data),
        l_data: Some(&data.l_data),
        test_features: Some(data.test_data.feature_view()),
    };

    cfg.models
        .iter()
        .map(|&model| {
            let outcome = fit_model(
                model,
                &inputs,
                &cfg.hyperparams,
                &cfg.logistic,
                &cfg.ipw,
                cell_seed,
            )
            .and_then(|fitted| fitted.predict_dataset(&data.test_data))
            .and_then(|preds| {
                evaluate_predictions(&model.to_string(), &preds, data.test_data.labels())
            });
            row_from_report(&base, model, outcome)
        })
        .collect()
}

fn summarize(cfg: &SimulationConfig, rows: &[SimulationRow]) -> Vec<SimulationCellSummary> {
    let mut summaries = Vec::new();
    for &p in &cfg.p_values {
        for &rate in &cfg.inclusion_rates {
            let cell: Vec<&SimulationRow> = rows
                .iter()
                .filter(|r| r.p == p && r.inclusion_rate == rate)
                .collect();
            for &model in &cfg.models {
                let name = model.to_string();
                let ok: Vec<&&SimulationRow> =
                    cell.iter().filter(|r| r.model == name && r.status == "ok").collect();
                let stat = |f: fn(&SimulationRow) -> Option<f64>| {
                    ReplicationStats::from_values(
                        &ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>(),
                    )
                };
                let auc = stat(|r| r.auc);
                let bias = stat(|r| r.cumulative_bias);
                let rig = stat(|r| r.rig);

                let cnt_name = ModelKind::CntRf.to_string();
                let auc_minus_cnt_mean = if name != cnt_name
                    && cfg.models.contains(&ModelKind::CntRf)
                {
                    let deltas: Vec<f64> = ok
                        .iter()
                        .filter_map(|r| {
                            let cnt = cell.iter().find(|c| {
                                c.model == cnt_name
                                    && c.replication == r.replication
                                    && c.status == "ok"
                            })?;
                            Some(r.auc? - cnt.auc?)
                        })
                        .collect();
                    (!deltas.is_empty())
                        .then(|| ReplicationStats::from_values(&deltas).mean)
                } else {
                    None
                };

                summaries.push(SimulationCellSummary {
                    p,
                    inclusion_rate: rate,
                    model: name,
                    n_ok: ok.len(),
                    auc_mean: auc.mean,
                    auc_sd: auc.sd,
                    bias_mean: bias.mean,
                    bias_sd: bias.sd,
                    rig_mean: rig.mean,
                    rig_sd: rig.sd,
                    auc_minus_cnt_mean,
                });
            }
        }
    }
    summaries
}

pub(crate) fn write_simulation_csv(rows: &[SimulationRow], path: &std::path::Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "experiment",
        "p",
        "inclusion_rate",
        "replication",
        "seed",
        "config_hash",
        "model",
        "status",
        "n_test",
        "auc",
        "cumulative_bias",
        "rig",
    ])?;
    for row in rows {
        writer.write_record([
            "simulation".to_string(),
            row.p.to_string(),
            format!("{}", row.inclusion_rate),
            row.replication.to_string(),
            row.seed.to_string(),
            row.config_hash.clone(),
            row.model.clone(),
            row.status.clone(),
            row.n_test.map(|n| n.to_string()).unwrap_or_default(),
            fmt_opt(row.auc),
            fmt_opt(row.cumulative_bias),
            fmt_opt(row.rig),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Runs the sweep and writes `simulation_results.csv` plus
/// `simulation_summary.json` into the output directory.
pub fn run_simulation(cfg: &SimulationConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let config_hash = config_hash_hex(cfg)?;

    let mut cells = Vec::new();
    for &p in &cfg.p_values {
        for &rate in &cfg.inclusion_rates {
            for replication in 0..cfg.replications {
                cells.push((p, rate, replication));
            }
        }
    }

    let pool = thread_pool(cfg.workers)?;
    let rows: Vec<SimulationRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, rate, replication)| run_cell(cfg, &config_hash, p, rate, replication))
            .flatten_iter()
            .collect()
    });

    let results_path = cfg.out_dir.join("simulation_results.csv");
    write_simulation_csv(&rows, &results_path)?;

    let summaries = summarize(cfg, &rows);
    let summary_path = cfg.out_dir.join("simulation_summary.json");
    let file = std::fs::File::create(&summary_path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &summaries)?;

    Ok(SimulationOutput { rows, summaries, results_path, summary_path })
}
