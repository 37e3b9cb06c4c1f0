//! The auction sweep: one simulated world per replication (oracle, R-pages,
//! L-auctions at the production reserve), models fit on the click data, and
//! evaluation on test sets generated at each sweep reserve. Besides the usual
//! metrics, each forest model reports how prominently it ranks the spurious
//! "position" feature.

use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

use crate::auction::{build_auction_datasets, fit_relevance_oracle, OracleConfig};
use crate::error::Result;
use crate::metrics::{evaluate_predictions, importance_rank, top_k_inclusion, ReplicationStats};
use crate::runner::config::{AuctionRunConfig, ModelKind};
use crate::runner::models::{fit_model, FitInputs, FittedModel};
use crate::runner::{config_hash_hex, fmt_opt, thread_pool};
use crate::seeding::derive_seed;

const AUCTION_STREAM: u64 = 0x4155_4354;

/// One row of `auction_results.csv`: one model at one reserve in one
/// replication.
#[derive(Debug, Clone, Serialize)]
pub struct AuctionRow {
    pub reserve: f64,
    pub replication: usize,
    pub seed: u64,
    pub config_hash: String,
    pub model: String,
    pub status: String,
    pub n_test: Option<usize>,
    pub auc: Option<f64>,
    pub cumulative_bias: Option<f64>,
    pub rig: Option<f64>,
    /// Paired difference against CNT-RF in the same replication and reserve.
    pub auc_minus_cnt: Option<f64>,
    /// Importance diagnostics for the "position" feature (forests only).
    pub position_importance: Option<f64>,
    pub position_rank: Option<usize>,
    pub position_in_top_k: Option<bool>,
}

/// Per (reserve, model) aggregate: one importance row per model per reserve.
#[derive(Debug, Clone, Serialize)]
pub struct AuctionCellSummary {
    pub reserve: f64,
    pub model: String,
    pub n_ok: usize,
    pub auc_mean: f64,
    pub auc_sd: f64,
    pub bias_mean: f64,
    pub bias_sd: f64,
    pub rig_mean: f64,
    pub rig_sd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc_minus_cnt_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position_importance_mean: Option<f64>,
    /// Share of replications ranking "position" inside the top k.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position_top_k_rate: Option<f64>,
}

#[derive(Debug)]
pub struct AuctionOutput {
    pub rows: Vec<AuctionRow>,
    pub summaries: Vec<AuctionCellSummary>,
    pub results_path: PathBuf,
    pub summary_path: PathBuf,
}

struct ModelEval {
    model: ModelKind,
    fitted: Result<FittedModel>,
}

fn run_replication(
    cfg: &AuctionRunConfig,
    config_hash: &str,
    replication: usize,
) -> Vec<AuctionRow> {
    let rep_seed = derive_seed(cfg.seed, &[AUCTION_STREAM, replication as u64]);
    let base = AuctionRow {
        reserve: f64::NAN,
        replication,
        seed: rep_seed,
        config_hash: config_hash.to_string(),
        model: String::new(),
        status: String::new(),
        n_test: None,
        auc: None,
        cumulative_bias: None,
        rig: None,
        auc_minus_cnt: None,
        position_importance: None,
        position_rank: None,
        position_in_top_k: None,
    };
    let fail_all = |message: String| -> Vec<AuctionRow> {
        cfg.reserves
            .iter()
            .flat_map(|&reserve| {
                cfg.models.iter().map({
                    let message = message.clone();
                    let base = base.clone();
                    move |&model| {
                        let mut row = base.clone();
                        row.reserve = reserve;
                        row.model = model.to_string();
                        row.status = message.clone();
                        row
                    }
                })
            })
            .collect()
    };

    // One world per replication: oracle, R-pages, L-auctions, and a test set
    // per reserve, all from seeds derived off the replication seed.
    let oracle_cfg =
        OracleConfig { seed: derive_seed(rep_seed, &[1]), ..cfg.oracle };
    let oracle = match fit_relevance_oracle(&oracle_cfg) {
        Ok(oracle) => oracle,
        Err(e) => return fail_all(format!("error: {e}")),
    };
    let r_cfg = cfg.auction_config(0.0, cfg.n_r_pages, derive_seed(rep_seed, &[2]));
    let l_cfg =
        cfg.auction_config(cfg.l_reserve, cfg.n_l_auctions, derive_seed(rep_seed, &[3]));
    let test_cfgs: Vec<_> = cfg
        .reserves
        .iter()
        .enumerate()
        .map(|(i, &reserve)| {
            cfg.auction_config(reserve, cfg.n_test_auctions, derive_seed(rep_seed, &[4, i as u64]))
        })
        .collect();
    let data = match build_auction_datasets(&oracle, &r_cfg, &l_cfg, &test_cfgs) {
        Ok(data) => data,
        Err(e) => return fail_all(format!("error: {e}")),
    };

    // Fit each model once per replication; position diagnostics depend only
    // on the training fit, evaluation happens per reserve below. LR-IPW's
    // density ratio targets the first sweep reserve's test features.
    let position_index = data.l_data.n_cols() - 1;
    let inputs = FitInputs {
        r_data: Some(&data.r_data),
        l_data: Some(&data.l_data),
        test_features: data.test_data.first().map(|d| d.feature_view()),
    };
    let evals: Vec<ModelEval> = cfg
        .models
        .iter()
        .map(|&model| ModelEval {
            model,
            fitted: fit_model(
                model,
                &inputs,
                &cfg.hyperparams,
                &cfg.logistic,
                &cfg.ipw,
                rep_seed,
            ),
        })
        .collect();

    let mut rows = Vec::with_capacity(cfg.reserves.len() * cfg.models.len());
    for (reserve_index, &reserve) in cfg.reserves.iter().enumerate() {
        let test = &data.test_data[reserve_index];
        let mut cell_rows = Vec::with_capacity(cfg.models.len());
        for eval in &evals {
            let mut row = base.clone();
            row.reserve = reserve;
            row.model = eval.model.to_string();
            let outcome = eval
                .fitted
                .as_ref()
                .map_err(|e| crate::error::Error::InvalidInput(format!("{e}")))
                .and_then(|fitted| {
                    let preds = fitted.predict_dataset(test)?;
                    evaluate_predictions(&eval.model.to_string(), &preds, test.labels())
                });
            match outcome {
                Ok(report) => {
                    row.status = "ok".into();
                    row.n_test = Some(report.n_test);
                    row.auc = Some(report.auc);
                    row.cumulative_bias = Some(report.cumulative_bias);
                    row.rig = Some(report.rig);
                    if let Ok(fitted) = eval.fitted.as_ref() {
                        if let Some(importances) = fitted.importance() {
                            row.position_importance = Some(importances[position_index]);
                            row.position_rank =
                                Some(importance_rank(&importances, position_index));
                            row.position_in_top_k = top_k_inclusion(
                                std::slice::from_ref(&importances),
                                position_index,
                                cfg.top_k,
                            )
                            .ok()
                            .map(|hit| hit > 0.5);
                        }
                    }
                }
                Err(e) => row.status = format!("error: {e}"),
            }
            cell_rows.push(row);
        }
        // Paired CNT-RF deltas within the (replication, reserve) cell.
        let cnt_auc = cell_rows
            .iter()
            .find(|r| r.model == ModelKind::CntRf.to_string() && r.status == "ok")
            .and_then(|r| r.auc);
        if let Some(cnt_auc) = cnt_auc {
            for row in &mut cell_rows {
                if row.model != ModelKind::CntRf.to_string() {
                    row.auc_minus_cnt = row.auc.map(|a| a - cnt_auc);
                }
            }
        }
        rows.extend(cell_rows);
    }
    rows
}

fn summarize(cfg: &AuctionRunConfig, rows: &[AuctionRow]) -> Vec<AuctionCellSummary> {
    let mut summaries = Vec::new();
    for &reserve in &cfg.reserves {
        for &model in &cfg.models {
            let name = model.to_string();
            let ok: Vec<&AuctionRow> = rows
                .iter()
                .filter(|r| r.reserve == reserve && r.model == name && r.status == "ok")
                .collect();
            let stat = |f: fn(&AuctionRow) -> Option<f64>| {
                ReplicationStats::from_values(
                    &ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>(),
                )
            };
            let auc = stat(|r| r.auc);
            let bias = stat(|r| r.cumulative_bias);
            let rig = stat(|r| r.rig);
            let deltas: Vec<f64> = ok.iter().filter_map(|r| r.auc_minus_cnt).collect();
            let importances: Vec<f64> =
                ok.iter().filter_map(|r| r.position_importance).collect();
            let top_k_hits: Vec<&AuctionRow> = ok
                .iter()
                .filter(|r| r.position_in_top_k.is_some())
                .copied()
                .collect();
            summaries.push(AuctionCellSummary {
                reserve,
                model: name,
                n_ok: ok.len(),
                auc_mean: auc.mean,
                auc_sd: auc.sd,
                bias_mean: bias.mean,
                bias_sd: bias.sd,
                rig_mean: rig.mean,
                rig_sd: rig.sd,
                auc_minus_cnt_mean: (!deltas.is_empty())
                    .then(|| ReplicationStats::from_values(&deltas).mean),
                position_importance_mean: (!importances.is_empty())
                    .then(|| ReplicationStats::from_values(&importances).mean),
                position_top_k_rate: (!top_k_hits.is_empty()).then(|| {
                    top_k_hits
                        .iter()
                        .filter(|r| r.position_in_top_k == Some(true))
                        .count() as f64
                        / top_k_hits.len() as f64
                }),
            });
        }
    }
    summaries
}

pub(crate) fn write_auction_csv(rows: &[AuctionRow], path: &std::path::Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "experiment",
        "reserve",
        "replication",
        "seed",
        "config_hash",
        "model",
        "status",
        "n_test",
        "auc",
        "cumulative_bias",
        "rig",
        "auc_minus_cnt",
        "position_importance",
        "position_rank",
        "position_in_top_k",
    ])?;
    for row in rows {
        writer.write_record([
            "auction".to_string(),
            format!("{}", row.reserve),
            row.replication.to_string(),
            row.seed.to_string(),
            row.config_hash.clone(),
            row.model.clone(),
            row.status.clone(),
            row.n_test.map(|n| n.to_string()).unwrap_or_default(),
            fmt_opt(row.auc),
            fmt_opt(row.cumulative_bias),
            fmt_opt(row.rig),
            fmt_opt(row.auc_minus_cnt),
            fmt_opt(row.position_importance),
            row.position_rank.map(|r| r.to_string()).unwrap_or_default(),
            row.position_in_top_k.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Runs the sweep and writes `auction_results.csv` plus
/// `auction_summary.json` into the output directory.
pub fn run_auction_experiment(cfg: &AuctionRunConfig) -> Result<AuctionOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let config_hash = config_hash_hex(cfg)?;

    let pool = thread_pool(cfg.workers)?;
    let rows: Vec<AuctionRow> = pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|replication| run_replication(cfg, &config_hash, replication))
            .flatten_iter()
            .collect()
    });

    let results_path = cfg.out_dir.join("auction_results.csv");
    write_auction_csv(&rows, &results_path)?;

    let summaries = summarize(cfg, &rows);
    let summary_path = cfg.out_dir.join("auction_summary.json");
    let file = std::fs::File::create(&summary_path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &summaries)?;

    Ok(AuctionOutput { rows, summaries, results_path, summary_path })
}
