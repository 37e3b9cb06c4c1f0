//! `ctrf`: batch experiment runner for the CTRF library.
//!
//! Five subcommands cover the workflow end to end: `simulate` (the
//! explicit-mechanism sweep over feature counts and test inclusion rates),
//! `auction` (the simulated ad-auction sweep over test reserves), `train`
//! (one model on user-supplied CSVs), `shift-score` (distribution-shift
//! diagnostics between two feature tables), and `report` (post-hoc
//! aggregation of a results CSV).
//!
//! Every experiment takes an optional JSON config file (`--config`); flags
//! override file values, and unset fields fall back to the published sweep
//! defaults. Outputs are a pure function of the effective config including
//! the seed — the worker count never changes a byte of any result file.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use ctrf::runner::auction_run::run_auction_experiment;
use ctrf::runner::config::{
    load_config_file, parse_model_list, AuctionRunConfig, ExperimentKind, ModelKind,
    ShiftScoreConfig, SimulationConfig, TrainPredictConfig,
};
use ctrf::runner::report::{run_report, ReportConfig};
use ctrf::runner::shift::shift_score;
use ctrf::runner::simulate::run_simulation;
use ctrf::runner::train::train_predict;

#[derive(Parser)]
#[command(
    name = "ctrf",
    version,
    about = "Causal Transfer Random Forest experiment runner",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the synthetic covariate-shift sweep over p and inclusion rates
    Simulate(SimulateArgs),
    /// Run the simulated ad-auction sweep over test reserves
    Auction(AuctionArgs),
    /// Train one model on CSV data and predict on a test CSV
    Train(TrainArgs),
    /// Score the distribution shift between two feature CSVs
    ShiftScore(ShiftArgs),
    /// Aggregate a results CSV into per-group mean/sd/count
    Report(ReportArgs),
}

// ── Flag parsing helpers ─────────────────────────────────────────────────

fn parse_usize_list(raw: &str, flag: &str) -> anyhow::Result<Vec<usize>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().with_context(|| format!("--{flag}: bad integer {s:?}")))
        .collect()
}

fn parse_f64_list(raw: &str, flag: &str) -> anyhow::Result<Vec<f64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("--{flag}: bad number {s:?}")))
        .collect()
}

fn parse_string_list(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_model(raw: &str) -> Result<ModelKind, String> {
    raw.parse::<ModelKind>().map_err(|e| e.to_string())
}

/// Loads the experiment config from `--config`, or starts from defaults.
fn base_config<T>(path: Option<&PathBuf>, kind: ExperimentKind) -> anyhow::Result<T>
where
    T: Default + for<'de> serde::Deserialize<'de>,
{
    match path {
        Some(p) => Ok(load_config_file(p, kind)?),
        None => Ok(T::default()),
    }
}

// ── simulate ─────────────────────────────────────────────────────────────

#[derive(Args)]
struct SimulateArgs {
    /// JSON config file; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated feature counts, e.g. 20,40,80
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated test inclusion rates in (0,1), e.g. 0.1,0.5,0.9
    #[arg(long)]
    inclusion_rates: Option<String>,
    #[arg(long)]
    replications: Option<usize>,
    /// Comma-separated models: ctrf,cnt-rf,rnd-rf,combine-rf,lr,lr-ipw
    #[arg(long)]
    models: Option<String>,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    n_l: Option<usize>,
    #[arg(long)]
    n_t: Option<usize>,
    /// Inclusion rate used when selecting the biased L-sample
    #[arg(long)]
    l_inclusion_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = number of cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for result files
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let mut cfg: SimulationConfig =
        base_config(args.config.as_ref(), ExperimentKind::Simulation)?;
    if let Some(raw) = &args.p {
        cfg.p_values = parse_usize_list(raw, "p")?;
    }
    if let Some(raw) = &args.inclusion_rates {
        cfg.inclusion_rates = parse_f64_list(raw, "inclusion-rates")?;
    }
    if let Some(raw) = &args.models {
        cfg.models = parse_model_list(raw)?;
    }
    if let Some(v) = args.replications {
        cfg.replications = v;
    }
    if let Some(v) = args.n_r {
        cfg.n_r = v;
    }
    if let Some(v) = args.n_l {
        cfg.n_l = v;
    }
    if let Some(v) = args.n_t {
        cfg.n_t = v;
    }
    if let Some(v) = args.l_inclusion_rate {
        cfg.l_inclusion_rate = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(v) = &args.out {
        cfg.out_dir = v.clone();
    }

    let output = run_simulation(&cfg)?;
    for s in &output.summaries {
        println!(
            "[simulate] p={} rate={:.2} model={} n={} auc={:.4} (sd {:.4}) bias={:.4} rig={:.4}",
            s.p, s.inclusion_rate, s.model, s.n_ok, s.auc_mean, s.auc_sd, s.bias_mean, s.rig_mean
        );
    }
    println!(
        "[simulate] wrote {} rows to {} and {}",
        output.rows.len(),
        output.results_path.display(),
        output.summary_path.display()
    );
    Ok(())
}

// ── auction ──────────────────────────────────────────────────────────────

#[derive(Args)]
struct AuctionArgs {
    /// JSON config file; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated test reserves in [0,1], e.g. 0.5,0.7,0.9
    #[arg(long)]
    reserves: Option<String>,
    #[arg(long)]
    replications: Option<usize>,
    /// Comma-separated models: ctrf,cnt-rf,rnd-rf,combine-rf,lr,lr-ipw
    #[arg(long)]
    models: Option<String>,
    /// Auctions in the biased L-sample
    #[arg(long)]
    n_l_auctions: Option<usize>,
    /// Uniformly ranked pages in the randomized R-sample
    #[arg(long)]
    n_r_pages: Option<usize>,
    /// Auctions generated per test reserve
    #[arg(long)]
    n_test_auctions: Option<usize>,
    /// Reserve used for the production (L) traffic
    #[arg(long)]
    l_reserve: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = number of cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for result files
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_auction(args: &AuctionArgs) -> anyhow::Result<()> {
    let mut cfg: AuctionRunConfig = base_config(args.config.as_ref(), ExperimentKind::Auction)?;
    if let Some(raw) = &args.reserves {
        cfg.reserves = parse_f64_list(raw, "reserves")?;
    }
    if let Some(raw) = &args.models {
        cfg.models = parse_model_list(raw)?;
    }
    if let Some(v) = args.replications {
        cfg.replications = v;
    }
    if let Some(v) = args.n_l_auctions {
        cfg.n_l_auctions = v;
    }
    if let Some(v) = args.n_r_pages {
        cfg.n_r_pages = v;
    }
    if let Some(v) = args.n_test_auctions {
        cfg.n_test_auctions = v;
    }
    if let Some(v) = args.l_reserve {
        cfg.l_reserve = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(v) = &args.out {
        cfg.out_dir = v.clone();
    }

    let output = run_auction_experiment(&cfg)?;
    for s in &output.summaries {
        let top_k = s
            .position_top_k_rate
            .map(|v| format!(" pos_top{}={:.2}", cfg.top_k, v))
            .unwrap_or_default();
        println!(
            "[auction] reserve={:.2} model={} n={} auc={:.4} (sd {:.4}) bias={:.4}{}",
            s.reserve, s.model, s.n_ok, s.auc_mean, s.auc_sd, s.bias_mean, top_k
        );
    }
    println!(
        "[auction] wrote {} rows to {} and {}",
        output.rows.len(),
        output.results_path.display(),
        output.summary_path.display()
    );
    Ok(())
}

// ── train ────────────────────────────────────────────────────────────────

#[derive(Args)]
struct TrainArgs {
    /// JSON config file; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Randomized-traffic training CSV (tagged R)
    #[arg(long, value_name = "CSV")]
    r_data: Option<PathBuf>,
    /// Production-traffic training CSV (tagged L)
    #[arg(long, value_name = "CSV")]
    l_data: Option<PathBuf>,
    /// Test CSV; labels optional (predictions only without them)
    #[arg(long, value_name = "CSV")]
    test: Option<PathBuf>,
    /// Model to fit: ctrf, cnt-rf, rnd-rf, combine-rf, lr, lr-ipw
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,
    /// Write the fitted model as a JSON document (forest family only)
    #[arg(long, value_name = "PATH")]
    save_model: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for predictions.csv and metrics.json
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_train(args: &TrainArgs) -> anyhow::Result<()> {
    let mut cfg: TrainPredictConfig =
        base_config(args.config.as_ref(), ExperimentKind::TrainPredict)?;
    if let Some(v) = &args.r_data {
        cfg.r_path = Some(v.clone());
    }
    if let Some(v) = &args.l_data {
        cfg.l_path = Some(v.clone());
    }
    if let Some(v) = &args.test {
        cfg.test_path = v.clone();
    }
    if let Some(v) = args.model {
        cfg.model = v;
    }
    if let Some(v) = &args.save_model {
        cfg.save_model = Some(v.clone());
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.out {
        cfg.out_dir = v.clone();
    }

    let output = train_predict(&cfg)?;
    println!(
        "[train] model={} predictions={} -> {}",
        cfg.model,
        output.predictions.len(),
        output.predictions_path.display()
    );
    match (&output.report, &output.metrics_path) {
        (Some(report), Some(path)) => println!(
            "[train] auc={:.4} cumulative_bias={:.4} rig={:.4} -> {}",
            report.auc,
            report.cumulative_bias,
            report.rig,
            path.display()
        ),
        _ => println!("[train] test file has no labels; skipped metrics"),
    }
    if let Some(path) = &cfg.save_model {
        println!("[train] saved model to {}", path.display());
    }
    Ok(())
}

// ── shift-score ──────────────────────────────────────────────────────────

#[derive(Args)]
struct ShiftArgs {
    /// JSON config file; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Baseline (factual) feature CSV
    #[arg(long, value_name = "CSV")]
    factual: Option<PathBuf>,
    /// Comparison (counterfactual) feature CSV; schema must match
    #[arg(long, value_name = "CSV")]
    counterfactual: Option<PathBuf>,
    /// Histogram bins per feature
    #[arg(long)]
    bins: Option<usize>,
    /// Output directory for shift_js.csv and shift_summary.json
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_shift_score(args: &ShiftArgs) -> anyhow::Result<()> {
    let mut cfg: ShiftScoreConfig =
        base_config(args.config.as_ref(), ExperimentKind::ShiftScore)?;
    if let Some(v) = &args.factual {
        cfg.factual_path = v.clone();
    }
    if let Some(v) = &args.counterfactual {
        cfg.counterfactual_path = v.clone();
    }
    if let Some(v) = args.bins {
        cfg.n_bins = v;
    }
    if let Some(v) = &args.out {
        cfg.out_dir = v.clone();
    }

    let output = shift_score(&cfg)?;
    println!(
        "DS = {:.6} over {} features ({} bins)",
        output.shift_score,
        output.per_feature.len(),
        output.n_bins
    );
    println!(
        "[shift-score] wrote {} and {}",
        output.js_path.display(),
        output.summary_path.display()
    );
    Ok(())
}

// ── report ───────────────────────────────────────────────────────────────

#[derive(Args)]
struct ReportArgs {
    /// Results CSV to aggregate (e.g. simulation_results.csv)
    #[arg(long, value_name = "CSV")]
    input: PathBuf,
    /// Comma-separated group columns; default auto-detects
    /// model/p/inclusion_rate/reserve/case
    #[arg(long)]
    group_by: Option<String>,
    /// Comma-separated metric columns; default summarizes every numeric
    /// non-bookkeeping column
    #[arg(long)]
    values: Option<String>,
    /// Output directory for summary.csv and summary.json
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_report(args: &ReportArgs) -> anyhow::Result<()> {
    let mut cfg = ReportConfig { input_path: args.input.clone(), ..Default::default() };
    if let Some(raw) = &args.group_by {
        cfg.group_by = parse_string_list(raw);
    }
    if let Some(raw) = &args.values {
        cfg.values = parse_string_list(raw);
    }
    if let Some(v) = &args.out {
        cfg.out_dir = v.clone();
    }

    let output = run_report(&cfg)?;
    println!(
        "[report] {} groups by [{}] over [{}] -> {}",
        output.groups.len(),
        output.group_columns.join(", "),
        output.value_columns.join(", "),
        output.csv_path.display()
    );
    Ok(())
}

// ── Entry point ──────────────────────────────────────────────────────────

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Auction(args) => cmd_auction(args),
        Command::Train(args) => cmd_train(args),
        Command::ShiftScore(args) => cmd_shift_score(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
