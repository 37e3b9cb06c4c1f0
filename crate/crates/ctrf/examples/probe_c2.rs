//! Scratch diagnostics for the auction acceptance clauses; not a shipped tool.

use ctrf::auction::OracleConfig;
use ctrf::runner::auction_run::{run_auction_experiment, AuctionRow};
use ctrf::runner::config::{AuctionRunConfig, ModelKind};
use ctrf::Result;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let class_sep: f64 = args.next().map_or(2.0, |a| a.parse().unwrap());
    let replications: usize = args.next().map_or(8, |a| a.parse().unwrap());
    let n_informative: usize = args.next().map_or(5, |a| a.parse().unwrap());
    let n_noise: usize = args.next().map_or(5, |a| a.parse().unwrap());
    let oracle_nodes: usize = args.next().map_or(4095, |a| a.parse().unwrap());
    let n_train: usize = args.next().map_or(2000, |a| a.parse().unwrap());
    let n_trees: usize = args.next().map_or(50, |a| a.parse().unwrap());
    let score_noise_sd: f64 = args.next().map_or(0.05, |a| a.parse().unwrap());

    let out = std::env::temp_dir().join(format!("probe-c2-{}", std::process::id()));
    let cfg = AuctionRunConfig {
        reserves: vec![0.5, 0.9],
        replications,
        n_l_auctions: 5000,
        n_r_pages: 2000,
        n_test_auctions: 2000,
        oracle: OracleConfig {
            class_sep,
            n_informative,
            n_noise,
            max_nodes: oracle_nodes,
            n_train,
            n_trees,
            ..Default::default()
        },
        models: vec![ModelKind::Ctrf, ModelKind::CntRf, ModelKind::RndRf],
        score_noise_sd,
        seed: 0,
        workers: 1,
        out_dir: out,
        ..Default::default()
    };
    let started = std::time::Instant::now();
    let output = run_auction_experiment(&cfg)?;
    println!(
        "class_sep={class_sep} inf={n_informative} noise={n_noise} oracle_nodes={oracle_nodes} n_train={n_train} n_trees={n_trees} noise_sd={score_noise_sd} reps={replications} ({:.1}s)",
        started.elapsed().as_secs_f64()
    );

    for reserve in [0.5, 0.9] {
        for model in ["CTRF", "CNT-RF", "RND-RF"] {
            let rows: Vec<_> = output
                .rows
                .iter()
                .filter(|r| r.reserve == reserve && r.model == model && r.status == "ok")
                .collect();
            let n = rows.len();
            let mean = |f: &dyn Fn(&&AuctionRow) -> Option<f64>| {
                let vals: Vec<f64> = rows.iter().filter_map(f).collect();
                vals.iter().sum::<f64>() / vals.len().max(1) as f64
            };
            let auc = mean(&|r| r.auc);
            let bias = mean(&|r| r.cumulative_bias);
            let delta = mean(&|r| r.auc_minus_cnt);
            let pos_top5 = rows
                .iter()
                .filter(|r| r.position_in_top_k == Some(true))
                .count() as f64
                / n.max(1) as f64;
            let pos_imp = mean(&|r| r.position_importance);
            println!(
                "  r={reserve} {model:<8} n={n:<3} auc={auc:.4} bias={bias:.3} d_cnt={delta:+.4} pos_imp={pos_imp:.3} pos_top5={pos_top5:.2}"
            );
        }
    }

    // Clause checks.
    let deltas_05: Vec<f64> = output
        .rows
        .iter()
        .filter(|r| r.reserve == 0.5 && r.model == "CTRF" && r.status == "ok")
        .filter_map(|r| r.auc_minus_cnt)
        .collect();
    let max_abs_05 = deltas_05.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let deltas_09: Vec<f64> = output
        .rows
        .iter()
        .filter(|r| r.reserve == 0.9 && r.model == "CTRF" && r.status == "ok")
        .filter_map(|r| r.auc_minus_cnt)
        .collect();
    let pos_rate = deltas_09.iter().filter(|d| **d > 0.0).count() as f64
        / deltas_09.len().max(1) as f64;
    let mean_05 = deltas_05.iter().sum::<f64>() / deltas_05.len().max(1) as f64;
    println!(
        "  (a) mean d@0.5 = {mean_05:+.4}, max |d|@0.5 = {max_abs_05:.4} (need < 0.02 on means)"
    );
    println!(
        "  (b) d@0.9 > 0 in {:.0}% of {} seeds (need >= 75%)",
        pos_rate * 100.0,
        deltas_09.len()
    );
    for model in ["CTRF", "CNT-RF"] {
        let ranks: Vec<usize> = output
            .rows
            .iter()
            .filter(|r| r.reserve == 0.5 && r.model == model)
            .filter_map(|r| r.position_rank)
            .collect();
        println!("  (c) {model} position ranks at L: {ranks:?} (0 = most important)");
    }
    Ok(())
}
