//! Scratch diagnostics for the auction benchmark; not part of the library.

use ctrf::auction::{
    fit_relevance_oracle, impressions_to_dataset, simulate_ranked_pages,
    simulate_random_pages, AuctionConfig, OracleConfig,
};
use ctrf::dataset::Source;
use ctrf::metrics::{auc, importance_rank};
use ctrf::trees::{feature_importance, fit_forest, ForestHyperparams};
use ctrf::Result;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let class_sep: f64 = args.next().map_or(2.0, |a| a.parse().unwrap());
    let reserve: f64 = args.next().map_or(0.5, |a| a.parse().unwrap());

    let oracle = fit_relevance_oracle(&OracleConfig {
        class_sep,
        seed: 7,
        ..Default::default()
    })?;

    let l_cfg = AuctionConfig {
        relevance_reserve: reserve,
        n_auctions: 5000,
        seed: 11,
        ..Default::default()
    };
    let l_imps = simulate_ranked_pages(&oracle, &l_cfg)?;

    // Click rate and mean relevance by position.
    let mut by_pos = vec![(0usize, 0usize, 0.0); l_cfg.max_slots];
    for imp in &l_imps {
        let slot = &mut by_pos[imp.position - 1];
        slot.0 += 1;
        slot.1 += imp.clicked as usize;
        slot.2 += imp.relevance;
    }
    println!("class_sep={class_sep} reserve={reserve} n_impressions={}", l_imps.len());
    for (i, (n, clicks, rel)) in by_pos.iter().enumerate() {
        println!(
            "  position {}: n={n} click_rate={:.4} mean_relevance={:.4}",
            i + 1,
            *clicks as f64 / *n as f64,
            rel / *n as f64
        );
    }

    // Relevance quantiles among shown ads.
    let mut rels: Vec<f64> = l_imps.iter().map(|i| i.relevance).collect();
    rels.sort_by(f64::total_cmp);
    let q = |f: f64| rels[((rels.len() - 1) as f64 * f) as usize];
    println!(
        "  shown relevance quantiles: 5%={:.3} 25%={:.3} 50%={:.3} 75%={:.3} 95%={:.3}",
        q(0.05), q(0.25), q(0.5), q(0.75), q(0.95)
    );

    // Oracle-score ceiling: AUC of true relevance against clicks.
    let labels: Vec<u8> = l_imps.iter().map(|i| i.clicked).collect();
    let rel_scores: Vec<f64> = l_imps.iter().map(|i| i.relevance).collect();
    let neg_pos: Vec<f64> = l_imps.iter().map(|i| -(i.position as f64)).collect();
    println!("  AUC(true relevance vs clicked) = {:.4}", auc(&rel_scores, &labels)?);
    println!("  AUC(-position vs clicked)      = {:.4}", auc(&neg_pos, &labels)?);

    // In-distribution CNT-RF: train on L, test on a fresh draw at the same
    // reserve; report position importance.
    let l_data = impressions_to_dataset(&l_imps, &oracle, Source::L)?;
    let test_cfg = AuctionConfig { seed: 12, n_auctions: 2000, ..l_cfg };
    let t_imps = simulate_ranked_pages(&oracle, &test_cfg)?;
    let t_data = impressions_to_dataset(&t_imps, &oracle, Source::Test)?;
    let hp = ForestHyperparams { seed: 5, ..Default::default() };
    let cnt = fit_forest(&l_data, &hp)?;
    let cnt_auc = auc(&cnt.predict_dataset(&t_data)?, t_data.labels())?;
    let imp = feature_importance(&cnt);
    let pos_idx = l_data.n_cols() - 1;
    println!(
        "  CNT-RF in-distribution AUC = {cnt_auc:.4}, position importance = {:.4} (rank {})",
        imp[pos_idx],
        importance_rank(&imp, pos_idx)
    );

    // R-data sanity: click rate by position should be flat.
    let r_cfg = AuctionConfig { n_auctions: 2000, seed: 13, ..l_cfg };
    let r_imps = simulate_random_pages(&oracle, &r_cfg)?;
    let mut r_by_pos = vec![(0usize, 0usize); l_cfg.max_slots];
    for imp in &r_imps {
        r_by_pos[imp.position - 1].0 += 1;
        r_by_pos[imp.position - 1].1 += imp.clicked as usize;
    }
    let rates: Vec<String> = r_by_pos
        .iter()
        .map(|(n, c)| format!("{:.3}", *c as f64 / *n as f64))
        .collect();
    println!("  R-data click rate by position: [{}]", rates.join(", "));
    Ok(())
}
