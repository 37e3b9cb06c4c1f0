//! Scratch diagnostics for the simulation benchmark; not part of the library.

use ctrf::ctrf::{calibrate_leaves, fit_ctrf};
use ctrf::datagen::{build_experiment_datasets, ExperimentSpec};
use ctrf::metrics::auc;
use ctrf::trees::{fit_forest, leaf_assignments, Forest, ForestHyperparams};
use ctrf::Result;

fn tree_stats(forest: &Forest) -> (f64, f64) {
    let n = forest.trees().len() as f64;
    let nodes: usize = forest.trees().iter().map(|t| t.n_nodes()).sum();
    let leaves: usize = forest.trees().iter().map(|t| t.leaf_ids().len()).sum();
    (nodes as f64 / n, leaves as f64 / n)
}

fn calibrated_auc(
    forest: &Forest,
    calib_data: &ctrf::dataset::Dataset,
    test: &ctrf::dataset::Dataset,
) -> Result<f64> {
    let cal = calibrate_leaves(forest, calib_data)?;
    let mut sums = vec![0.0; test.n_rows()];
    for (tree, leaves) in forest.trees().iter().zip(&cal) {
        let ids = leaf_assignments(tree, test)?;
        for (i, id) in ids.iter().enumerate() {
            sums[i] += leaves[id].value;
        }
    }
    let preds: Vec<f64> =
        sums.iter().map(|s| s / forest.trees().len() as f64).collect();
    auc(&preds, test.labels())
}

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let p_total: usize = args.next().map_or(20, |a| a.parse().unwrap());
    let rate: f64 = args.next().map_or(0.1, |a| a.parse().unwrap());
    let feature_ratio: f64 = args.next().map_or(0.3, |a| a.parse().unwrap());
    let max_nodes: usize = args.next().map_or(100, |a| a.parse().unwrap());
    let reps: u64 = args.next().map_or(10, |a| a.parse().unwrap());

    let mut acc = vec![0.0; 6];
    let mut node_acc = 0.0;
    let mut leaf_acc = 0.0;
    for seed in 0..reps {
        let spec = ExperimentSpec {
            p_total,
            test_inclusion_rate: rate,
            seed: 1000 + seed,
            ..Default::default()
        };
        let data = build_experiment_datasets(&spec)?;
        let hp = ForestHyperparams {
            feature_ratio,
            max_nodes,
            seed: 77 + seed,
            ..Default::default()
        };

        // RND-RF: structure and values both from R.
        let rnd = fit_forest(&data.r_data, &hp)?;
        let (nodes, leaves) = tree_stats(&rnd);
        node_acc += nodes;
        leaf_acc += leaves;
        let rnd_auc = auc(&rnd.predict_dataset(&data.test_data)?, data.test_data.labels())?;

        // Same structure, recalibrated on full R only (no L).
        let r_cal_auc = calibrated_auc(&rnd, &data.r_data, &data.test_data)?;

        // Same structure, recalibrated on L only.
        let l_cal_auc = calibrated_auc(&rnd, &data.l_data, &data.test_data)?;

        // CTRF proper (own structure draw, pooled calibration).
        let ctrf_model = fit_ctrf(&data.r_data, &data.l_data, &hp)?;
        let ctrf_auc =
            auc(&ctrf_model.predict_dataset(&data.test_data)?, data.test_data.labels())?;

        // CNT-RF.
        let cnt = fit_forest(&data.l_data, &hp)?;
        let cnt_auc = auc(&cnt.predict_dataset(&data.test_data)?, data.test_data.labels())?;

        // Pooled calibration on the RND structure (isolates calibration source).
        let pooled = ctrf::dataset::Dataset::concat(
            &data.r_data,
            &data.l_data,
            ctrf::dataset::Source::L,
        )?;
        let pooled_cal_auc = calibrated_auc(&rnd, &pooled, &data.test_data)?;

        for (a, v) in acc.iter_mut().zip([
            rnd_auc,
            r_cal_auc,
            l_cal_auc,
            pooled_cal_auc,
            ctrf_auc,
            cnt_auc,
        ]) {
            *a += v;
        }
    }
    let n = reps as f64;
    println!(
        "p={p_total} rate={rate} fr={feature_ratio} nodes={max_nodes} reps={reps}"
    );
    println!("avg nodes/tree = {:.1}, avg leaves/tree = {:.1}", node_acc / n, leaf_acc / n);
    for (name, total) in ["rnd(structure values)", "same structure, R-calibrated", "same structure, L-calibrated", "same structure, pooled-calibrated", "ctrf (own structure)", "cnt"]
        .iter()
        .zip(&acc)
    {
        println!("{name:36} auc = {:.4}", total / n);
    }
    Ok(())
}
