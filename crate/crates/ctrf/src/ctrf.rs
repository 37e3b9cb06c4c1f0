//! Causal Transfer Random Forest: the two-stage procedure.
//!
//! Stage one fits an ordinary forest on R-data only, so tree *structure* can
//! only encode relationships that survive randomization. Stage two routes the
//! pooled R+L rows through the fixed structure and replaces every leaf value
//! with the mean label of the pooled rows that reach it, harvesting the
//! volume of logged data without inheriting its spurious split choices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::dataset::{check_same_schema, Dataset, FeatureView, Source};
use crate::error::{Error, Result};
use crate::trees::{fit_forest, leaf_assignments, Forest, ForestHyperparams};

/// Calibrated value of one leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafCalibration {
    /// Mean pooled label routed to the leaf; the structure-stage value when
    /// `pooled_count` is 0.
    pub value: f64,
    /// Number of pooled rows that reached the leaf.
    pub pooled_count: usize,
}

/// Per-tree calibration: leaf node id → calibrated value. Ordered maps keep
/// serialization deterministic.
pub type Calibration = Vec<BTreeMap<usize, LeafCalibration>>;

/// Relative weights for R and L rows during calibration; the default 1.0/1.0
/// is the paper's unweighted pooling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceWeights {
    pub r: f64,
    pub l: f64,
}

impl Default for SourceWeights {
    fn default() -> Self {
        SourceWeights { r: 1.0, l: 1.0 }
    }
}

impl SourceWeights {
    fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0 && self.l.is_finite() && self.l > 0.0) {
            return Err(Error::InvalidHyperparameter(
                "source weights must be finite and > 0".into(),
            ));
        }
        Ok(())
    }
}

/// A forest whose structure came from R-data and whose leaf values came from
/// pooled R+L data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtrfModel {
    forest: Forest,
    calibration: Calibration,
}

impl CtrfModel {
    pub(crate) fn from_parts(forest: Forest, calibration: Calibration) -> Self {
        CtrfModel { forest, calibration }
    }

    /// The structure-stage forest, including its original leaf values.
    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn calibration(&self) -> &Calibration {
        &self.calibration
    }

    /// Routes exactly as the forest does, but reads calibrated leaf values.
    pub fn predict(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.forest.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.forest.n_features(),
                got: point.len(),
            });
        }
        let mut sum = 0.0;
        for (tree, leaves) in self.forest.trees().iter().zip(&self.calibration) {
            let leaf = tree.route(point);
            sum += leaves
                .get(&leaf)
                .expect("every leaf has a calibration entry")
                .value;
        }
        Ok(sum / self.forest.trees().len() as f64)
    }

    pub fn predict_view(&self, view: FeatureView<'_>) -> Result<Vec<f64>> {
        check_same_schema(self.forest.feature_names(), view.feature_names())?;
        (0..view.n_rows()).map(|i| self.predict(view.row(i))).collect()
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.predict_view(data.feature_view())
    }
}

/// Computes the calibration map for `forest` from pooled data: each leaf's
/// value becomes the mean label of the pooled rows routed to it; leaves no
/// pooled row reaches keep their structure-stage value with `pooled_count` 0.
pub fn calibrate_leaves(forest: &Forest, pooled: &Dataset) -> Result<Calibration> {
    if pooled.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_same_schema(forest.feature_names(), pooled.feature_names())?;
    calibrate_weighted(forest, &[(pooled, 1.0)])
}

/// Weighted calibration over several sources. Each leaf value is the
/// weight-averaged label of the rows routed to it; `pooled_count` stays the
/// raw row count.
fn calibrate_weighted(forest: &Forest, parts: &[(&Dataset, f64)]) -> Result<Calibration> {
    forest
        .trees()
        .par_iter()
        .map(|tree| {
            let mut label_mass: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
            for &(data, weight) in parts {
                for (row, leaf) in leaf_assignments(tree, data)?.into_iter().enumerate() {
                    let e = label_mass.entry(leaf).or_insert((0.0, 0.0, 0));
                    e.0 += weight * f64::from(data.label(row));
                    e.1 += weight;
                    e.2 += 1;
                }
            }
            let mut leaves = BTreeMap::new();
            for id in tree.leaf_ids() {
                let entry = match label_mass.get(&id) {
                    Some(&(mass, total, count)) => {
                        LeafCalibration { value: mass / total, pooled_count: count }
                    }
                    None => LeafCalibration {
                        value: tree.leaf_value(id).expect("id comes from leaf_ids"),
                        pooled_count: 0,
                    },
                };
                leaves.insert(id, entry);
            }
            Ok(leaves)
        })
        .collect()
}

fn check_ctrf_inputs(r_data: &Dataset, l_data: &Dataset) -> Result<()> {
    if r_data.source() != Source::R {
        return Err(Error::InvalidDataset(format!(
            "structure data must carry source R, got {}",
            r_data.source()
        )));
    }
    if l_data.source() != Source::L {
        return Err(Error::InvalidDataset(format!(
            "calibration data must carry source L, got {}",
            l_data.source()
        )));
    }
    if r_data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_same_schema(r_data.feature_names(), l_data.feature_names())
}

/// Fits the two-stage model: structure on R-data, leaves recalibrated on the
/// row-concatenation of R and L (unweighted pooling).
pub fn fit_ctrf(r_data: &Dataset, l_data: &Dataset, hp: &ForestHyperparams) -> Result<CtrfModel> {
    check_ctrf_inputs(r_data, l_data)?;
    let forest = fit_forest(r_data, hp)?;
    let pooled = Dataset::concat(r_data, l_data, Source::L)?;
    let calibration = calibrate_leaves(&forest, &pooled)?;
    Ok(CtrfModel { forest, calibration })
}

/// [`fit_ctrf`] with per-source calibration weights (an optional upweighting
/// of the scarce R rows). `weights` 1.0/1.0 reproduces `fit_ctrf` exactly.
pub fn fit_ctrf_weighted(
    r_data: &Dataset,
    l_data: &Dataset,
    hp: &ForestHyperparams,
    weights: SourceWeights,
) -> Result<CtrfModel> {
    weights.validate()?;
    check_ctrf_inputs(r_data, l_data)?;
    let forest = fit_forest(r_data, hp)?;
    let mut parts: Vec<(&Dataset, f64)> = vec![(r_data, weights.r)];
    if !l_data.is_empty() {
        parts.push((l_data, weights.l));
    }
    let calibration = calibrate_weighted(&forest, &parts)?;
    Ok(CtrfModel { forest, calibration })
}
