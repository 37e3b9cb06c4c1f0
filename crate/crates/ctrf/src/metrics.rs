//! Evaluation metrics: AUC, cumulative prediction bias, RIG, top-k inclusion
//! probability, and the histogram distribution-shift score (per-feature
//! Jensen-Shannon divergence aggregated as a root mean square).
//!
//! Natural logarithms throughout.

use serde::{Deserialize, Serialize};

use crate::dataset::{check_same_schema, Dataset, FeatureView};
use crate::error::{Error, Result};

/// Predictions are clipped into `[CLIP, 1 - CLIP]` before log-loss.
pub const PREDICTION_CLIP: f64 = 1e-6;

// ── Ranking and bias metrics ─────────────────────────────────────────────

/// Area under the ROC curve via the rank-based Mann-Whitney statistic:
/// the probability that a random positive outscores a random negative,
/// ties counted one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("non-finite score".into()));
    }
    let n = scores.len();
    let n_pos: usize = labels.iter().map(|&y| usize::from(y)).sum();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::AucUndefined);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of average ranks (1-based) over the positive class.
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &k in &order[i..=j] {
            if labels[k] == 1 {
                pos_rank_sum += avg_rank;
            }
        }
        i = j + 1;
    }
    let n_pos = n_pos as f64;
    Ok((pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg as f64))
}

/// `|mean(predictions) - mean(labels)| / mean(labels)`.
pub fn cumulative_bias(predictions: &[f64], labels: &[u8]) -> Result<f64> {
    if predictions.len() != labels.len() || predictions.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let label_mean =
        labels.iter().map(|&y| f64::from(y)).sum::<f64>() / labels.len() as f64;
    if label_mean <= 0.0 {
        return Err(Error::BiasUndefined);
    }
    let pred_mean = predictions.iter().sum::<f64>() / predictions.len() as f64;
    Ok((pred_mean - label_mean).abs() / label_mean)
}

/// Relative information gain over the base-rate predictor:
/// `(H(ybar) - LogLoss) / H(ybar)`, so 0 for the base rate, 1 in the limit of
/// perfect confident predictions, negative when worse than the base rate.
pub fn rig(predictions: &[f64], labels: &[u8]) -> Result<f64> {
    if predictions.len() != labels.len() || predictions.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let label_mean =
        labels.iter().map(|&y| f64::from(y)).sum::<f64>() / labels.len() as f64;
    if label_mean <= 0.0 || label_mean >= 1.0 {
        return Err(Error::RigUndefined);
    }
    let entropy = -(label_mean * label_mean.ln() + (1.0 - label_mean) * (1.0 - label_mean).ln());
    let mut log_loss = 0.0;
    for (&p, &y) in predictions.iter().zip(labels) {
        let p = p.clamp(PREDICTION_CLIP, 1.0 - PREDICTION_CLIP);
        log_loss -= if y == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    log_loss /= labels.len() as f64;
    Ok((entropy - log_loss) / entropy)
}

/// Fraction of replications in which `feature_index` ranks within the top-k
/// features by importance. Ties rank the lower feature index first.
pub fn top_k_inclusion(
    importances: &[Vec<f64>],
    feature_index: usize,
    k: usize,
) -> Result<f64> {
    if importances.is_empty() {
        return Err(Error::InvalidInput("no importance vectors".into()));
    }
    let n_cols = importances[0].len();
    if k > n_cols {
        return Err(Error::InvalidInput(format!("k = {k} exceeds {n_cols} features")));
    }
    if feature_index >= n_cols {
        return Err(Error::InvalidInput(format!(
            "feature index {feature_index} out of range for {n_cols} features"
        )));
    }
    let mut included = 0usize;
    for (rep, imp) in importances.iter().enumerate() {
        if imp.len() != n_cols {
            return Err(Error::InvalidInput(format!(
                "importance vector {rep} has length {} instead of {n_cols}",
                imp.len()
            )));
        }
        let target = imp[feature_index];
        let ranked_above = imp
            .iter()
            .enumerate()
            .filter(|&(j, &v)| v > target || (v == target && j < feature_index))
            .count();
        if ranked_above < k {
            included += 1;
        }
    }
    Ok(included as f64 / importances.len() as f64)
}

/// Rank of one feature (0 = most important) under the same tie rule that
/// [`top_k_inclusion`] uses.
pub fn importance_rank(importances: &[f64], feature_index: usize) -> usize {
    let target = importances[feature_index];
    importances
        .iter()
        .enumerate()
        .filter(|&(j, &v)| v > target || (v == target && j < feature_index))
        .count()
}

/// `|delta_method - delta_ab| / |delta_ab|`: relative error of a method's
/// predicted delta against ground truth.
pub fn relative_delta_error(delta_method: f64, delta_ab: f64) -> Result<f64> {
    if delta_ab == 0.0 {
        return Err(Error::InvalidInput(
            "relative delta error undefined for zero ground-truth delta".into(),
        ));
    }
    Ok((delta_method - delta_ab).abs() / delta_ab.abs())
}

// ── Histogram divergences ────────────────────────────────────────────────

/// A feature rendered as a multinomial distribution over equal-width bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedDistribution {
    /// `n_bins + 1` sorted edges; bin i spans `[edges[i], edges[i+1])`, the
    /// last bin closed on the right.
    pub bin_edges: Vec<f64>,
    /// Add-one smoothed probabilities, strictly positive, summing to 1.
    pub probabilities: Vec<f64>,
}

/// Equal-width edges spanning `[lo, hi]`; a degenerate range widens by 1 so
/// bins still exist.
pub fn equal_width_edges(lo: f64, hi: f64, n_bins: usize) -> Vec<f64> {
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let width = (hi - lo) / n_bins as f64;
    let mut edges: Vec<f64> = (0..n_bins).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    edges
}

/// Histograms `values` with add-one (Laplace) smoothing. Without explicit
/// edges, equal-width bins span the observed min/max; pass shared edges when
/// comparing two samples. Out-of-range values clamp to the outer bins.
pub fn bin_feature(
    values: &[f64],
    n_bins: usize,
    edges: Option<&[f64]>,
) -> Result<BinnedDistribution> {
    if values.is_empty() {
        return Err(Error::InvalidInput("cannot bin an empty value vector".into()));
    }
    if n_bins < 2 {
        return Err(Error::InvalidInput("n_bins must be >= 2".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in bin_feature".into()));
    }
    let bin_edges: Vec<f64> = match edges {
        Some(e) => {
            if e.len() != n_bins + 1 {
                return Err(Error::InvalidInput(format!(
                    "{} edges supplied for {n_bins} bins",
                    e.len()
                )));
            }
            if e.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidInput("edges must be strictly increasing".into()));
            }
            e.to_vec()
        }
        None => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            equal_width_edges(lo, hi, n_bins)
        }
    };

    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let idx = bin_edges.partition_point(|&e| e <= v);
        let idx = idx.saturating_sub(1).min(n_bins - 1);
        counts[idx] += 1;
    }
    let denom = (values.len() + n_bins) as f64;
    let probabilities = counts.iter().map(|&c| (c + 1) as f64 / denom).collect();
    Ok(BinnedDistribution { bin_edges, probabilities })
}

fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(&pi, &qi)| pi * (pi / qi).ln()).sum()
}

/// Jensen-Shannon divergence `JS(P,Q) = KL(P||M)/2 + KL(Q||M)/2` with
/// `M = (P+Q)/2`. Requires identical bin edges; bounded by `ln 2`.
pub fn js_divergence(p: &BinnedDistribution, q: &BinnedDistribution) -> Result<f64> {
    if p.bin_edges != q.bin_edges {
        return Err(Error::BinEdgeMismatch);
    }
    if p.probabilities.iter().chain(&q.probabilities).any(|&v| v <= 0.0) {
        return Err(Error::InvalidInput(
            "JS divergence needs strictly positive probabilities".into(),
        ));
    }
    let m: Vec<f64> = p
        .probabilities
        .iter()
        .zip(&q.probabilities)
        .map(|(&a, &b)| 0.5 * (a + b))
        .collect();
    Ok(0.5 * kl_divergence(&p.probabilities, &m) + 0.5 * kl_divergence(&q.probabilities, &m))
}

/// Per-feature JS divergences between two samples sharing a schema, binned
/// over the pooled min/max of each feature.
pub fn per_feature_js(
    factual: FeatureView<'_>,
    counterfactual: FeatureView<'_>,
    n_bins: usize,
) -> Result<Vec<(String, f64)>> {
    check_same_schema(factual.feature_names(), counterfactual.feature_names())?;
    if factual.n_rows() == 0 || counterfactual.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut out = Vec::with_capacity(factual.n_cols());
    for j in 0..factual.n_cols() {
        let a = factual.column(j);
        let b = counterfactual.column(j);
        let lo = a.iter().chain(&b).copied().fold(f64::INFINITY, f64::min);
        let hi = a.iter().chain(&b).copied().fold(f64::NEG_INFINITY, f64::max);
        let edges = equal_width_edges(lo, hi, n_bins);
        let pa = bin_feature(&a, n_bins, Some(&edges))?;
        let pb = bin_feature(&b, n_bins, Some(&edges))?;
        out.push((factual.feature_names()[j].clone(), js_divergence(&pa, &pb)?));
    }
    Ok(out)
}

/// Distribution-shift score: root mean square of per-feature JS divergences.
pub fn distribution_shift_score(
    factual: &Dataset,
    counterfactual: &Dataset,
    n_bins: usize,
) -> Result<f64> {
    shift_score_views(factual.feature_view(), counterfactual.feature_view(), n_bins)
}

/// [`distribution_shift_score`] over bare feature views (label-less inputs).
pub fn shift_score_views(
    factual: FeatureView<'_>,
    counterfactual: FeatureView<'_>,
    n_bins: usize,
) -> Result<f64> {
    let js = per_feature_js(factual, counterfactual, n_bins)?;
    let mean_sq = js.iter().map(|(_, v)| v * v).sum::<f64>() / js.len() as f64;
    Ok(mean_sq.sqrt())
}

// ── Reports ──────────────────────────────────────────────────────────────

/// One model's evaluation on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_id: String,
    pub auc: f64,
    pub cumulative_bias: f64,
    pub rig: f64,
    pub n_test: usize,
}

/// Evaluates predictions against test labels on all three headline metrics.
pub fn evaluate_predictions(
    model_id: &str,
    predictions: &[f64],
    labels: &[u8],
) -> Result<MetricsReport> {
    Ok(MetricsReport {
        model_id: model_id.to_string(),
        auc: auc(predictions, labels)?,
        cumulative_bias: cumulative_bias(predictions, labels)?,
        rig: rig(predictions, labels)?,
        n_test: labels.len(),
    })
}

/// Mean / sample standard deviation / count over replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationStats {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

impl ReplicationStats {
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return ReplicationStats { mean: f64::NAN, sd: f64::NAN, count: 0 };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (count - 1) as f64;
            var.sqrt()
        };
        ReplicationStats { mean, sd, count }
    }
}

// ── Tests ────────────────────────────────────────────────────────────────
