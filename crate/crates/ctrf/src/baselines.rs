//! Comparison models: L2-regularized logistic regression, density-ratio
//! importance weighting (the LR-IPW baseline), and the three forest variants
//! (CNT on L-data, RND on R-data, Combine on the concatenation).

use serde::{Deserialize, Serialize};

use crate::dataset::{check_same_schema, Dataset, FeatureView, Source};
use crate::error::{Error, Result};
use crate::trees::{fit_forest, Forest, ForestHyperparams};

// ── Logistic regression ──────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticOptions {
    pub l2_lambda: f64,
    pub max_iters: usize,
    /// Convergence threshold on the gradient max-norm.
    pub tolerance: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        LogisticOptions { l2_lambda: 1.0, max_iters: 500, tolerance: 1e-6 }
    }
}

impl LogisticOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_lambda.is_finite() && self.l2_lambda >= 0.0) {
            return Err(Error::InvalidHyperparameter("l2_lambda must be >= 0".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidHyperparameter("max_iters must be >= 1".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidHyperparameter("tolerance must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_lambda: f64,
    /// Whether the gradient max-norm fell below tolerance.
    pub converged: bool,
    /// Gradient steps actually taken.
    pub iterations: usize,
    feature_names: Vec<String>,
}

impl LogisticModel {
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn predict_proba(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: point.len(),
            });
        }
        let z: f64 =
            self.weights.iter().zip(point).map(|(w, x)| w * x).sum::<f64>() + self.bias;
        Ok(sigmoid(z))
    }

    pub fn predict_view(&self, view: FeatureView<'_>) -> Result<Vec<f64>> {
        check_same_schema(&self.feature_names, view.feature_names())?;
        (0..view.n_rows()).map(|i| self.predict_proba(view.row(i))).collect()
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.predict_view(data.feature_view())
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Per-row sample weights for weighted fits; strictly positive and finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleWeights(Vec<f64>);

impl SampleWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("empty sample weights".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidInput(
                "sample weights must be finite and > 0".into(),
            ));
        }
        Ok(SampleWeights(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Weighted, regularized objective the optimizer minimizes:
/// `(1/W) Σ wᵢ·nllᵢ + (λ/2)·||w||²` with the bias unpenalized. Normalizing
/// by the total weight W makes the fit invariant to rescaling all weights.
pub fn logistic_objective(
    data: &Dataset,
    sample_weights: Option<&SampleWeights>,
    weights: &[f64],
    bias: f64,
    l2_lambda: f64,
) -> Result<f64> {
    let (total, _) = check_weights(data, sample_weights)?;
    let mut loss = 0.0;
    for i in 0..data.n_rows() {
        let z: f64 =
            weights.iter().zip(data.row(i)).map(|(w, x)| w * x).sum::<f64>() + bias;
        let nll = softplus(z) - f64::from(data.label(i)) * z;
        loss += row_weight(sample_weights, i) * nll;
    }
    let penalty = 0.5 * l2_lambda * weights.iter().map(|w| w * w).sum::<f64>();
    Ok(loss / total + penalty)
}

/// Analytic gradient of [`logistic_objective`]: returns (d/dweights, d/dbias).
pub fn logistic_gradient(
    data: &Dataset,
    sample_weights: Option<&SampleWeights>,
    weights: &[f64],
    bias: f64,
    l2_lambda: f64,
) -> Result<(Vec<f64>, f64)> {
    let (total, _) = check_weights(data, sample_weights)?;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for i in 0..data.n_rows() {
        let row = data.row(i);
        let z: f64 = weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + bias;
        let residual = row_weight(sample_weights, i) * (sigmoid(z) - f64::from(data.label(i)));
        for (g, x) in grad_w.iter_mut().zip(row) {
            *g += residual * x;
        }
        grad_b += residual;
    }
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / total + l2_lambda * w;
    }
    Ok((grad_w, grad_b / total))
}

fn row_weight(sample_weights: Option<&SampleWeights>, i: usize) -> f64 {
    sample_weights.map_or(1.0, |sw| sw.0[i])
}

fn check_weights(data: &Dataset, sample_weights: Option<&SampleWeights>) -> Result<(f64, usize)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total = match sample_weights {
        Some(sw) => {
            if sw.len() != data.n_rows() {
                return Err(Error::InvalidInput(format!(
                    "{} sample weights for {} rows",
                    sw.len(),
                    data.n_rows()
                )));
            }
            sw.0.iter().sum()
        }
        None => data.n_rows() as f64,
    };
    Ok((total, data.n_rows()))
}

/// Fits logistic regression by full-batch gradient descent with backtracking
/// (Armijo) line search from zero initialization; fully deterministic.
/// Non-convergence is reported on the model, not as an error.
pub fn fit_logistic(
    data: &Dataset,
    sample_weights: Option<&SampleWeights>,
    opts: &LogisticOptions,
) -> Result<LogisticModel> {
    opts.validate()?;
    check_weights(data, sample_weights)?;
    let d = data.n_cols();
    let mut weights = vec![0.0; d];
    let mut bias = 0.0;
    let mut objective =
        logistic_objective(data, sample_weights, &weights, bias, opts.l2_lambda)?;
    let mut converged = false;
    let mut iterations = 0;

    const ARMIJO_C: f64 = 1e-4;
    for _ in 0..opts.max_iters {
        let (grad_w, grad_b) =
            logistic_gradient(data, sample_weights, &weights, bias, opts.l2_lambda)?;
        let grad_max = grad_w
            .iter()
            .chain(std::iter::once(&grad_b))
            .fold(0.0_f64, |m, g| m.max(g.abs()));
        if grad_max < opts.tolerance {
            converged = true;
            break;
        }
        let grad_sq: f64 =
            grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;

        let mut step = 1.0;
        let mut advanced = false;
        for _ in 0..60 {
            let trial_w: Vec<f64> =
                weights.iter().zip(&grad_w).map(|(w, g)| w - step * g).collect();
            let trial_b = bias - step * grad_b;
            let trial_obj =
                logistic_objective(data, sample_weights, &trial_w, trial_b, opts.l2_lambda)?;
            if trial_obj <= objective - ARMIJO_C * step * grad_sq {
                weights = trial_w;
                bias = trial_b;
                objective = trial_obj;
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            // Step size underflowed: numerically at a minimum.
            converged = grad_max < opts.tolerance.max(1e-8);
            break;
        }
        iterations += 1;
    }

    Ok(LogisticModel {
        weights,
        bias,
        l2_lambda: opts.l2_lambda,
        converged,
        iterations,
        feature_names: data.feature_names().to_vec(),
    })
}

// ── Density-ratio importance weights ─────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IpwOptions {
    pub logistic: LogisticOptions,
    /// Clipping bounds guarding against extreme density ratios.
    pub clip_min: f64,
    pub clip_max: f64,
}

impl Default for IpwOptions {
    fn default() -> Self {
        IpwOptions { logistic: LogisticOptions::default(), clip_min: 1e-3, clip_max: 1e3 }
    }
}

/// The Appendix density-ratio map `w = p / (1 - p)`, clipped.
pub fn density_ratio_from_probability(p_test: f64, opts: &IpwOptions) -> f64 {
    (p_test / (1.0 - p_test)).clamp(opts.clip_min, opts.clip_max)
}

/// Importance weights for covariate shift: fit a logistic classifier that
/// labels test rows 1 and training rows 0, then weight each training row by
/// the clipped odds `p_test(x) / (1 - p_test(x))`.
pub fn density_ratio_weights(
    train: &Dataset,
    test_features: FeatureView<'_>,
    opts: &IpwOptions,
) -> Result<SampleWeights> {
    if !(opts.clip_min > 0.0 && opts.clip_min <= opts.clip_max && opts.clip_max.is_finite()) {
        return Err(Error::InvalidHyperparameter(
            "IPW clip bounds must satisfy 0 < clip_min <= clip_max < inf".into(),
        ));
    }
    check_same_schema(train.feature_names(), test_features.feature_names())?;
    if train.is_empty() || test_features.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }

    let n_train = train.n_rows();
    let n_test = test_features.n_rows();
    let mut stacked = Vec::with_capacity((n_train + n_test) * train.n_cols());
    for i in 0..n_train {
        stacked.extend_from_slice(train.row(i));
    }
    for i in 0..n_test {
        stacked.extend_from_slice(test_features.row(i));
    }
    let mut labels = vec![0u8; n_train];
    labels.extend(std::iter::repeat_n(1u8, n_test));
    let domain = Dataset::new(train.feature_names().to_vec(), stacked, labels, Source::L)?;

    let classifier = fit_logistic(&domain, None, &opts.logistic)?;
    let weights = (0..n_train)
        .map(|i| {
            let p = classifier.predict_proba(train.row(i))?;
            Ok(density_ratio_from_probability(p, opts))
        })
        .collect::<Result<Vec<f64>>>()?;
    SampleWeights::new(weights)
}

// ── Forest variants ──────────────────────────────────────────────────────

/// The three forest baselines, named for their training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RfVariant {
    /// Production-data forest (L only).
    CntRf,
    /// Randomized-data forest (R only).
    RndRf,
    /// Forest on the R+L concatenation.
    CombineRf,
}

impl std::fmt::Display for RfVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RfVariant::CntRf => "CNT-RF",
            RfVariant::RndRf => "RND-RF",
            RfVariant::CombineRf => "Combine-RF",
        };
        f.write_str(s)
    }
}

fn require<'a>(
    data: Option<&'a Dataset>,
    variant: RfVariant,
    role: &str,
) -> Result<&'a Dataset> {
    match data {
        Some(d) if !d.is_empty() => Ok(d),
        Some(_) => Err(Error::InvalidInput(format!("{variant} requires nonempty {role}"))),
        None => Err(Error::InvalidInput(format!("{variant} requires {role}"))),
    }
}

/// Fits the requested variant. Only the datasets the variant needs are read;
/// the others may be absent.
pub fn fit_variant(
    variant: RfVariant,
    r_data: Option<&Dataset>,
    l_data: Option<&Dataset>,
    hp: &ForestHyperparams,
) -> Result<Forest> {
    match variant {
        RfVariant::CntRf => fit_forest(require(l_data, variant, "L-data")?, hp),
        RfVariant::RndRf => fit_forest(require(r_data, variant, "R-data")?, hp),
        RfVariant::CombineRf => {
            let r = require(r_data, variant, "R-data")?;
            let l = require(l_data, variant, "L-data")?;
            let pooled = Dataset::concat(r, l, Source::L)?;
            fit_forest(&pooled, hp)
        }
    }
}

// ── Tests ────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn logit(p: f64) -> f64 {
        (p / (1.0 - p)).ln()
    }

    fn label_free_dataset(n: usize, seed: u64) -> Dataset {
        // Labels depend only on the row index, never on the feature.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let features: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 4 != 0)).collect();
        Dataset::new(vec!["x".into()], features, labels, Source::L).unwrap()
    }

    #[test]
    fn independent_labels_give_zero_weights_and_base_rate_bias() {
        let data = label_free_dataset(2000, 1);
        let model = fit_logistic(&data, None, &LogisticOptions::default()).unwrap();
        assert!(model.weights[0].abs() < 0.05, "weight {}", model.weights[0]);
        assert!((model.bias - logit(0.75)).abs() < 0.05, "bias {}", model.bias);
        assert!(model.converged);
    }

    #[test]
    fn separable_data_reaches_full_training_accuracy() {
        let features: Vec<f64> = (0..40).map(|i| f64::from(i as i32 - 20) / 10.0).collect();
        let labels: Vec<u8> = features.iter().map(|&x| u8::from(x > 0.0)).collect();
        let data = Dataset::new(vec!["x".into()], features, labels, Source::L).unwrap();
        let opts = LogisticOptions { l2_lambda: 0.1, ..Default::default() };
        let model = fit_logistic(&data, None, &opts).unwrap();
        assert!(model.weights[0].is_finite());
        for i in 0..data.n_rows() {
            let p = model.predict_proba(data.row(i)).unwrap();
            assert_eq!(u8::from(p > 0.5), data.label(i));
        }
    }

    #[test]
    fn doubling_sample_weights_changes_nothing_without_regularizer() {
        let data = label_free_dataset(300, 2);
        let opts = LogisticOptions { l2_lambda: 0.0, max_iters: 40, ..Default::default() };
        let ones = SampleWeights::new(vec![1.0; 300]).unwrap();
        let twos = SampleWeights::new(vec![2.0; 300]).unwrap();
        let a = fit_logistic(&data, Some(&ones), &opts).unwrap();
        let b = fit_logistic(&data, Some(&twos), &opts).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let n = rng.random_range(5..=50);
            let d = rng.random_range(1..=10);
            let names: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
            let features: Vec<f64> =
                (0..n * d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2) as u8).collect();
            let data = Dataset::new(names, features, labels, Source::L).unwrap();
            let sw = SampleWeights::new(
                (0..n).map(|_| rng.random::<f64>() + 0.5).collect(),
            )
            .unwrap();
            let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
            let b = rng.random::<f64>() - 0.5;
            let lambda = 0.3;

            let (gw, gb) = logistic_gradient(&data, Some(&sw), &w, b, lambda).unwrap();
            let h = 1e-6;
            let probe = |wj: &[f64], bj: f64| {
                logistic_objective(&data, Some(&sw), wj, bj, lambda).unwrap()
            };
            for j in 0..d {
                let mut plus = w.clone();
                plus[j] += h;
                let mut minus = w.clone();
                minus[j] -= h;
                let fd = (probe(&plus, b) - probe(&minus, b)) / (2.0 * h);
                let rel = (gw[j] - fd).abs() / fd.abs().max(1e-8);
                assert!(rel < 1e-5, "feature {j}: analytic {} vs fd {fd}", gw[j]);
            }
            let fd_b = (probe(&w, b + h) - probe(&w, b - h)) / (2.0 * h);
            assert!((gb - fd_b).abs() / fd_b.abs().max(1e-8) < 1e-5);
        }
    }

    #[test]
    fn objective_is_non_increasing_across_iterations() {
        let data = label_free_dataset(200, 5);
        let opts = LogisticOptions::default();
        let mut last = f64::INFINITY;
        for iters in [1, 2, 4, 8, 16, 32] {
            let m = fit_logistic(
                &data,
                None,
                &LogisticOptions { max_iters: iters, ..opts },
            )
            .unwrap();
            let obj =
                logistic_objective(&data, None, &m.weights, m.bias, opts.l2_lambda).unwrap();
            assert!(obj <= last + 1e-12, "objective rose from {last} to {obj}");
            last = obj;
        }
    }

    #[test]
    fn sample_weights_validate() {
        assert!(SampleWeights::new(vec![]).is_err());
        assert!(SampleWeights::new(vec![1.0, 0.0]).is_err());
        assert!(SampleWeights::new(vec![1.0, f64::NAN]).is_err());
        assert!(SampleWeights::new(vec![0.5, 2.0]).is_ok());
    }

    #[test]
    fn matched_distributions_give_unit_scale_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let names = vec!["x".to_string(), "z".to_string()];
        let draw = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> {
            (0..n * 2).map(|_| rng.random::<f64>()).collect()
        };
        let train =
            Dataset::new(names.clone(), draw(&mut rng, 2000), vec![0; 2000], Source::L).unwrap();
        let test_features = draw(&mut rng, 2000);
        let view = FeatureView::new(&names, &test_features).unwrap();
        let w = density_ratio_weights(&train, view, &IpwOptions::default()).unwrap();
        let mean = w.as_slice().iter().sum::<f64>() / w.len() as f64;
        assert!((0.5..=2.0).contains(&mean), "mean weight {mean}");
    }

    #[test]
    fn even_odds_probability_maps_to_unit_weight() {
        let opts = IpwOptions::default();
        assert_eq!(density_ratio_from_probability(0.5, &opts), 1.0);
        assert_eq!(density_ratio_from_probability(1.0, &opts), opts.clip_max);
        assert_eq!(density_ratio_from_probability(0.0, &opts), opts.clip_min);
    }

    #[test]
    fn shifted_test_mass_upweights_matching_train_rows() {
        let names = vec!["x".to_string()];
        // Train is balanced on the binary feature, test is all ones.
        let train_features: Vec<f64> = (0..400).map(|i| f64::from(i % 2 == 0)).collect();
        let train =
            Dataset::new(names.clone(), train_features.clone(), vec![0; 400], Source::L)
                .unwrap();
        let test_features: Vec<f64> = (0..400).map(|_| 1.0).collect();
        let view = FeatureView::new(&names, &test_features).unwrap();
        let w = density_ratio_weights(&train, view, &IpwOptions::default()).unwrap();
        let (mut at_one, mut at_zero) = (0.0, 0.0);
        for (i, &wi) in w.as_slice().iter().enumerate() {
            if train_features[i] == 1.0 {
                at_one = wi;
            } else {
                at_zero = wi;
            }
        }
        assert!(at_one > at_zero, "w(x=1)={at_one} vs w(x=0)={at_zero}");
    }

    #[test]
    fn ipw_weights_follow_row_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let names = vec!["x".to_string()];
        let train_features: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let test_features: Vec<f64> = (0..200).map(|_| rng.random::<f64>() + 0.4).collect();
        let train =
            Dataset::new(names.clone(), train_features.clone(), vec![0; 200], Source::L)
                .unwrap();
        let view = FeatureView::new(&names, &test_features).unwrap();
        let w = density_ratio_weights(&train, view, &IpwOptions::default()).unwrap();

        let reversed: Vec<f64> = train_features.iter().rev().copied().collect();
        let train_rev =
            Dataset::new(names.clone(), reversed, vec![0; 200], Source::L).unwrap();
        let w_rev = density_ratio_weights(&train_rev, view, &IpwOptions::default()).unwrap();
        for i in 0..200 {
            let a = w.as_slice()[i];
            let b = w_rev.as_slice()[199 - i];
            assert!((a - b).abs() < 1e-6, "row {i}: {a} vs {b}");
        }
    }

    #[test]
    fn ipw_checks_schema() {
        let train = label_free_dataset(10, 17);
        let other_names = vec!["zz".to_string()];
        let feats = vec![0.0; 10];
        let view = FeatureView::new(&other_names, &feats).unwrap();
        assert!(matches!(
            density_ratio_weights(&train, view, &IpwOptions::default()),
            Err(Error::SchemaMismatch(_))
        ));
    }

    fn variant_fixture(seed: u64, source: Source) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let features: Vec<f64> = (0..300).map(|_| rng.random::<f64>()).collect();
        let labels: Vec<u8> = features.iter().map(|&x| u8::from(x > 0.5)).collect();
        Dataset::new(vec!["x".into()], features, labels, source).unwrap()
    }

    #[test]
    fn variants_dispatch_to_the_right_data() {
        let r = variant_fixture(1, Source::R);
        let l = variant_fixture(2, Source::L);
        let hp = ForestHyperparams { n_trees: 3, seed: 9, ..Default::default() };

        let rnd = fit_variant(RfVariant::RndRf, Some(&r), None, &hp).unwrap();
        assert_eq!(rnd, fit_forest(&r, &hp).unwrap());

        let combine = fit_variant(RfVariant::CombineRf, Some(&r), Some(&r), &hp).unwrap();
        let doubled = Dataset::concat(&r, &r, Source::L).unwrap();
        assert_eq!(combine, fit_forest(&doubled, &hp).unwrap());

        // CNT never touches R-data: a schema-incompatible placeholder passes
        // through untouched and the result matches a pure L fit.
        let poison = Dataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![9.0; 9],
            vec![1, 1, 1],
            Source::R,
        )
        .unwrap();
        let cnt = fit_variant(RfVariant::CntRf, Some(&poison), Some(&l), &hp).unwrap();
        assert_eq!(cnt, fit_forest(&l, &hp).unwrap());

        assert!(fit_variant(RfVariant::CntRf, Some(&r), None, &hp).is_err());
        assert!(fit_variant(RfVariant::CombineRf, Some(&r), None, &hp).is_err());
        let empty = Dataset::new(vec!["x".into()], vec![], vec![], Source::L).unwrap();
        assert!(fit_variant(RfVariant::CntRf, None, Some(&empty), &hp).is_err());
    }
}
