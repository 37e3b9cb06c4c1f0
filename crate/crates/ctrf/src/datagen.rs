//! Synthetic data generators.
//!
//! The explicit-mechanism generator produces stable features S that drive the
//! outcome and unstable features V that merely co-vary with it, under three
//! causal structures: (a) S independent of V, (b) V generated from S, and
//! (c) S generated from V. A biased selection step with inclusion rate r
//! plants a spurious correlation between the label and V. A separate
//! Gaussian-cluster generator provides generic classification data for the
//! auction benchmark's relevance oracle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Source};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;

// ── Configuration ────────────────────────────────────────────────────────

/// Causal structure linking the stable block S and the unstable block V.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismCase {
    /// Case a: S and V are independent.
    Independent,
    /// Case b: V is a noisy function of S.
    StoV,
    /// Case c: S is a noisy function of V.
    VtoS,
}

/// One generation cell: feature counts, causal case, optional biased
/// selection, and the target row count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub p_total: usize,
    pub p_s: usize,
    pub p_v: usize,
    /// `None` disables biased selection (randomized collection).
    pub inclusion_rate: Option<f64>,
    pub n_target: usize,
    pub case: MechanismCase,
    pub seed: u64,
}

impl GenConfig {
    /// Default split: `p_s = round(0.4 p)` stable features, the rest unstable.
    pub fn for_case(
        p_total: usize,
        case: MechanismCase,
        inclusion_rate: Option<f64>,
        n_target: usize,
        seed: u64,
    ) -> Self {
        let p_s = ((0.4 * p_total as f64).round() as usize).max(1);
        GenConfig { p_total, p_s, p_v: p_total - p_s, inclusion_rate, n_target, case, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_s == 0 || self.p_v == 0 {
            return Err(Error::InvalidConfig("p_s and p_v must both be >= 1".into()));
        }
        if self.p_s + self.p_v != self.p_total {
            return Err(Error::InvalidConfig(format!(
                "p_s + p_v = {} does not match p_total = {}",
                self.p_s + self.p_v,
                self.p_total
            )));
        }
        if self.n_target == 0 {
            return Err(Error::InvalidConfig("n_target must be >= 1".into()));
        }
        if let Some(r) = self.inclusion_rate {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "inclusion rate {r} outside the open interval (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome coefficients: `alpha[j] = (-1)^j (j % 3 + 1) p / 3` on single
/// stable features and `beta[j] = p / 2` on adjacent pairs, 1-indexed j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl OutcomeParams {
    pub fn from_p(p_total: usize, p_s: usize) -> Self {
        let p = p_total as f64;
        let alpha = (1..=p_s)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * ((j % 3) as f64 + 1.0) * p / 3.0
            })
            .collect();
        let beta = vec![p / 2.0; p_s.saturating_sub(1)];
        OutcomeParams { alpha, beta }
    }
}

// ── Feature generation ───────────────────────────────────────────────────

/// Latent and binarized feature blocks for one generated batch, row-major.
#[derive(Debug, Clone)]
pub struct FeatureDraw {
    pub n: usize,
    pub p_s: usize,
    pub p_v: usize,
    pub s_latent: Vec<f64>,
    pub v_latent: Vec<f64>,
    /// Binarized as 0.0 / 1.0 by the indicator `latent > 0`.
    pub s: Vec<f64>,
    pub v: Vec<f64>,
}

impl FeatureDraw {
    pub fn s_row(&self, i: usize) -> &[f64] {
        &self.s[i * self.p_s..(i + 1) * self.p_s]
    }

    pub fn v_row(&self, i: usize) -> &[f64] {
        &self.v[i * self.p_v..(i + 1) * self.p_v]
    }

    /// Mean of the binarized unstable features in row `i`.
    pub fn v_row_mean(&self, i: usize) -> f64 {
        let row = self.v_row(i);
        row.iter().sum::<f64>() / row.len() as f64
    }
}

/// Variance of the additive noise on dependent latent features.
const LINK_NOISE_VARIANCE: f64 = 2.0;
/// Variance of the additive noise on the latent outcome.
const OUTCOME_NOISE_VARIANCE: f64 = 0.2;

fn binarize(latent: &[f64]) -> Vec<f64> {
    latent.iter().map(|&z| f64::from(z > 0.0)).collect()
}

/// Draws latent feature blocks under the requested causal case and binarizes
/// them. Per row, the independent block is drawn first and the dependent
/// block second, so cases b and c consume the random stream symmetrically.
/// Dependent indices wrap around when the block lengths differ.
pub fn gen_features<R: Rng>(
    case: MechanismCase,
    n: usize,
    p_s: usize,
    p_v: usize,
    rng: &mut R,
) -> FeatureDraw {
    let link_noise = Normal::new(0.0, LINK_NOISE_VARIANCE.sqrt()).expect("valid sd");
    let mut s_latent = Vec::with_capacity(n * p_s);
    let mut v_latent = Vec::with_capacity(n * p_v);

    let draw_row = |rng: &mut R, n_parent: usize, n_child: usize| {
        let parent: Vec<f64> =
            (0..n_parent).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let child: Vec<f64> = (0..n_child)
            .map(|k| {
                parent[k % n_parent] + parent[(k + 1) % n_parent] + link_noise.sample(rng)
            })
            .collect();
        (parent, child)
    };

    for _ in 0..n {
        match case {
            MechanismCase::Independent => {
                for _ in 0..p_s {
                    s_latent.push(rng.sample::<f64, _>(StandardNormal));
                }
                for _ in 0..p_v {
                    v_latent.push(rng.sample::<f64, _>(StandardNormal));
                }
            }
            MechanismCase::StoV => {
                let (parent, child) = draw_row(rng, p_s, p_v);
                s_latent.extend(parent);
                v_latent.extend(child);
            }
            MechanismCase::VtoS => {
                let (parent, child) = draw_row(rng, p_v, p_s);
                v_latent.extend(parent);
                s_latent.extend(child);
            }
        }
    }

    FeatureDraw {
        n,
        p_s,
        p_v,
        s: binarize(&s_latent),
        v: binarize(&v_latent),
        s_latent,
        v_latent,
    }
}

// ── Outcome generation ───────────────────────────────────────────────────

/// Noise-free part of the latent outcome for one row of binarized S:
/// `sigmoid(sum_j alpha_j S_j + sum_j beta_j S_j S_{j+1})`.
pub fn outcome_signal(s_row: &[f64], params: &OutcomeParams) -> f64 {
    let linear: f64 = params.alpha.iter().zip(s_row).map(|(a, s)| a * s).sum();
    let interaction: f64 = params
        .beta
        .iter()
        .enumerate()
        .map(|(j, b)| b * s_row[j] * s_row[j + 1])
        .sum();
    sigmoid(linear + interaction)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Latent outcome `y_latent = signal + noise` and binary label
/// `y = indicator(y_latent > 0.5)` with caller-supplied per-row noise.
pub fn gen_outcome_with_noise(
    s: &[f64],
    p_s: usize,
    params: &OutcomeParams,
    noise: &[f64],
) -> Result<(Vec<f64>, Vec<u8>)> {
    if p_s == 0 || s.len() % p_s != 0 {
        return Err(Error::InvalidInput("S matrix shape does not match p_s".into()));
    }
    let n = s.len() / p_s;
    if noise.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: noise.len() });
    }
    if params.alpha.len() != p_s {
        return Err(Error::DimensionMismatch { expected: p_s, got: params.alpha.len() });
    }
    let mut y_latent = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let row = &s[i * p_s..(i + 1) * p_s];
        let value = outcome_signal(row, params) + noise[i];
        y_latent.push(value);
        y.push(u8::from(value > 0.5));
    }
    Ok((y_latent, y))
}

/// As [`gen_outcome_with_noise`] with noise drawn from `N(0, 0.2)` (variance).
pub fn gen_outcome<R: Rng>(
    s: &[f64],
    p_s: usize,
    params: &OutcomeParams,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<u8>)> {
    let outcome_noise = Normal::new(0.0, OUTCOME_NOISE_VARIANCE.sqrt()).expect("valid sd");
    let n = if p_s == 0 { 0 } else { s.len() / p_s };
    let noise: Vec<f64> = (0..n).map(|_| outcome_noise.sample(rng)).collect();
    gen_outcome_with_noise(s, p_s, params, &noise)
}

// ── Biased selection ─────────────────────────────────────────────────────

/// Accepts candidate rows with probability `r` when the unstable-feature mean
/// agrees with the latent outcome (both above 0.5 or both at/below 0.5) and
/// `1 - r` otherwise, stopping once `n_target` rows are kept.
pub fn biased_selection<R: Rng>(
    y_latent: &[f64],
    draw: &FeatureDraw,
    inclusion_rate: f64,
    n_target: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut kept = Vec::new();
    for i in 0..draw.n.min(y_latent.len()) {
        if kept.len() == n_target {
            break;
        }
        let agree = (draw.v_row_mean(i) > 0.5) == (y_latent[i] > 0.5);
        let keep_prob = if agree { inclusion_rate } else { 1.0 - inclusion_rate };
        if rng.random::<f64>() < keep_prob {
            kept.push(i);
        }
    }
    kept
}

// ── Dataset assembly ─────────────────────────────────────────────────────

fn feature_names(p_s: usize, p_v: usize) -> Vec<String> {
    (1..=p_s)
        .map(|j| format!("S{j}"))
        .chain((1..=p_v).map(|k| format!("V{k}")))
        .collect()
}

/// Generates one dataset for a cell: draws features and outcomes in batches,
/// applies biased selection when configured, and stops at exactly
/// `cfg.n_target` rows. Deterministic given `cfg.seed`.
pub fn gen_dataset(cfg: &GenConfig, source: Source) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = OutcomeParams::from_p(cfg.p_total, cfg.p_s);
    let names = feature_names(cfg.p_s, cfg.p_v);

    let mut features = Vec::with_capacity(cfg.n_target * cfg.p_total);
    let mut labels = Vec::with_capacity(cfg.n_target);
    while labels.len() < cfg.n_target {
        let batch = cfg.n_target - labels.len();
        let draw = gen_features(cfg.case, batch, cfg.p_s, cfg.p_v, &mut rng);
        let (y_latent, y) = gen_outcome(&draw.s, cfg.p_s, &params, &mut rng)?;
        let kept: Vec<usize> = match cfg.inclusion_rate {
            Some(r) => {
                biased_selection(&y_latent, &draw, r, cfg.n_target - labels.len(), &mut rng)
            }
            None => (0..batch).collect(),
        };
        for i in kept {
            features.extend_from_slice(draw.s_row(i));
            features.extend_from_slice(draw.v_row(i));
            labels.push(y[i]);
        }
    }
    Dataset::new(names, features, labels, source)
}

/// The benchmark triple for one sweep cell.
#[derive(Debug, Clone)]
pub struct ExperimentDatasets {
    pub r_data: Dataset,
    pub l_data: Dataset,
    pub test_data: Dataset,
}

/// Defaults for one transfer cell: R-data from case a without selection,
/// L-data from case b at inclusion rate 0.7, test data from case c at the
/// sweep's inclusion rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub p_total: usize,
    pub l_inclusion_rate: f64,
    pub test_inclusion_rate: f64,
    pub n_r: usize,
    pub n_l: usize,
    pub n_t: usize,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            p_total: 20,
            l_inclusion_rate: 0.7,
            test_inclusion_rate: 0.5,
            n_r: 1000,
            n_l: 5000,
            n_t: 2000,
            seed: 0,
        }
    }
}

const R_STREAM: u64 = 0x5244_4154;
const L_STREAM: u64 = 0x4c44_4154;
const TEST_STREAM: u64 = 0x5444_4154;

pub fn build_experiment_datasets(spec: &ExperimentSpec) -> Result<ExperimentDatasets> {
    let r_cfg = GenConfig {
        seed: derive_seed(spec.seed, &[R_STREAM]),
        ..GenConfig::for_case(spec.p_total, MechanismCase::Independent, None, spec.n_r, 0)
    };
    let l_cfg = GenConfig {
        seed: derive_seed(spec.seed, &[L_STREAM]),
        ..GenConfig::for_case(
            spec.p_total,
            MechanismCase::StoV,
            Some(spec.l_inclusion_rate),
            spec.n_l,
            0,
        )
    };
    let t_cfg = GenConfig {
        seed: derive_seed(spec.seed, &[TEST_STREAM]),
        ..GenConfig::for_case(
            spec.p_total,
            MechanismCase::VtoS,
            Some(spec.test_inclusion_rate),
            spec.n_t,
            0,
        )
    };
    Ok(ExperimentDatasets {
        r_data: gen_dataset(&r_cfg, Source::R)?,
        l_data: gen_dataset(&l_cfg, Source::L)?,
        test_data: gen_dataset(&t_cfg, Source::Test)?,
    })
}

// ── Gaussian-cluster classification data ─────────────────────────────────

/// A fixed two-cluster geometry: class centers at `±class_sep · direction`
/// in the informative subspace (unit covariance) plus `n_noise` pure-noise
/// columns. Holding the spec fixed lets callers keep drawing new points from
/// the same population.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    direction: Vec<f64>,
    n_noise: usize,
    class_sep: f64,
}

impl ClusterSpec {
    pub fn random<R: Rng>(
        n_informative: usize,
        n_noise: usize,
        class_sep: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if n_informative == 0 {
            return Err(Error::InvalidConfig("n_informative must be >= 1".into()));
        }
        if !(class_sep.is_finite() && class_sep >= 0.0) {
            return Err(Error::InvalidConfig("class_sep must be finite and >= 0".into()));
        }
        let direction = loop {
            let raw: Vec<f64> =
                (0..n_informative).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break raw.into_iter().map(|x| x / norm).collect::<Vec<f64>>();
            }
        };
        Ok(ClusterSpec { direction, n_noise, class_sep })
    }

    pub fn n_features(&self) -> usize {
        self.direction.len() + self.n_noise
    }

    pub fn feature_names(&self) -> Vec<String> {
        (1..=self.n_features()).map(|j| format!("x{j}")).collect()
    }

    /// Appends one sampled point for the given class to `out`.
    pub fn sample_row<R: Rng>(&self, label: u8, rng: &mut R, out: &mut Vec<f64>) {
        let sign = if label == 1 { 1.0 } else { -1.0 };
        for &u in &self.direction {
            out.push(sign * self.class_sep * u + rng.sample::<f64, _>(StandardNormal));
        }
        for _ in 0..self.n_noise {
            out.push(rng.sample::<f64, _>(StandardNormal));
        }
    }

    /// Draws `n` points with alternating labels (class counts differ by at
    /// most one).
    pub fn gen_dataset<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        if n < 2 {
            return Err(Error::InvalidConfig("classification generator needs n >= 2".into()));
        }
        let mut features = Vec::with_capacity(n * self.n_features());
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let label = (i % 2) as u8;
            self.sample_row(label, rng, &mut features);
            labels.push(label);
        }
        Dataset::new(self.feature_names(), features, labels, Source::R)
    }
}

/// One-shot convenience over [`ClusterSpec`]: draws a random direction, then
/// samples a balanced dataset from it.
pub fn gen_classification<R: Rng>(
    n: usize,
    n_informative: usize,
    n_noise: usize,
    class_sep: f64,
    rng: &mut R,
) -> Result<Dataset> {
    ClusterSpec::random(n_informative, n_noise, class_sep, rng)?.gen_dataset(n, rng)
}

// ── Tests ────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{fit_logistic, LogisticOptions};
    use crate::metrics::auc;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (x, y) in a.iter().zip(b) {
            cov += (x - ma) * (y - mb);
            va += (x - ma) * (x - ma);
            vb += (y - mb) * (y - mb);
        }
        cov / (va.sqrt() * vb.sqrt())
    }

    fn column(matrix: &[f64], width: usize, col: usize) -> Vec<f64> {
        matrix.chunks_exact(width).map(|row| row[col]).collect()
    }

    #[test]
    fn independent_case_has_balanced_uncorrelated_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draw = gen_features(MechanismCase::Independent, 100_000, 4, 6, &mut rng);
        for j in 0..4 {
            let mean = column(&draw.s, 4, j).iter().sum::<f64>() / draw.n as f64;
            assert!((0.49..=0.51).contains(&mean), "S{j} mean {mean}");
        }
        for k in 0..6 {
            let mean = column(&draw.v, 6, k).iter().sum::<f64>() / draw.n as f64;
            assert!((0.49..=0.51).contains(&mean), "V{k} mean {mean}");
        }
        for j in 0..4 {
            let s_col = column(&draw.s, 4, j);
            for k in 0..6 {
                let v_col = column(&draw.v, 6, k);
                let c = corr(&s_col, &v_col);
                assert!(c.abs() < 0.02, "corr(S{j}, V{k}) = {c}");
            }
        }
    }

    #[test]
    fn dependent_case_couples_matching_latents() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draw = gen_features(MechanismCase::StoV, 100_000, 5, 5, &mut rng);
        for k in 0..5 {
            let c = corr(&column(&draw.s_latent, 5, k), &column(&draw.v_latent, 5, k));
            // Theory: 1 / sqrt(1 + 1 + noise variance) = 0.5.
            assert!(c > 0.3, "corr(S~{k}, V~{k}) = {c}");
        }
    }

    #[test]
    fn reverse_case_mirrors_forward_case_exactly_under_one_seed() {
        let mut rng_b = ChaCha8Rng::seed_from_u64(3);
        let mut rng_c = ChaCha8Rng::seed_from_u64(3);
        let b = gen_features(MechanismCase::StoV, 500, 5, 5, &mut rng_b);
        let c = gen_features(MechanismCase::VtoS, 500, 5, 5, &mut rng_c);
        // The independent block is drawn first in both cases, so the roles of
        // S and V swap with bitwise equality.
        assert_eq!(b.s_latent, c.v_latent);
        assert_eq!(b.v_latent, c.s_latent);
    }

    #[test]
    fn outcome_of_all_zero_row_sits_on_the_boundary() {
        let params = OutcomeParams::from_p(20, 8);
        let s = vec![0.0; 8];
        let (y_latent, y) = gen_outcome_with_noise(&s, 8, &params, &[0.0]).unwrap();
        assert_eq!(y_latent, vec![0.5]);
        assert_eq!(y, vec![0], "boundary is strict");
    }

    #[test]
    fn all_ones_outcome_matches_independent_arithmetic() {
        let (p_total, p_s) = (20, 8);
        let params = OutcomeParams::from_p(p_total, p_s);
        let s = vec![1.0; p_s];
        let (y_latent, _) = gen_outcome_with_noise(&s, p_s, &params, &[0.0]).unwrap();

        // Recompute from the coefficient formulas with explicit arithmetic.
        let p = p_total as f64;
        let mut logit = 0.0;
        for j in 1..=p_s {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            logit += sign * ((j % 3) as f64 + 1.0) * p / 3.0;
        }
        logit += (p_s - 1) as f64 * (p / 2.0);
        let expected = 1.0 / (1.0 + (-logit).exp());
        assert!((y_latent[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn outcome_ignores_unstable_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draw = gen_features(MechanismCase::Independent, 200, 3, 4, &mut rng);
        let params = OutcomeParams::from_p(7, 3);
        let noise: Vec<f64> = (0..200).map(|i| (i as f64).sin() * 0.1).collect();
        let (_, y_first) = gen_outcome_with_noise(&draw.s, 3, &params, &noise).unwrap();

        let mut copy = draw.clone();
        copy.v.iter_mut().for_each(|v| *v = 1.0 - *v);
        let (_, y_second) = gen_outcome_with_noise(&copy.s, 3, &params, &noise).unwrap();
        assert_eq!(y_first, y_second);
    }

    fn selection_corr(inclusion_rate: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = gen_features(MechanismCase::Independent, 10_000, 4, 6, &mut rng);
        let params = OutcomeParams::from_p(10, 4);
        let (y_latent, y) = gen_outcome(&draw.s, 4, &params, &mut rng).unwrap();
        let kept = biased_selection(&y_latent, &draw, inclusion_rate, usize::MAX, &mut rng);
        let labels: Vec<f64> = kept.iter().map(|&i| f64::from(y[i])).collect();
        let v_means: Vec<f64> = kept.iter().map(|&i| draw.v_row_mean(i)).collect();
        corr(&labels, &v_means)
    }

    #[test]
    fn selection_tilts_label_feature_correlation_by_rate() {
        assert!(selection_corr(0.9, 5) > 0.0);
        assert!(selection_corr(0.1, 5) < 0.0);
        assert!(selection_corr(0.5, 5).abs() < 0.05);
    }

    #[test]
    fn selection_correlation_is_monotone_in_rate() {
        let values: Vec<f64> =
            [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&r| selection_corr(r, 6)).collect();
        for pair in values.windows(2) {
            assert!(pair[0] < pair[1], "not monotone: {values:?}");
        }
    }

    #[test]
    fn experiment_triple_has_exact_sizes_shared_schema_and_sources() {
        let spec = ExperimentSpec { p_total: 10, seed: 7, ..Default::default() };
        let data = build_experiment_datasets(&spec).unwrap();
        assert_eq!(data.r_data.n_rows(), 1000);
        assert_eq!(data.l_data.n_rows(), 5000);
        assert_eq!(data.test_data.n_rows(), 2000);
        assert_eq!(data.r_data.feature_names(), data.l_data.feature_names());
        assert_eq!(data.r_data.feature_names(), data.test_data.feature_names());
        assert_eq!(data.r_data.source(), Source::R);
        assert_eq!(data.l_data.source(), Source::L);
        assert_eq!(data.test_data.source(), Source::Test);
        assert_eq!(data.r_data.feature_names()[0], "S1");
        assert_eq!(data.r_data.feature_names()[4], "V1");

        let again = build_experiment_datasets(&spec).unwrap();
        assert_eq!(data.r_data, again.r_data);
        assert_eq!(data.l_data, again.l_data);
        assert_eq!(data.test_data, again.test_data);
    }

    #[test]
    fn gen_config_validates() {
        let good = GenConfig::for_case(20, MechanismCase::Independent, Some(0.7), 10, 0);
        assert_eq!((good.p_s, good.p_v), (8, 12));
        assert!(good.validate().is_ok());
        let bad_rate = GenConfig { inclusion_rate: Some(1.0), ..good };
        assert!(bad_rate.validate().is_err());
        let bad_split = GenConfig { p_s: 5, ..good };
        assert!(bad_split.validate().is_err());
    }

    fn lr_auc(class_sep: f64, n_noise: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full = gen_classification(2000, 4, n_noise, class_sep, &mut rng).unwrap();
        let train = full.subset(&(0..1000).collect::<Vec<_>>(), full.source()).unwrap();
        let test = full.subset(&(1000..2000).collect::<Vec<_>>(), full.source()).unwrap();
        let model = fit_logistic(
            &train,
            None,
            &LogisticOptions { l2_lambda: 0.01, ..Default::default() },
        )
        .unwrap();
        auc(&model.predict_dataset(&test).unwrap(), test.labels()).unwrap()
    }

    #[test]
    fn cluster_separation_controls_learnability() {
        assert!((lr_auc(0.0, 2, 8) - 0.5).abs() < 0.06);
        assert!(lr_auc(5.0, 0, 9) > 0.99);
    }

    #[test]
    fn classification_labels_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in [10usize, 11, 501] {
            let data = gen_classification(n, 3, 1, 1.0, &mut rng).unwrap();
            let ones: usize = data.labels().iter().map(|&l| usize::from(l)).sum();
            assert!(ones.abs_diff(n - ones) <= 1);
        }
    }
}
