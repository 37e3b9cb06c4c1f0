//! Simulated ad-auction benchmark.
//!
//! A frozen "true relevance" forest scores candidate ads; auctions filter
//! candidates through a relevance reserve on a noise-perturbed score, rank
//! survivors into at most `max_slots` positions, and clicks follow the true
//! relevance only: independent Bernoulli draws with a uniform pick when more
//! than one ad would be clicked. Because better ads win lower position
//! numbers, "position" is predictive of clicks in logged data while having no
//! causal effect, which is exactly the trap the transfer models are evaluated
//! on. Randomized pages bypass the auction entirely.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Source};
use crate::datagen::ClusterSpec;
use crate::error::{Error, Result};
use crate::seeding::derive_seed;
use crate::trees::{fit_forest, Forest, ForestHyperparams};

// ── Configuration ────────────────────────────────────────────────────────

/// Mechanics of one batch of auctions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuctionConfig {
    pub ads_per_auction: usize,
    pub max_slots: usize,
    pub relevance_reserve: f64,
    pub n_auctions: usize,
    /// Standard deviation of the noise added to scores before filtering.
    pub score_noise_sd: f64,
    pub seed: u64,
}

impl Default for AuctionConfig {
    fn default() -> Self {
        AuctionConfig {
            ads_per_auction: 20,
            max_slots: 5,
            relevance_reserve: 0.5,
            n_auctions: 1000,
            score_noise_sd: 0.05,
            seed: 0,
        }
    }
}

impl AuctionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ads_per_auction == 0 || self.max_slots == 0 {
            return Err(Error::InvalidConfig(
                "ads_per_auction and max_slots must be >= 1".into(),
            ));
        }
        if self.max_slots > self.ads_per_auction {
            return Err(Error::InvalidConfig("max_slots exceeds ads_per_auction".into()));
        }
        if !(0.0..=1.0).contains(&self.relevance_reserve) {
            return Err(Error::InvalidConfig("relevance_reserve outside [0, 1]".into()));
        }
        if !(self.score_noise_sd.is_finite() && self.score_noise_sd >= 0.0) {
            return Err(Error::InvalidConfig("score_noise_sd must be finite and >= 0".into()));
        }
        if self.n_auctions == 0 {
            return Err(Error::InvalidConfig("n_auctions must be >= 1".into()));
        }
        Ok(())
    }
}

/// How the relevance oracle and its ad population are built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub n_train: usize,
    pub n_informative: usize,
    pub n_noise: usize,
    /// Cluster separation of the oracle's training data. The default is
    /// deliberately moderate: it leaves the oracle genuinely uncertain about
    /// many ads, which spreads relevance scores across the unit interval.
    /// Very separable classes collapse the scores onto {0, 1}, and then the
    /// reserve either bites nothing or everything.
    pub class_sep: f64,
    pub n_trees: usize,
    /// Node budget per oracle tree. The default is large enough that trees
    /// grow essentially pure, so oracle scores spread over the whole unit
    /// interval instead of shrinking toward the base rate; without tail mass
    /// near 1.0 a high relevance reserve would starve the auction.
    pub max_nodes: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_train: 2000,
            n_informative: 5,
            n_noise: 5,
            class_sep: 0.6,
            n_trees: 50,
            max_nodes: 4095,
            seed: 0,
        }
    }
}

// ── Relevance oracle ─────────────────────────────────────────────────────

/// The simulation's ground truth: a forest fitted once on cluster data, then
/// frozen. Its scores drive auctions and clicks but are withheld from the
/// models under evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceOracle {
    spec: ClusterSpec,
    forest: Forest,
}

impl RelevanceOracle {
    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn n_features(&self) -> usize {
        self.spec.n_features()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.spec.feature_names()
    }

    /// True relevance of an ad; forest means always land in [0, 1].
    pub fn relevance(&self, features: &[f64]) -> Result<f64> {
        self.forest.predict(features)
    }

    /// Draws one candidate ad from the training population (class chosen by
    /// a fair coin) and scores it.
    pub fn draw_candidate<R: Rng>(&self, rng: &mut R) -> Result<AdCandidate> {
        let label = rng.random_range(0..2u8);
        let mut features = Vec::with_capacity(self.n_features());
        self.spec.sample_row(label, rng, &mut features);
        let relevance = self.relevance(&features)?;
        Ok(AdCandidate { features, relevance })
    }
}

/// Samples a training set, fits the forest, and freezes both the geometry
/// and the model. Deterministic in `cfg.seed`.
pub fn fit_relevance_oracle(cfg: &OracleConfig) -> Result<RelevanceOracle> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[ORACLE_STREAM]));
    let spec = ClusterSpec::random(cfg.n_informative, cfg.n_noise, cfg.class_sep, &mut rng)?;
    let train = spec.gen_dataset(cfg.n_train, &mut rng)?;
    // The oracle is ground truth, not a model under study: every tree sees
    // every feature, and the node budget lets leaves grow pure. Bootstrap
    // bagging alone diversifies the votes, which makes the score distribution
    // strongly bimodal with real mass near 0 and 1; a reserve close to 1.0
    // then still leaves enough candidates to fill a page.
    let hp = ForestHyperparams {
        n_trees: cfg.n_trees,
        feature_ratio: 1.0,
        max_nodes: cfg.max_nodes,
        seed: derive_seed(cfg.seed, &[ORACLE_STREAM, 1]),
        ..Default::default()
    };
    let forest = fit_forest(&train, &hp)?;
    Ok(RelevanceOracle { spec, forest })
}

const ORACLE_STREAM: u64 = 0x4f52_4143;
const PAGE_STREAM: u64 = 0x5041_4745;

// ── Auction mechanics ────────────────────────────────────────────────────

/// One ad competing in an auction: its raw features and its true relevance.
#[derive(Debug, Clone, PartialEq)]
pub struct AdCandidate {
    pub features: Vec<f64>,
    pub relevance: f64,
}

/// One shown ad. Positions within a page are distinct integers starting at
/// 1 (the top slot), and at most one impression per page carries a click.
#[derive(Debug, Clone, PartialEq)]
pub struct Impression {
    pub features: Vec<f64>,
    /// True relevance, withheld from trained models.
    pub relevance: f64,
    pub position: usize,
    pub clicked: u8,
    pub page_id: u64,
}

/// Runs one auction: score noise, reserve filter, rank survivors by noisy
/// score descending (ties to the earlier candidate), allocate the top
/// `max_slots` to positions 1..k. Returns `None` when no candidate clears
/// the reserve; such pages are discarded.
pub fn run_auction<R: Rng>(
    candidates: &[AdCandidate],
    cfg: &AuctionConfig,
    page_id: u64,
    rng: &mut R,
) -> Option<Vec<Impression>> {
    let noise = Normal::new(0.0, cfg.score_noise_sd).expect("valid sd");
    let mut scored: Vec<(usize, f64)> = candidates
        .iter()
        .enumerate()
        .map(|(i, ad)| {
            let noisy = if cfg.score_noise_sd > 0.0 {
                ad.relevance + noise.sample(rng)
            } else {
                ad.relevance
            };
            (i, noisy)
        })
        .filter(|(_, noisy)| *noisy >= cfg.relevance_reserve)
        .collect();
    if scored.is_empty() {
        return None;
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(cfg.max_slots);
    Some(
        scored
            .into_iter()
            .enumerate()
            .map(|(slot, (i, _))| Impression {
                features: candidates[i].features.clone(),
                relevance: candidates[i].relevance,
                position: slot + 1,
                clicked: 0,
                page_id,
            })
            .collect(),
    )
}

/// Builds one randomized page: `max_slots` of the candidates chosen uniformly
/// without replacement, positions assigned in the (random) sampling order.
/// No filter, no ranking.
pub fn random_page<R: Rng>(
    candidates: &[AdCandidate],
    max_slots: usize,
    page_id: u64,
    rng: &mut R,
) -> Vec<Impression> {
    let picked = rand::seq::index::sample(rng, candidates.len(), max_slots.min(candidates.len()));
    picked
        .into_iter()
        .enumerate()
        .map(|(slot, i)| Impression {
            features: candidates[i].features.clone(),
            relevance: candidates[i].relevance,
            position: slot + 1,
            clicked: 0,
            page_id,
        })
        .collect()
}

/// Click law: independent Bernoulli(true relevance) per impression; if
/// several would be clicked, exactly one is kept, chosen uniformly.
/// Position never enters.
pub fn simulate_clicks<R: Rng>(page: &mut [Impression], rng: &mut R) {
    let mut successes = Vec::new();
    for (i, imp) in page.iter_mut().enumerate() {
        imp.clicked = 0;
        if rng.random::<f64>() < imp.relevance {
            successes.push(i);
        }
    }
    if successes.is_empty() {
        return;
    }
    let winner = if successes.len() == 1 {
        successes[0]
    } else {
        successes[rng.random_range(0..successes.len())]
    };
    page[winner].clicked = 1;
}

// ── Page batch generation ────────────────────────────────────────────────

fn page_rng(cfg_seed: u64, kind: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(cfg_seed, &[PAGE_STREAM, kind]))
}

/// `cfg.n_auctions` ranked auctions with clicks; pages with no survivor are
/// dropped, so the result can hold fewer pages than auctions.
pub fn simulate_ranked_pages(
    oracle: &RelevanceOracle,
    cfg: &AuctionConfig,
) -> Result<Vec<Impression>> {
    cfg.validate()?;
    let mut rng = page_rng(cfg.seed, 1);
    let mut impressions = Vec::new();
    for page_id in 0..cfg.n_auctions as u64 {
        let candidates = (0..cfg.ads_per_auction)
            .map(|_| oracle.draw_candidate(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        if let Some(mut page) = run_auction(&candidates, cfg, page_id, &mut rng) {
            simulate_clicks(&mut page, &mut rng);
            impressions.extend(page);
        }
    }
    Ok(impressions)
}

/// `cfg.n_auctions` randomized pages with clicks; reserve and score noise are
/// ignored, every page survives.
pub fn simulate_random_pages(
    oracle: &RelevanceOracle,
    cfg: &AuctionConfig,
) -> Result<Vec<Impression>> {
    cfg.validate()?;
    let mut rng = page_rng(cfg.seed, 2);
    let mut impressions = Vec::new();
    for page_id in 0..cfg.n_auctions as u64 {
        let candidates = (0..cfg.ads_per_auction)
            .map(|_| oracle.draw_candidate(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        let mut page = random_page(&candidates, cfg.max_slots, page_id, &mut rng);
        simulate_clicks(&mut page, &mut rng);
        impressions.extend(page);
    }
    Ok(impressions)
}

/// Click-model training rows: ad features plus the shown position; the label
/// is the click. True relevance stays out of the table.
pub fn impressions_to_dataset(
    impressions: &[Impression],
    oracle: &RelevanceOracle,
    source: Source,
) -> Result<Dataset> {
    let mut names = oracle.feature_names();
    names.push("position".to_string());
    let width = names.len();
    let mut features = Vec::with_capacity(impressions.len() * width);
    let mut labels = Vec::with_capacity(impressions.len());
    for imp in impressions {
        if imp.features.len() + 1 != width {
            return Err(Error::DimensionMismatch {
                expected: width - 1,
                got: imp.features.len(),
            });
        }
        features.extend_from_slice(&imp.features);
        features.push(imp.position as f64);
        labels.push(imp.clicked);
    }
    Dataset::new(names, features, labels, source)
}

/// Writes the full impression table, one row per shown ad:
/// feature columns, position, clicked, page_id, source.
pub fn write_impressions_csv<W: std::io::Write>(
    impressions: &[Impression],
    oracle: &RelevanceOracle,
    source: Source,
    writer: W,
) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    let mut header = oracle.feature_names();
    header.extend(["position".into(), "clicked".into(), "page_id".into(), "source".into()]);
    csv_writer.write_record(&header)?;
    for imp in impressions {
        let mut record: Vec<String> = imp.features.iter().map(|v| format!("{v}")).collect();
        record.push(imp.position.to_string());
        record.push(imp.clicked.to_string());
        record.push(imp.page_id.to_string());
        record.push(source.to_string());
        csv_writer.write_record(&record)?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// The benchmark triple (plus one test set per requested reserve).
#[derive(Debug, Clone)]
pub struct AuctionDatasets {
    pub r_data: Dataset,
    pub l_data: Dataset,
    /// One click dataset per entry of the reserve sweep, in input order.
    pub test_data: Vec<Dataset>,
}

/// Generates R-pages (randomized), L-data (auctions at `l_cfg`'s reserve),
/// and one test set per config in `test_cfgs`, all against the same oracle.
pub fn build_auction_datasets(
    oracle: &RelevanceOracle,
    r_cfg: &AuctionConfig,
    l_cfg: &AuctionConfig,
    test_cfgs: &[AuctionConfig],
) -> Result<AuctionDatasets> {
    let r_impressions = simulate_random_pages(oracle, r_cfg)?;
    let l_impressions = simulate_ranked_pages(oracle, l_cfg)?;
    let test_data = test_cfgs
        .iter()
        .map(|cfg| {
            let imps = simulate_ranked_pages(oracle, cfg)?;
            impressions_to_dataset(&imps, oracle, Source::Test)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuctionDatasets {
        r_data: impressions_to_dataset(&r_impressions, oracle, Source::R)?,
        l_data: impressions_to_dataset(&l_impressions, oracle, Source::L)?,
        test_data,
    })
}

// ── Tests ────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{fit_logistic, LogisticOptions};
    use crate::dataset::Source;
    use crate::metrics::auc;

    fn crafted(ps: &[f64]) -> Vec<AdCandidate> {
        ps.iter().map(|&p| AdCandidate { features: vec![p], relevance: p }).collect()
    }

    fn noiseless(reserve: f64, n_auctions: usize) -> AuctionConfig {
        AuctionConfig {
            relevance_reserve: reserve,
            score_noise_sd: 0.0,
            n_auctions,
            ..Default::default()
        }
    }

    #[test]
    fn zero_reserve_zero_noise_selects_top_slots_in_relevance_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ps: Vec<f64> = (0..20).map(|i| f64::from(i) / 20.0).collect();
        let page =
            run_auction(&crafted(&ps), &noiseless(0.0, 1), 7, &mut rng).unwrap();
        assert_eq!(page.len(), 5);
        let shown: Vec<f64> = page.iter().map(|imp| imp.relevance).collect();
        assert_eq!(shown, vec![0.95, 0.90, 0.85, 0.80, 0.75]);
        let positions: Vec<usize> = page.iter().map(|imp| imp.position).collect();
        assert_eq!(positions, vec![1, 2, 3, 4, 5]);
        assert!(page.iter().all(|imp| imp.page_id == 7));
    }

    #[test]
    fn unreachable_reserve_discards_the_page() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let page = run_auction(&crafted(&[0.5; 20]), &noiseless(1.0, 1), 0, &mut rng);
        assert!(page.is_none());
    }

    #[test]
    fn score_ties_resolve_to_the_earlier_candidate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ps = vec![0.9; 20];
        ps[4] = 0.95;
        let page = run_auction(&crafted(&ps), &noiseless(0.5, 1), 0, &mut rng).unwrap();
        let shown: Vec<f64> = page.iter().map(|imp| imp.features[0]).collect();
        assert_eq!(shown, vec![0.95, 0.9, 0.9, 0.9, 0.9]);
        // After the unique winner, ties fill in candidate order 0, 1, 2, 3.
        assert_eq!(page[1].features[0], ps[0]);
    }

    #[test]
    fn mean_shown_relevance_rises_with_the_reserve() {
        let mut means = Vec::new();
        for (idx, reserve) in [0.5, 0.6, 0.7, 0.8, 0.9].iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(4 + idx as u64);
            let mut total = 0.0;
            let mut count = 0usize;
            for _ in 0..10_000 {
                let ps: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
                let cfg = AuctionConfig {
                    relevance_reserve: *reserve,
                    n_auctions: 1,
                    ..Default::default()
                };
                if let Some(page) = run_auction(&crafted(&ps), &cfg, 0, &mut rng) {
                    total += page.iter().map(|imp| imp.relevance).sum::<f64>();
                    count += page.len();
                }
            }
            means.push(total / count as f64);
        }
        for pair in means.windows(2) {
            assert!(pair[0] < pair[1], "not monotone: {means:?}");
        }
    }

    #[test]
    fn clicks_never_exceed_one_per_page_and_follow_relevance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);

        let mut dead: Vec<Impression> =
            random_page(&crafted(&[0.0; 20]), 5, 0, &mut rng);
        simulate_clicks(&mut dead, &mut rng);
        assert!(dead.iter().all(|imp| imp.clicked == 0));

        for _ in 0..200 {
            let ps: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
            let mut page = random_page(&crafted(&ps), 5, 0, &mut rng);
            simulate_clicks(&mut page, &mut rng);
            let clicks: u32 = page.iter().map(|imp| u32::from(imp.clicked)).sum();
            assert!(clicks <= 1);
        }
    }

    #[test]
    fn certain_clicks_land_uniformly_across_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let candidates = crafted(&[1.0; 20]);
        let mut per_position = [0u32; 5];
        let pages = 100_000;
        for _ in 0..pages {
            let mut page = random_page(&candidates, 5, 0, &mut rng);
            simulate_clicks(&mut page, &mut rng);
            let clicked: Vec<&Impression> =
                page.iter().filter(|imp| imp.clicked == 1).collect();
            assert_eq!(clicked.len(), 1, "p = 1 everywhere forces exactly one click");
            per_position[clicked[0].position - 1] += 1;
        }
        for (slot, count) in per_position.iter().enumerate() {
            let share = f64::from(*count) / f64::from(pages);
            assert!((share - 0.2).abs() < 0.012, "position {} share {share}", slot + 1);
        }
    }

    fn position_relevance_corr(impressions: &[Impression]) -> f64 {
        let n = impressions.len() as f64;
        let mp = impressions.iter().map(|i| i.position as f64).sum::<f64>() / n;
        let mr = impressions.iter().map(|i| i.relevance).sum::<f64>() / n;
        let mut cov = 0.0;
        let mut vp = 0.0;
        let mut vr = 0.0;
        for imp in impressions {
            let dp = imp.position as f64 - mp;
            let dr = imp.relevance - mr;
            cov += dp * dr;
            vp += dp * dp;
            vr += dr * dr;
        }
        cov / (vp.sqrt() * vr.sqrt())
    }

    #[test]
    fn position_correlates_with_relevance_only_in_ranked_pages() {
        let oracle = fit_relevance_oracle(&OracleConfig {
            n_trees: 10,
            seed: 7,
            ..Default::default()
        })
        .unwrap();
        let ranked = simulate_ranked_pages(
            &oracle,
            &AuctionConfig { n_auctions: 2000, seed: 8, ..Default::default() },
        )
        .unwrap();
        let random = simulate_random_pages(
            &oracle,
            &AuctionConfig { n_auctions: 2000, seed: 8, ..Default::default() },
        )
        .unwrap();
        let ranked_corr = position_relevance_corr(&ranked);
        let random_corr = position_relevance_corr(&random);
        assert!(ranked_corr < -0.1, "ranked corr {ranked_corr}");
        assert!(random_corr.abs() < 0.05, "random corr {random_corr}");
        assert!(ranked_corr.abs() > random_corr.abs());
    }

    #[test]
    fn randomized_click_rate_is_free_of_position_effects() {
        let oracle = fit_relevance_oracle(&OracleConfig {
            n_trees: 10,
            seed: 9,
            ..Default::default()
        })
        .unwrap();
        let random = simulate_random_pages(
            &oracle,
            &AuctionConfig { n_auctions: 4000, seed: 10, ..Default::default() },
        )
        .unwrap();
        // Logistic fit of clicks on (relevance, position): relevance carries
        // the signal, position stays near zero.
        let names = vec!["relevance".to_string(), "position".to_string()];
        let mut features = Vec::with_capacity(random.len() * 2);
        let mut labels = Vec::with_capacity(random.len());
        for imp in &random {
            features.push(imp.relevance);
            features.push(imp.position as f64);
            labels.push(imp.clicked);
        }
        let data = Dataset::new(names, features, labels, Source::R).unwrap();
        let opts = LogisticOptions { l2_lambda: 1e-4, ..Default::default() };
        let model = fit_logistic(&data, None, &opts).unwrap();
        assert!(model.weights[0] > 0.5, "relevance coefficient {}", model.weights[0]);
        assert!(model.weights[1].abs() < 0.05, "position coefficient {}", model.weights[1]);
    }

    #[test]
    fn oracle_is_deterministic_accurate_and_bounded() {
        // High separation: the oracle should be close to a perfect classifier.
        let cfg =
            OracleConfig { n_trees: 20, class_sep: 2.0, seed: 11, ..Default::default() };
        let oracle = fit_relevance_oracle(&cfg).unwrap();
        let again = fit_relevance_oracle(&cfg).unwrap();
        assert_eq!(oracle, again);

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let sample = oracle.spec.gen_dataset(1000, &mut rng).unwrap();
        let scores = oracle.forest().predict_dataset(&sample).unwrap();
        assert!(scores.iter().all(|p| (0.0..=1.0).contains(p)));
        let quality = auc(&scores, sample.labels()).unwrap();
        assert!(quality > 0.9, "oracle AUC {quality}");
    }

    #[test]
    fn dataset_triple_shares_schema_and_is_deterministic() {
        let oracle = fit_relevance_oracle(&OracleConfig {
            n_trees: 5,
            seed: 13,
            ..Default::default()
        })
        .unwrap();
        let r_cfg = AuctionConfig { n_auctions: 50, seed: 14, ..Default::default() };
        let l_cfg = AuctionConfig { n_auctions: 100, seed: 15, ..Default::default() };
        let t_cfg = AuctionConfig {
            n_auctions: 60,
            seed: 16,
            relevance_reserve: 0.9,
            ..Default::default()
        };
        let built =
            build_auction_datasets(&oracle, &r_cfg, &l_cfg, std::slice::from_ref(&t_cfg))
                .unwrap();
        assert_eq!(built.r_data.feature_names(), built.l_data.feature_names());
        assert_eq!(built.r_data.feature_names(), built.test_data[0].feature_names());
        assert_eq!(built.r_data.feature_names().last().unwrap(), "position");
        assert_eq!(built.r_data.source(), Source::R);
        assert_eq!(built.l_data.source(), Source::L);
        assert_eq!(built.test_data[0].source(), Source::Test);
        // Randomized pages never discard, ranked pages may.
        assert_eq!(built.r_data.n_rows(), 50 * 5);
        assert!(built.l_data.n_rows() <= 100 * 5);
        assert!(built.l_data.n_rows() > 0);

        let again =
            build_auction_datasets(&oracle, &r_cfg, &l_cfg, std::slice::from_ref(&t_cfg))
                .unwrap();
        assert_eq!(built.r_data, again.r_data);
        assert_eq!(built.l_data, again.l_data);
        assert_eq!(built.test_data[0], again.test_data[0]);
    }

    #[test]
    fn impression_csv_round_trips_through_dataset_reader() {
        let oracle = fit_relevance_oracle(&OracleConfig {
            n_trees: 5,
            n_informative: 2,
            n_noise: 1,
            seed: 17,
            ..Default::default()
        })
        .unwrap();
        let cfg = AuctionConfig { n_auctions: 30, seed: 18, ..Default::default() };
        let impressions = simulate_random_pages(&oracle, &cfg).unwrap();
        let mut buffer = Vec::new();
        write_impressions_csv(&impressions, &oracle, Source::R, &mut buffer).unwrap();

        let table = crate::dataset::read_csv(buffer.as_slice()).unwrap();
        let read_back = table.into_dataset(None).unwrap();
        let direct = impressions_to_dataset(&impressions, &oracle, Source::R).unwrap();
        assert_eq!(read_back, direct);
    }
}
