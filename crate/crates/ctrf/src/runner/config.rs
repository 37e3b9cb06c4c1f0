//! Experiment configuration: the model roster, per-experiment config structs
//! with sweep defaults, and JSON config-file loading.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::auction::{AuctionConfig, OracleConfig};
use crate::baselines::{IpwOptions, LogisticOptions};
use crate::error::{Error, Result};
use crate::trees::ForestHyperparams;

// ── Model roster ─────────────────────────────────────────────────────────

/// Everything the runner can train. Config files and `--models` accept the
/// kebab-case form of the display names, case-insensitively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Ctrf,
    CntRf,
    RndRf,
    CombineRf,
    Lr,
    LrIpw,
}

pub const ALL_MODELS: [ModelKind; 6] = [
    ModelKind::Ctrf,
    ModelKind::CntRf,
    ModelKind::RndRf,
    ModelKind::CombineRf,
    ModelKind::Lr,
    ModelKind::LrIpw,
];

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Ctrf => "CTRF",
            ModelKind::CntRf => "CNT-RF",
            ModelKind::RndRf => "RND-RF",
            ModelKind::CombineRf => "COMBINE-RF",
            ModelKind::Lr => "LR",
            ModelKind::LrIpw => "LR-IPW",
        };
        f.write_str(s)
    }
}

impl ModelKind {
    /// Stable tag for per-model seed derivation.
    pub(crate) fn stream_tag(self) -> u64 {
        match self {
            ModelKind::Ctrf => 1,
            ModelKind::CntRf => 2,
            ModelKind::RndRf => 3,
            ModelKind::CombineRf => 4,
            ModelKind::Lr => 5,
            ModelKind::LrIpw => 6,
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_lowercase().replace('_', "-");
        match normalized.as_str() {
            "ctrf" => Ok(ModelKind::Ctrf),
            "cnt-rf" | "cntrf" | "cnt" => Ok(ModelKind::CntRf),
            "rnd-rf" | "rndrf" | "rnd" => Ok(ModelKind::RndRf),
            "combine-rf" | "combinerf" | "combine" => Ok(ModelKind::CombineRf),
            "lr" => Ok(ModelKind::Lr),
            "lr-ipw" | "lripw" => Ok(ModelKind::LrIpw),
            "gbdt" => Err(Error::InvalidConfig(
                "model \"gbdt\" is not implemented; available models: \
                 ctrf, cnt-rf, rnd-rf, combine-rf, lr, lr-ipw"
                    .into(),
            )),
            other => Err(Error::InvalidConfig(format!(
                "unknown model {other:?}; available models: \
                 ctrf, cnt-rf, rnd-rf, combine-rf, lr, lr-ipw"
            ))),
        }
    }
}

impl Serialize for ModelKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string().to_ascii_lowercase())
    }
}

impl<'de> Deserialize<'de> for ModelKind {
    fn deserialize<D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(|e| D::Error::custom(format!("{e}")))
    }
}

/// Parses a comma-separated `--models` list.
pub fn parse_model_list(raw: &str) -> Result<Vec<ModelKind>> {
    let models = raw
        .split(',')
        .filter(|part| !part.trim().is_empty())
        .map(ModelKind::from_str)
        .collect::<Result<Vec<_>>>()?;
    if models.is_empty() {
        return Err(Error::InvalidConfig("empty model list".into()));
    }
    Ok(models)
}

// ── Per-experiment configs ───────────────────────────────────────────────

fn default_p_values() -> Vec<usize> {
    vec![20, 40, 80]
}

fn default_inclusion_rates() -> Vec<f64> {
    (1..=9).map(|i| f64::from(i) / 10.0).collect()
}

fn default_models() -> Vec<ModelKind> {
    ALL_MODELS.to_vec()
}

pub(crate) fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

fn validate_models(models: &[ModelKind]) -> Result<()> {
    if models.is_empty() {
        return Err(Error::InvalidConfig("at least one model must be selected".into()));
    }
    Ok(())
}

fn validate_rate(name: &str, rate: f64) -> Result<()> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "{name} {rate} outside the open interval (0, 1)"
        )));
    }
    Ok(())
}

/// The explicit-mechanism sweep over feature counts and test inclusion rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub p_values: Vec<usize>,
    pub inclusion_rates: Vec<f64>,
    pub replications: usize,
    pub n_r: usize,
    pub n_l: usize,
    pub n_t: usize,
    pub l_inclusion_rate: f64,
    pub models: Vec<ModelKind>,
    pub hyperparams: ForestHyperparams,
    pub logistic: LogisticOptions,
    pub ipw: IpwOptions,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            p_values: default_p_values(),
            inclusion_rates: default_inclusion_rates(),
            replications: 200,
            n_r: 1000,
            n_l: 5000,
            n_t: 2000,
            l_inclusion_rate: 0.7,
            models: default_models(),
            hyperparams: ForestHyperparams::default(),
            logistic: LogisticOptions::default(),
            ipw: IpwOptions::default(),
            seed: 0,
            workers: 0,
            out_dir: default_out_dir(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_values.is_empty() || self.inclusion_rates.is_empty() {
            return Err(Error::InvalidConfig(
                "p_values and inclusion_rates must be nonempty".into(),
            ));
        }
        for &p in &self.p_values {
            if p < 2 {
                return Err(Error::InvalidConfig(format!(
                    "p = {p} leaves no room for both stable and unstable features"
                )));
            }
        }
        for &r in &self.inclusion_rates {
            validate_rate("inclusion rate", r)?;
        }
        validate_rate("l_inclusion_rate", self.l_inclusion_rate)?;
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if self.n_r == 0 || self.n_l == 0 || self.n_t == 0 {
            return Err(Error::InvalidConfig("dataset sizes must be >= 1".into()));
        }
        validate_models(&self.models)?;
        self.hyperparams.validate()?;
        self.logistic.validate()?;
        Ok(())
    }
}

/// The auction sweep over test reserves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuctionRunConfig {
    pub reserves: Vec<f64>,
    pub replications: usize,
    pub n_l_auctions: usize,
    pub n_r_pages: usize,
    pub n_test_auctions: usize,
    pub l_reserve: f64,
    pub ads_per_auction: usize,
    pub max_slots: usize,
    pub score_noise_sd: f64,
    pub oracle: OracleConfig,
    pub models: Vec<ModelKind>,
    pub hyperparams: ForestHyperparams,
    pub logistic: LogisticOptions,
    pub ipw: IpwOptions,
    /// Importance cutoff used for the position-inclusion report.
    pub top_k: usize,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for AuctionRunConfig {
    fn default() -> Self {
        let auction = AuctionConfig::default();
        AuctionRunConfig {
            reserves: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            replications: 30,
            n_l_auctions: 25_000,
            n_r_pages: 10_000,
            n_test_auctions: 2_000,
            l_reserve: 0.5,
            ads_per_auction: auction.ads_per_auction,
            max_slots: auction.max_slots,
            score_noise_sd: auction.score_noise_sd,
            oracle: OracleConfig::default(),
            models: default_models(),
            hyperparams: ForestHyperparams::default(),
            logistic: LogisticOptions::default(),
            ipw: IpwOptions::default(),
            top_k: 5,
            seed: 0,
            workers: 0,
            out_dir: default_out_dir(),
        }
    }
}

impl AuctionRunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reserves.is_empty() {
            return Err(Error::InvalidConfig("reserve list must be nonempty".into()));
        }
        for &r in &self.reserves {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!("reserve {r} outside [0, 1]")));
            }
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidConfig("top_k must be >= 1".into()));
        }
        validate_models(&self.models)?;
        self.hyperparams.validate()?;
        self.logistic.validate()?;
        // One auction config stands in for all cells during validation.
        self.auction_config(self.l_reserve, self.n_l_auctions, 0).validate()?;
        Ok(())
    }

    pub(crate) fn auction_config(
        &self,
        reserve: f64,
        n_auctions: usize,
        seed: u64,
    ) -> AuctionConfig {
        AuctionConfig {
            ads_per_auction: self.ads_per_auction,
            max_slots: self.max_slots,
            relevance_reserve: reserve,
            n_auctions,
            score_noise_sd: self.score_noise_sd,
            seed,
        }
    }
}

/// One-off training on CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainPredictConfig {
    pub r_path: Option<PathBuf>,
    pub l_path: Option<PathBuf>,
    pub test_path: PathBuf,
    pub model: ModelKind,
    pub hyperparams: ForestHyperparams,
    pub logistic: LogisticOptions,
    pub ipw: IpwOptions,
    pub save_model: Option<PathBuf>,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for TrainPredictConfig {
    fn default() -> Self {
        TrainPredictConfig {
            r_path: None,
            l_path: None,
            test_path: PathBuf::new(),
            model: ModelKind::Ctrf,
            hyperparams: ForestHyperparams::default(),
            logistic: LogisticOptions::default(),
            ipw: IpwOptions::default(),
            save_model: None,
            seed: 0,
            workers: 0,
            out_dir: default_out_dir(),
        }
    }
}

impl TrainPredictConfig {
    pub fn validate(&self) -> Result<()> {
        if self.test_path.as_os_str().is_empty() {
            return Err(Error::InvalidConfig("a test CSV path is required".into()));
        }
        if self.r_path.is_none() && self.l_path.is_none() {
            return Err(Error::InvalidConfig(
                "at least one training CSV (R or L) is required".into(),
            ));
        }
        self.hyperparams.validate()?;
        self.logistic.validate()?;
        Ok(())
    }
}

/// Distribution-shift diagnostic between two CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShiftScoreConfig {
    pub factual_path: PathBuf,
    pub counterfactual_path: PathBuf,
    pub n_bins: usize,
    pub out_dir: PathBuf,
}

impl Default for ShiftScoreConfig {
    fn default() -> Self {
        ShiftScoreConfig {
            factual_path: PathBuf::new(),
            counterfactual_path: PathBuf::new(),
            n_bins: 10,
            out_dir: default_out_dir(),
        }
    }
}

impl ShiftScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if self.factual_path.as_os_str().is_empty()
            || self.counterfactual_path.as_os_str().is_empty()
        {
            return Err(Error::InvalidConfig(
                "factual and counterfactual CSV paths are required".into(),
            ));
        }
        if self.n_bins < 2 {
            return Err(Error::InvalidConfig("n_bins must be >= 2".into()));
        }
        Ok(())
    }
}

// ── Config files ─────────────────────────────────────────────────────────

/// Which experiment a config file describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulation,
    Auction,
    TrainPredict,
    ShiftScore,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentKind::Simulation => "simulation",
            ExperimentKind::Auction => "auction",
            ExperimentKind::TrainPredict => "train_predict",
            ExperimentKind::ShiftScore => "shift_score",
        };
        f.write_str(s)
    }
}

/// Parses JSON config text for the given experiment. The optional top-level
/// `"experiment"` field, when present, must match; the remaining fields are
/// the experiment's config struct.
pub fn parse_config_json<T: for<'de> Deserialize<'de>>(
    text: &str,
    expected: ExperimentKind,
) -> Result<T> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let map = value
        .as_object_mut()
        .ok_or_else(|| Error::InvalidConfig("config root must be a JSON object".into()))?;
    if let Some(tag) = map.remove("experiment") {
        let kind: ExperimentKind = serde_json::from_value(tag)
            .map_err(|e| Error::InvalidConfig(format!("experiment field: {e}")))?;
        if kind != expected {
            return Err(Error::InvalidConfig(format!(
                "config file is for experiment \"{kind}\", expected \"{expected}\""
            )));
        }
    }
    serde_json::from_value(value).map_err(|e| Error::InvalidConfig(e.to_string()))
}

/// [`parse_config_json`] on a file's contents, with the path prefixed to any
/// error.
pub fn load_config_file<T: for<'de> Deserialize<'de>>(
    path: &std::path::Path,
    expected: ExperimentKind,
) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    parse_config_json(&text, expected).map_err(|e| match e {
        Error::InvalidConfig(msg) => {
            Error::InvalidConfig(format!("{}: {msg}", path.display()))
        }
        other => other,
    })
}

// ── Tests ────────────────────────────────────────────────────────────────
