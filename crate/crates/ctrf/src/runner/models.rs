//! Shared model dispatch for the sweeps and the train command: every
//! [`ModelKind`] maps to one fit routine over the (R, L, test) triple.

use crate::baselines::{
    density_ratio_weights, fit_logistic, fit_variant, IpwOptions, LogisticModel,
    LogisticOptions, RfVariant,
};
use crate::ctrf::{fit_ctrf, CtrfModel};
use crate::dataset::{Dataset, FeatureView, Source};
use crate::error::{Error, Result};
use crate::runner::config::ModelKind;
use crate::seeding::derive_seed;
use crate::trees::{feature_importance, Forest, ForestHyperparams};

/// A trained model of any roster kind.
#[derive(Debug, Clone)]
pub enum FittedModel {
    Forest(Forest),
    Ctrf(CtrfModel),
    Logistic(LogisticModel),
}

impl FittedModel {
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.predict_view(data.feature_view())
    }

    pub fn predict_view(&self, view: FeatureView<'_>) -> Result<Vec<f64>> {
        match self {
            FittedModel::Forest(f) => f.predict_view(view),
            FittedModel::Ctrf(m) => m.predict_view(view),
            FittedModel::Logistic(m) => m.predict_view(view),
        }
    }

    /// Normalized impurity-decrease importances; `None` for linear models.
    pub fn importance(&self) -> Option<Vec<f64>> {
        match self {
            FittedModel::Forest(f) => Some(feature_importance(f)),
            FittedModel::Ctrf(m) => Some(feature_importance(m.forest())),
            FittedModel::Logistic(_) => None,
        }
    }
}

/// Everything a fit may draw on. Test data is a features-only view for
/// models that adapt to the deployment distribution (LR-IPW); test labels
/// are never visible at fit time.
pub struct FitInputs<'a> {
    pub r_data: Option<&'a Dataset>,
    pub l_data: Option<&'a Dataset>,
    pub test_features: Option<FeatureView<'a>>,
}

fn missing(kind: ModelKind, what: &str) -> Error {
    Error::InvalidInput(format!("{kind} requires {what}"))
}

/// Training pool for the linear baselines: R and L concatenated when both
/// are present, otherwise whichever exists.
fn pooled_training_data(inputs: &FitInputs<'_>) -> Result<Option<Dataset>> {
    match (inputs.r_data, inputs.l_data) {
        (Some(r), Some(l)) if !l.is_empty() => Ok(Some(Dataset::concat(r, l, Source::L)?)),
        (Some(r), _) => Ok(Some(r.clone())),
        (None, Some(l)) => Ok(Some(l.clone())),
        (None, None) => Ok(None),
    }
}

/// Fits one model. The forest seed is derived from `base_seed` and the model
/// kind, so roster members use independent randomness streams and adding a
/// model never perturbs the others.
pub fn fit_model(
    kind: ModelKind,
    inputs: &FitInputs<'_>,
    hp: &ForestHyperparams,
    logistic: &LogisticOptions,
    ipw: &IpwOptions,
    base_seed: u64,
) -> Result<FittedModel> {
    const MODEL_STREAM: u64 = 0x4d4f_4445;
    let hp = hp
        .clone()
        .with_seed(derive_seed(base_seed, &[MODEL_STREAM, kind.stream_tag()]));
    match kind {
        ModelKind::Ctrf => {
            let r = inputs.r_data.ok_or_else(|| missing(kind, "an R-tagged dataset"))?;
            let empty_l = Dataset::new(r.feature_names().to_vec(), vec![], vec![], Source::L)?;
            let l = inputs.l_data.unwrap_or(&empty_l);
            Ok(FittedModel::Ctrf(fit_ctrf(r, l, &hp)?))
        }
        ModelKind::CntRf => Ok(FittedModel::Forest(fit_variant(
            RfVariant::CntRf,
            inputs.r_data,
            inputs.l_data,
            &hp,
        )?)),
        ModelKind::RndRf => Ok(FittedModel::Forest(fit_variant(
            RfVariant::RndRf,
            inputs.r_data,
            inputs.l_data,
            &hp,
        )?)),
        ModelKind::CombineRf => Ok(FittedModel::Forest(fit_variant(
            RfVariant::CombineRf,
            inputs.r_data,
            inputs.l_data,
            &hp,
        )?)),
        ModelKind::Lr => {
            let pool =
                pooled_training_data(inputs)?.ok_or_else(|| missing(kind, "training data"))?;
            Ok(FittedModel::Logistic(fit_logistic(&pool, None, logistic)?))
        }
        ModelKind::LrIpw => {
            let pool =
                pooled_training_data(inputs)?.ok_or_else(|| missing(kind, "training data"))?;
            let view = inputs
                .test_features
                .ok_or_else(|| missing(kind, "test features for density-ratio weighting"))?;
            let weights = density_ratio_weights(&pool, view, ipw)?;
            Ok(FittedModel::Logistic(fit_logistic(&pool, Some(&weights), logistic)?))
        }
    }
}
