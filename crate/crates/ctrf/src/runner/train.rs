//! One-off training on CSV files: read R/L/test tables, fit the requested
//! model, write per-row predictions, and score them when the test file
//! carries labels.

use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::dataset::{read_csv_path, Dataset, Source};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_predictions, MetricsReport};
use crate::runner::config::TrainPredictConfig;
use crate::runner::config_hash_hex;
use crate::runner::models::{fit_model, FitInputs, FittedModel};
use crate::serialize::{save_model_path, LoadedModel};

#[derive(Debug)]
pub struct TrainPredictOutput {
    pub predictions: Vec<f64>,
    pub report: Option<MetricsReport>,
    pub predictions_path: PathBuf,
    pub metrics_path: Option<PathBuf>,
}

/// Reads a training CSV and tags it with the role implied by the flag it
/// arrived under; an explicit `source` column must agree.
fn read_training_csv(path: &Path, expected: Source) -> Result<Dataset> {
    let table = read_csv_path(path)?;
    if let Some(found) = table.source {
        if found != expected {
            return Err(Error::InvalidDataset(format!(
                "{}: file is tagged {found} but was passed as {expected} data",
                path.display()
            )));
        }
    }
    if table.labels.is_none() {
        return Err(Error::InvalidDataset(format!(
            "{}: training data needs a label column",
            path.display()
        )));
    }
    table.into_dataset(Some(expected))
}

#[derive(Serialize)]
struct MetricsDocument<'a> {
    config_hash: String,
    #[serde(flatten)]
    report: &'a MetricsReport,
}

/// Fits `cfg.model` on the tagged training files and writes
/// `predictions.csv` (plus `metrics.json` for labeled test data) to
/// `cfg.out_dir`.
pub fn train_predict(cfg: &TrainPredictConfig) -> Result<TrainPredictOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let config_hash = config_hash_hex(cfg)?;

    let r_data = cfg
        .r_path
        .as_deref()
        .map(|p| read_training_csv(p, Source::R))
        .transpose()?;
    let l_data = cfg
        .l_path
        .as_deref()
        .map(|p| read_training_csv(p, Source::L))
        .transpose()?;
    let test_table = read_csv_path(&cfg.test_path)?;
    let test_view = test_table.feature_view()?;
    let test_labels = test_table.labels.as_deref();

    let inputs = FitInputs {
        r_data: r_data.as_ref(),
        l_data: l_data.as_ref(),
        test_features: Some(test_view),
    };
    let fitted = fit_model(
        cfg.model,
        &inputs,
        &cfg.hyperparams,
        &cfg.logistic,
        &cfg.ipw,
        cfg.seed,
    )?;
    let predictions = fitted.predict_view(test_view)?;

    if let Some(model_path) = &cfg.save_model {
        let loadable = match &fitted {
            FittedModel::Forest(f) => LoadedModel::Forest(f.clone()),
            FittedModel::Ctrf(m) => LoadedModel::Ctrf(m.clone()),
            FittedModel::Logistic(_) => {
                return Err(Error::InvalidConfig(
                    "model saving supports the forest-family models \
                     (ctrf, cnt-rf, rnd-rf, combine-rf)"
                        .into(),
                ))
            }
        };
        save_model_path(&loadable, model_path)?;
    }

    let predictions_path = cfg.out_dir.join("predictions.csv");
    let mut writer = csv::Writer::from_path(&predictions_path)?;
    if let Some(labels) = test_labels {
        writer.write_record(["row", "prediction", "label"])?;
        for (i, (p, &label)) in predictions.iter().zip(labels).enumerate() {
            writer.write_record([i.to_string(), format!("{p}"), label.to_string()])?;
        }
    } else {
        writer.write_record(["row", "prediction"])?;
        for (i, p) in predictions.iter().enumerate() {
            writer.write_record([i.to_string(), format!("{p}")])?;
        }
    }
    writer.flush()?;

    let (report, metrics_path) = if let Some(labels) = test_labels {
        let report = evaluate_predictions(&cfg.model.to_string(), &predictions, labels)?;
        let path = cfg.out_dir.join("metrics.json");
        let file = std::fs::File::create(&path)?;
        serde_json::to_writer_pretty(
            std::io::BufWriter::new(file),
            &MetricsDocument { config_hash, report: &report },
        )?;
        (Some(report), Some(path))
    } else {
        (None, None)
    };

    Ok(TrainPredictOutput { predictions, report, predictions_path, metrics_path })
}
