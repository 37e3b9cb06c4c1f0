//! Versioned JSON model documents.
//!
//! Forests and calibrated models share one document schema (format
//! `ctrf-model`, version 1); a calibrated model is a forest document plus a
//! calibration section. Loading treats the input as untrusted: every
//! structural invariant the builders guarantee is re-checked, and malformed
//! documents come back as errors, never panics.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::ctrf::{Calibration, CtrfModel};
use crate::error::{Error, Result};
use crate::trees::{DecisionTree, Forest, Node};

pub const MODEL_FORMAT: &str = "ctrf-model";
pub const MODEL_VERSION: u32 = 1;

/// Whether a document carries a plain forest or a calibrated model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentKind {
    Forest,
    Ctrf,
}

/// The on-disk shape. `calibration` is present exactly when `kind` is
/// [`DocumentKind::Ctrf`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub kind: DocumentKind,
    pub forest: Forest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
}

/// A validated model loaded from a document.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedModel {
    Forest(Forest),
    Ctrf(CtrfModel),
}

impl LoadedModel {
    pub fn predict_dataset(&self, data: &crate::dataset::Dataset) -> Result<Vec<f64>> {
        match self {
            LoadedModel::Forest(f) => f.predict_dataset(data),
            LoadedModel::Ctrf(m) => m.predict_dataset(data),
        }
    }
}

// ── Validation ───────────────────────────────────────────────────────────

fn invalid(message: impl Into<String>) -> Error {
    Error::InvalidModel(message.into())
}

fn validate_tree(tree: &DecisionTree, tree_index: usize, n_features: usize) -> Result<()> {
    let nodes = tree.nodes();
    let context = |msg: String| invalid(format!("tree {tree_index}: {msg}"));
    if nodes.is_empty() {
        return Err(context("no nodes".into()));
    }
    let subset = tree.feature_subset();
    if subset.is_empty() {
        return Err(context("empty feature subset".into()));
    }
    if !subset.windows(2).all(|w| w[0] < w[1]) {
        return Err(context("feature subset not strictly increasing".into()));
    }
    if *subset.last().expect("nonempty") >= n_features {
        return Err(context("feature subset index out of range".into()));
    }
    let subset_set: BTreeSet<usize> = subset.iter().copied().collect();

    // Walk from the root; every node must be reached exactly once, so the
    // node array is a single acyclic tree with no orphans and no shared
    // children.
    let mut visited = vec![false; nodes.len()];
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        if visited[id] {
            return Err(context(format!("node {id} has two parents or forms a cycle")));
        }
        visited[id] = true;
        match &nodes[id] {
            Node::Leaf { value, count } => {
                if !(value.is_finite() && (0.0..=1.0).contains(value)) {
                    return Err(context(format!("leaf {id} value {value} outside [0, 1]")));
                }
                if *count == 0 {
                    return Err(context(format!("leaf {id} has zero count")));
                }
            }
            Node::Internal { feature, threshold, left, right, count, decrease } => {
                if !subset_set.contains(feature) {
                    return Err(context(format!(
                        "node {id} splits on feature {feature} outside its subset"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(context(format!("node {id} threshold not finite")));
                }
                if !(decrease.is_finite() && *decrease >= 0.0) {
                    return Err(context(format!("node {id} decrease invalid")));
                }
                if *count == 0 {
                    return Err(context(format!("node {id} has zero count")));
                }
                for child in [left, right] {
                    if *child >= nodes.len() {
                        return Err(context(format!("node {id} child {child} out of range")));
                    }
                    if *child == 0 {
                        return Err(context(format!("node {id} points back at the root")));
                    }
                }
                if left == right {
                    return Err(context(format!("node {id} has identical children")));
                }
                stack.push(*right);
                stack.push(*left);
            }
        }
    }
    if let Some(orphan) = visited.iter().position(|v| !v) {
        return Err(context(format!("node {orphan} is unreachable from the root")));
    }
    Ok(())
}

/// Checks every structural invariant of a forest that arrived from outside.
pub fn validate_forest(forest: &Forest) -> Result<()> {
    if forest.n_features() == 0 {
        return Err(invalid("forest has zero features"));
    }
    if forest.feature_names().len() != forest.n_features() {
        return Err(invalid(format!(
            "{} feature names for {} features",
            forest.feature_names().len(),
            forest.n_features()
        )));
    }
    let mut seen = BTreeSet::new();
    for name in forest.feature_names() {
        if name.is_empty() {
            return Err(invalid("empty feature name"));
        }
        if !seen.insert(name) {
            return Err(invalid(format!("duplicate feature name {name:?}")));
        }
    }
    forest.hyperparams().validate()?;
    if forest.trees().is_empty() {
        return Err(invalid("forest has no trees"));
    }
    for (i, tree) in forest.trees().iter().enumerate() {
        validate_tree(tree, i, forest.n_features())?;
    }
    Ok(())
}

fn validate_calibration(forest: &Forest, calibration: &Calibration) -> Result<()> {
    if calibration.len() != forest.trees().len() {
        return Err(invalid(format!(
            "{} calibration maps for {} trees",
            calibration.len(),
            forest.trees().len()
        )));
    }
    for (i, (tree, map)) in forest.trees().iter().zip(calibration).enumerate() {
        let leaf_ids: BTreeSet<usize> = tree.leaf_ids().into_iter().collect();
        for (&leaf, entry) in map {
            if !leaf_ids.contains(&leaf) {
                return Err(invalid(format!(
                    "tree {i}: calibration entry for non-leaf node {leaf}"
                )));
            }
            if !(entry.value.is_finite() && (0.0..=1.0).contains(&entry.value)) {
                return Err(invalid(format!(
                    "tree {i}: calibrated value {} outside [0, 1]",
                    entry.value
                )));
            }
        }
        for leaf in leaf_ids {
            if !map.contains_key(&leaf) {
                return Err(invalid(format!("tree {i}: leaf {leaf} has no calibration")));
            }
        }
    }
    Ok(())
}

// ── Save / load ──────────────────────────────────────────────────────────

fn document_for_forest(forest: &Forest) -> ModelDocument {
    ModelDocument {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        kind: DocumentKind::Forest,
        forest: forest.clone(),
        calibration: None,
    }
}

fn document_for_ctrf(model: &CtrfModel) -> ModelDocument {
    ModelDocument {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        kind: DocumentKind::Ctrf,
        forest: model.forest().clone(),
        calibration: Some(model.calibration().clone()),
    }
}

pub fn save_forest<W: Write>(forest: &Forest, writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, &document_for_forest(forest))?;
    Ok(())
}

pub fn save_ctrf<W: Write>(model: &CtrfModel, writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, &document_for_ctrf(model))?;
    Ok(())
}

pub fn save_model_path<P: AsRef<Path>>(model: &LoadedModel, path: P) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let writer = std::io::BufWriter::new(file);
    match model {
        LoadedModel::Forest(f) => save_forest(f, writer),
        LoadedModel::Ctrf(m) => save_ctrf(m, writer),
    }
}

/// Parses and fully validates a model document.
pub fn load_model<R: Read>(reader: R) -> Result<LoadedModel> {
    let document: ModelDocument = serde_json::from_reader(reader)?;
    if document.format != MODEL_FORMAT {
        return Err(invalid(format!("unknown format {:?}", document.format)));
    }
    if document.version != MODEL_VERSION {
        return Err(invalid(format!(
            "unsupported version {} (expected {MODEL_VERSION})",
            document.version
        )));
    }
    validate_forest(&document.forest)?;
    match (document.kind, document.calibration) {
        (DocumentKind::Forest, None) => Ok(LoadedModel::Forest(document.forest)),
        (DocumentKind::Forest, Some(_)) => {
            Err(invalid("forest document carries a calibration section"))
        }
        (DocumentKind::Ctrf, Some(calibration)) => {
            validate_calibration(&document.forest, &calibration)?;
            Ok(LoadedModel::Ctrf(CtrfModel::from_parts(document.forest, calibration)))
        }
        (DocumentKind::Ctrf, None) => Err(invalid("calibrated document missing calibration")),
    }
}

/// Entry point for untrusted bytes (also the fuzzing surface).
pub fn load_model_bytes(bytes: &[u8]) -> Result<LoadedModel> {
    load_model(bytes)
}

pub fn load_model_path<P: AsRef<Path>>(path: P) -> Result<LoadedModel> {
    let file = std::fs::File::open(path)?;
    load_model(std::io::BufReader::new(file))
}

// ── Tests ────────────────────────────────────────────────────────────────
