//! Labeled feature tables and their CSV interchange format.
//!
//! A [`Dataset`] is a dense row-major feature matrix with binary labels and a
//! [`Source`] tag recording which collection policy produced it: `R` for the
//! randomized policy, `L` for the production (logged) policy, `TEST` for
//! evaluation data.
//!
//! The CSV schema is: a header row, one column per feature, a `label` column
//! in {0,1}, and an optional `source` column in {R,L,TEST}. Readers also
//! accept `clicked` as the label column and skip a `page_id` column, so
//! impression exports from the auction simulator round-trip as datasets.

use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ── Source tags ──────────────────────────────────────────────────────────

/// Collection policy that produced a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    /// Fully randomized policy (small, unconfounded).
    R,
    /// Production logging policy (large, spuriously correlated).
    L,
    /// Evaluation data, drawn under the policy being tested.
    #[serde(rename = "TEST")]
    Test,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Source::R => "R",
            Source::L => "L",
            Source::Test => "TEST",
        };
        f.write_str(s)
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "R" => Ok(Source::R),
            "L" => Ok(Source::L),
            "TEST" => Ok(Source::Test),
            other => Err(Error::InvalidDataset(format!(
                "unknown source tag {other:?} (expected R, L, or TEST)"
            ))),
        }
    }
}

// ── Dataset ──────────────────────────────────────────────────────────────

/// Dense labeled dataset. Rows may be empty; the schema (feature names) is
/// always present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    feature_names: Vec<String>,
    /// Row-major values, `n_rows * n_cols` long.
    features: Vec<f64>,
    labels: Vec<u8>,
    source: Source,
}

impl Dataset {
    /// Builds a dataset, validating shape, label range, and value finiteness.
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<f64>,
        labels: Vec<u8>,
        source: Source,
    ) -> Result<Self> {
        let n_cols = feature_names.len();
        if n_cols == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        for (i, name) in feature_names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::InvalidDataset(format!("feature {i} has an empty name")));
            }
            if feature_names[..i].contains(name) {
                return Err(Error::InvalidDataset(format!("duplicate feature name {name:?}")));
            }
        }
        if features.len() != labels.len() * n_cols {
            return Err(Error::InvalidDataset(format!(
                "feature buffer holds {} values but {} rows x {} columns were declared",
                features.len(),
                labels.len(),
                n_cols
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature value at row {}, column {:?}",
                pos / n_cols,
                feature_names[pos % n_cols]
            )));
        }
        if let Some(pos) = labels.iter().position(|&y| y > 1) {
            return Err(Error::InvalidDataset(format!(
                "label at row {pos} is not in {{0,1}}"
            )));
        }
        Ok(Dataset { feature_names, features, labels, source })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_cols();
        &self.features[i * w..(i + 1) * w]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Mean label; NaN on an empty dataset.
    pub fn label_mean(&self) -> f64 {
        let n = self.n_rows();
        self.labels.iter().map(|&y| f64::from(y)).sum::<f64>() / n as f64
    }

    /// Values of one feature column, in row order.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row(i)[j]).collect()
    }

    /// Borrowed view of the feature matrix without labels.
    pub fn feature_view(&self) -> FeatureView<'_> {
        FeatureView { feature_names: &self.feature_names, features: &self.features }
    }

    /// Row-concatenates two datasets with identical schemas. The caller names
    /// the source of the result since pooling usually mixes policies.
    pub fn concat(a: &Dataset, b: &Dataset, source: Source) -> Result<Dataset> {
        check_same_schema(&a.feature_names, &b.feature_names)?;
        let mut features = a.features.clone();
        features.extend_from_slice(&b.features);
        let mut labels = a.labels.clone();
        labels.extend_from_slice(&b.labels);
        Dataset::new(a.feature_names.clone(), features, labels, source)
    }

    /// Copies the rows at `rows` (duplicates allowed) into a new dataset.
    pub fn subset(&self, rows: &[usize], source: Source) -> Result<Dataset> {
        let mut features = Vec::with_capacity(rows.len() * self.n_cols());
        let mut labels = Vec::with_capacity(rows.len());
        for &i in rows {
            if i >= self.n_rows() {
                return Err(Error::InvalidInput(format!(
                    "row index {i} out of bounds for {} rows",
                    self.n_rows()
                )));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset::new(self.feature_names.clone(), features, labels, source)
    }

    /// Writes the dataset in the documented CSV schema.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.feature_names.clone();
        header.push("label".into());
        header.push("source".into());
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for i in 0..self.n_rows() {
            record.clear();
            for v in self.row(i) {
                record.push(format_float(*v));
            }
            record.push(self.labels[i].to_string());
            record.push(self.source.to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(io::BufWriter::new(file))
    }
}

/// Shortest round-trip decimal form of a float (plain Display).
pub(crate) fn format_float(v: f64) -> String {
    format!("{v}")
}

pub(crate) fn check_same_schema(a: &[String], b: &[String]) -> Result<()> {
    if a != b {
        return Err(Error::SchemaMismatch(format!(
            "feature columns differ: [{}] vs [{}]",
            a.join(", "),
            b.join(", ")
        )));
    }
    Ok(())
}

// ── Feature views ────────────────────────────────────────────────────────

/// Borrowed feature matrix: what prediction and density-ratio estimation see.
/// Labels, if any, stay behind.
#[derive(Debug, Clone, Copy)]
pub struct FeatureView<'a> {
    feature_names: &'a [String],
    features: &'a [f64],
}

impl<'a> FeatureView<'a> {
    pub fn new(feature_names: &'a [String], features: &'a [f64]) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if features.len() % feature_names.len() != 0 {
            return Err(Error::InvalidDataset(format!(
                "feature buffer of {} values is not a multiple of {} columns",
                features.len(),
                feature_names.len()
            )));
        }
        Ok(FeatureView { feature_names, features })
    }

    pub fn n_rows(&self) -> usize {
        self.features.len() / self.feature_names.len()
    }

    pub fn n_cols(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &'a [String] {
        self.feature_names
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        let w = self.n_cols();
        &self.features[i * w..(i + 1) * w]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row(i)[j]).collect()
    }
}

// ── CSV import ───────────────────────────────────────────────────────────

/// Parsed CSV contents. Labels and source are optional at this stage so that
/// unlabeled prediction inputs and shift-score inputs share one reader.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub feature_names: Vec<String>,
    /// Row-major feature values.
    pub features: Vec<f64>,
    pub labels: Option<Vec<u8>>,
    pub source: Option<Source>,
}

impl CsvTable {
    pub fn n_rows(&self) -> usize {
        if self.feature_names.is_empty() {
            0
        } else {
            self.features.len() / self.feature_names.len()
        }
    }

    pub fn feature_view(&self) -> Result<FeatureView<'_>> {
        FeatureView::new(&self.feature_names, &self.features)
    }

    /// Converts to a [`Dataset`], requiring labels. The file's own source tag
    /// wins; otherwise `fallback` applies. A file with neither is an error.
    pub fn into_dataset(self, fallback: Option<Source>) -> Result<Dataset> {
        let labels = self
            .labels
            .ok_or_else(|| Error::InvalidDataset("no label column in CSV".into()))?;
        let source = self.source.or(fallback).ok_or_else(|| {
            Error::InvalidDataset("no source column in CSV and no source tag given".into())
        })?;
        Dataset::new(self.feature_names, self.features, labels, source)
    }
}

/// Reads the documented CSV schema. Reserved header names: `label` (or
/// `clicked`) for the label column, `source` for the policy tag, `page_id`
/// ignored; every other column is a feature, in file order.
pub fn read_csv<R: io::Read>(reader: R) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let header = rdr.headers()?.clone();

    #[derive(Clone, Copy)]
    enum Role {
        Feature(usize),
        Label,
        Source,
        Skip,
    }

    let mut roles = Vec::with_capacity(header.len());
    let mut feature_names = Vec::new();
    let mut label_col: Option<String> = None;
    let mut has_source = false;
    for raw in header.iter() {
        let name = raw.trim();
        match name.to_ascii_lowercase().as_str() {
            "label" | "clicked" => {
                if let Some(prev) = &label_col {
                    return Err(Error::InvalidDataset(format!(
                        "both {prev:?} and {name:?} present; only one label column is allowed"
                    )));
                }
                label_col = Some(name.to_string());
                roles.push(Role::Label);
            }
            "source" => {
                if has_source {
                    return Err(Error::InvalidDataset("duplicate source column".into()));
                }
                has_source = true;
                roles.push(Role::Source);
            }
            "page_id" => roles.push(Role::Skip),
            "" => return Err(Error::InvalidDataset("empty column name in header".into())),
            _ => {
                if feature_names.contains(&name.to_string()) {
                    return Err(Error::InvalidDataset(format!(
                        "duplicate feature column {name:?}"
                    )));
                }
                roles.push(Role::Feature(feature_names.len()));
                feature_names.push(name.to_string());
            }
        }
    }
    if feature_names.is_empty() {
        return Err(Error::InvalidDataset("no feature columns in header".into()));
    }

    let n_cols = feature_names.len();
    let mut features = Vec::new();
    let mut labels = label_col.as_ref().map(|_| Vec::new());
    let mut source: Option<Source> = None;
    let mut row_buf = vec![0.0; n_cols];

    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        // 1-based data row number, header excluded, for error messages.
        let rownum = row_idx + 1;
        for (col_idx, value) in record.iter().enumerate() {
            match roles[col_idx] {
                Role::Feature(j) => {
                    let v = parse_float(value).map_err(|why| {
                        Error::InvalidDataset(format!(
                            "row {rownum}, column {:?}: {why}",
                            feature_names[j]
                        ))
                    })?;
                    row_buf[j] = v;
                }
                Role::Label => {
                    let y = parse_label(value).map_err(|why| {
                        Error::InvalidDataset(format!(
                            "row {rownum}, column {:?}: {why}",
                            label_col.as_deref().unwrap_or("label")
                        ))
                    })?;
                    labels.as_mut().expect("label column present").push(y);
                }
                Role::Source => {
                    let tag: Source = value.parse().map_err(|_| {
                        Error::InvalidDataset(format!(
                            "row {rownum}, column \"source\": unknown tag {value:?}"
                        ))
                    })?;
                    match source {
                        None => source = Some(tag),
                        Some(prev) if prev == tag => {}
                        Some(prev) => {
                            return Err(Error::InvalidDataset(format!(
                                "row {rownum}, column \"source\": mixed tags {prev} and {tag} in one file"
                            )));
                        }
                    }
                }
                Role::Skip => {}
            }
        }
        features.extend_from_slice(&row_buf);
    }

    Ok(CsvTable { feature_names, features, labels, source })
}

pub fn read_csv_path<P: AsRef<Path>>(path: P) -> Result<CsvTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| {
        Error::InvalidDataset(format!("cannot open {}: {e}", path.display()))
    })?;
    read_csv(io::BufReader::new(file))
}

fn parse_float(raw: &str) -> std::result::Result<f64, String> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err("empty value".into());
    }
    let v: f64 = trimmed
        .parse()
        .map_err(|_| format!("cannot parse {trimmed:?} as a number"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value {trimmed:?}"));
    }
    Ok(v)
}

fn parse_label(raw: &str) -> std::result::Result<u8, String> {
    let v = parse_float(raw)?;
    if v == 0.0 {
        Ok(0)
    } else if v == 1.0 {
        Ok(1)
    } else {
        Err(format!("label {raw:?} is not 0 or 1"))
    }
}
