//! Post-hoc aggregation of result CSVs: group rows from a sweep output and
//! summarize each metric as mean / sd / count, so a finished run can be
//! re-sliced without re-running the experiment.

use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::ReplicationStats;
use crate::runner::config::default_out_dir;

/// Group-by columns tried, in order, when none are given explicitly.
const DEFAULT_GROUP_COLUMNS: [&str; 5] = ["model", "p", "inclusion_rate", "reserve", "case"];

/// Bookkeeping columns never treated as metrics.
const ID_COLUMNS: [&str; 6] = ["seed", "replication", "config_hash", "error", "row", "page_id"];

/// Configuration for the `report` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    /// Results CSV produced by a sweep (or anything with the same shape).
    pub input_path: PathBuf,
    /// Columns to group by; empty selects every default group column
    /// present in the header.
    pub group_by: Vec<String>,
    /// Metric columns to summarize; empty selects every numeric column
    /// that is neither a group key nor bookkeeping.
    pub values: Vec<String>,
    pub out_dir: PathBuf,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            input_path: PathBuf::new(),
            group_by: Vec::new(),
            values: Vec::new(),
            out_dir: default_out_dir(),
        }
    }
}

/// One aggregated group: its key cells plus one stats entry per metric.
#[derive(Debug, Serialize)]
pub struct ReportGroup {
    pub key: Vec<(String, String)>,
    pub stats: Vec<(String, ReplicationStats)>,
}

#[derive(Debug, Serialize)]
pub struct ReportOutput {
    pub group_columns: Vec<String>,
    pub value_columns: Vec<String>,
    pub groups: Vec<ReportGroup>,
    #[serde(skip)]
    pub csv_path: PathBuf,
    #[serde(skip)]
    pub json_path: PathBuf,
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let header: Vec<String> =
        reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: no data rows to aggregate",
            path.display()
        )));
    }
    Ok((header, rows))
}

fn column_index(header: &[String], name: &str, role: &str) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| {
        Error::InvalidInput(format!("{role} column {name:?} not found in header"))
    })
}

/// A column is numeric when it has at least one non-empty cell and every
/// non-empty cell parses as a float. Empty cells mark metrics a model does
/// not produce and are skipped during aggregation.
fn is_numeric_column(rows: &[Vec<String>], idx: usize) -> bool {
    let mut any = false;
    for row in rows {
        let cell = &row[idx];
        if cell.is_empty() {
            continue;
        }
        if cell.parse::<f64>().is_err() {
            return false;
        }
        any = true;
    }
    any
}

/// Orders two group keys component-wise, numerically where both sides parse
/// as floats and lexically otherwise, so `p = 20` sorts before `p = 100`.
fn compare_keys(a: &[String], b: &[String]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(xv), Ok(yv)) => xv.partial_cmp(&yv).unwrap_or(Ordering::Equal),
            _ => x.cmp(y),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    a.len().cmp(&b.len())
}

/// Aggregates `cfg.input_path` and writes `summary.csv` / `summary.json` to
/// `cfg.out_dir`. Groups appear in sorted key order; metric cells are blank
/// when a group has no parseable values for that metric.
pub fn run_report(cfg: &ReportConfig) -> Result<ReportOutput> {
    if cfg.input_path.as_os_str().is_empty() {
        return Err(Error::InvalidConfig("report needs an input CSV path".into()));
    }
    std::fs::create_dir_all(&cfg.out_dir)?;
    let (header, rows) = read_table(&cfg.input_path)?;

    let group_columns: Vec<String> = if cfg.group_by.is_empty() {
        DEFAULT_GROUP_COLUMNS
            .iter()
            .filter(|c| header.iter().any(|h| h == *c))
            .map(|c| c.to_string())
            .collect()
    } else {
        cfg.group_by.clone()
    };
    if group_columns.is_empty() {
        return Err(Error::InvalidInput(
            "no group columns: pass --group-by or use a results CSV with \
             model/p/inclusion_rate/reserve/case columns"
                .into(),
        ));
    }
    let group_idx: Vec<usize> = group_columns
        .iter()
        .map(|c| column_index(&header, c, "group"))
        .collect::<Result<_>>()?;

    let value_columns: Vec<String> = if cfg.values.is_empty() {
        header
            .iter()
            .enumerate()
            .filter(|(i, h)| {
                !group_columns.contains(h)
                    && !ID_COLUMNS.contains(&h.as_str())
                    && is_numeric_column(&rows, *i)
            })
            .map(|(_, h)| h.clone())
            .collect()
    } else {
        cfg.values.clone()
    };
    if value_columns.is_empty() {
        return Err(Error::InvalidInput(
            "no numeric metric columns found to summarize".into(),
        ));
    }
    let value_idx: Vec<usize> = value_columns
        .iter()
        .map(|c| column_index(&header, c, "metric"))
        .collect::<Result<_>>()?;

    let keys: BTreeSet<Vec<String>> = rows
        .iter()
        .map(|row| group_idx.iter().map(|&i| row[i].clone()).collect())
        .collect();
    let mut sorted_keys: Vec<Vec<String>> = keys.into_iter().collect();
    sorted_keys.sort_by(|a, b| compare_keys(a, b));

    let mut groups = Vec::with_capacity(sorted_keys.len());
    for key in sorted_keys {
        let members: Vec<&Vec<String>> = rows
            .iter()
            .filter(|row| group_idx.iter().zip(&key).all(|(&i, k)| &row[i] == k))
            .collect();
        let mut stats = Vec::with_capacity(value_idx.len());
        for (name, &idx) in value_columns.iter().zip(&value_idx) {
            let values: Vec<f64> = members
                .iter()
                .filter_map(|row| row[idx].parse::<f64>().ok())
                .collect();
            stats.push((name.clone(), ReplicationStats::from_values(&values)));
        }
        let key = group_columns.iter().cloned().zip(key).collect();
        groups.push(ReportGroup { key, stats });
    }

    let csv_path = cfg.out_dir.join("summary.csv");
    let mut writer = csv::Writer::from_path(&csv_path)?;
    let mut head: Vec<String> = group_columns.clone();
    for name in &value_columns {
        head.push(format!("{name}_mean"));
        head.push(format!("{name}_sd"));
        head.push(format!("{name}_n"));
    }
    writer.write_record(&head)?;
    for group in &groups {
        let mut record: Vec<String> =
            group.key.iter().map(|(_, v)| v.clone()).collect();
        for (_, s) in &group.stats {
            if s.count == 0 {
                record.extend([String::new(), String::new(), "0".into()]);
            } else {
                record.extend([format!("{}", s.mean), format!("{}", s.sd), s.count.to_string()]);
            }
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;

    let output = ReportOutput {
        group_columns,
        value_columns,
        groups,
        csv_path,
        json_path: cfg.out_dir.join("summary.json"),
    };
    let file = std::fs::File::create(&output.json_path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &output)?;
    Ok(output)
}
