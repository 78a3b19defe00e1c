//! Plain-text and delimited report tables.
//!
//! Two layouts are supported: dataset statistics (one row per split regime
//! with average test size and average number of unique test PETs) and
//! results (one row per setting, precision/recall/F1 columns per provider).
//! Text output rounds to 3 decimals.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::AggregateReport;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Space-padded columns; the first column is left-aligned, the rest right-aligned.
    pub fn to_text(&self) -> String {
        let cols = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let mut out = String::new();
            for (i, cell) in cells.iter().enumerate().take(cols) {
                if i > 0 {
                    out.push_str("  ");
                    out.push_str(&format!("{cell:>w$}", w = widths[i]));
                } else {
                    out.push_str(&format!("{cell:<w$}", w = widths[i]));
                }
            }
            out.trim_end().to_string()
        };
        let mut out = line(&self.headers);
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * cols.saturating_sub(1)));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    /// Delimited output via the `csv` writer (quotes fields when needed).
    pub fn to_delimited(&self, delimiter: u8) -> String {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub label: String,
    pub avg_test_size: f64,
    pub avg_unique_test_pets: f64,
}

pub fn stats_table(rows: &[StatsRow]) -> Result<Table, TableError> {
    if rows.is_empty() {
        return Err(TableError::SchemaMismatch("no statistics rows".into()));
    }
    Ok(Table {
        headers: vec![
            String::new(),
            "Ave. Test Size".into(),
            "Ave. # of unique PETs in test".into(),
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    format!("{:.1}", r.avg_test_size),
                    format!("{:.1}", r.avg_unique_test_pets),
                ]
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultCell {
    pub setting: String,
    pub provider: String,
    pub aggregate: AggregateReport,
}

/// Settings as rows (first-seen order), `P`/`R`/`F1` per provider as columns.
/// Missing cells print `-`.
pub fn results_table(cells: &[ResultCell]) -> Result<Table, TableError> {
    if cells.is_empty() {
        return Err(TableError::SchemaMismatch("no result cells".into()));
    }
    let mut settings: Vec<&str> = Vec::new();
    let mut providers: Vec<&str> = Vec::new();
    let mut seen = BTreeSet::new();
    for c in cells {
        if !seen.insert((c.setting.as_str(), c.provider.as_str())) {
            return Err(TableError::SchemaMismatch(format!(
                "duplicate cell for setting `{}` and provider `{}`",
                c.setting, c.provider
            )));
        }
        if !settings.contains(&c.setting.as_str()) {
            settings.push(&c.setting);
        }
        if !providers.contains(&c.provider.as_str()) {
            providers.push(&c.provider);
        }
    }
    let mut headers = vec![String::new()];
    for p in &providers {
        for m in ["P", "R", "F1"] {
            headers.push(format!("{p} {m}"));
        }
    }
    let rows = settings
        .iter()
        .map(|s| {
            let mut row = vec![s.to_string()];
            for p in &providers {
                match cells.iter().find(|c| c.setting == *s && c.provider == *p) {
                    Some(c) => {
                        let m = &c.aggregate.macro_avg;
                        for v in [m.precision.mean, m.recall.mean, m.f1.mean] {
                            row.push(format!("{v:.3}"));
                        }
                    }
                    None => row.extend(std::iter::repeat_n("-".to_string(), 3)),
                }
            }
            row
        })
        .collect();
    Ok(Table { headers, rows })
}
