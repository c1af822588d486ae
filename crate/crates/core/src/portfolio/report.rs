use std::fmt::Write as _;

use super::stats::PerfReport;
use crate::error::{Error, Result};

/// Row labels of the accuracy table.
pub const EVALUATION_ROWS: [&str; 2] = ["MSE (%)", "R²_oos (%)"];

/// A metric-by-model table. Cells may be undefined (written `NA`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

impl ReportTable {
    pub fn backtest(title: impl Into<String>, reports: &[(String, PerfReport)]) -> Self {
        let columns = reports.iter().map(|(m, _)| m.clone()).collect();
        let rows = PerfReport::ROW_LABELS
            .iter()
            .enumerate()
            .map(|(k, label)| {
                (
                    label.to_string(),
                    reports.iter().map(|(_, r)| r.values()[k]).collect(),
                )
            })
            .collect();
        ReportTable {
            title: title.into(),
            columns,
            rows,
        }
    }

    /// `(model, mse, r2)` with both metrics as fractions; shown in percent.
    pub fn evaluation(title: impl Into<String>, results: &[(String, f64, f64)]) -> Self {
        let columns = results.iter().map(|(m, _, _)| m.clone()).collect();
        let rows = vec![
            (
                EVALUATION_ROWS[0].to_string(),
                results
                    .iter()
                    .map(|(_, mse, _)| Some(mse * 100.0))
                    .collect(),
            ),
            (
                EVALUATION_ROWS[1].to_string(),
                results.iter().map(|(_, _, r2)| Some(r2 * 100.0)).collect(),
            ),
        ];
        ReportTable {
            title: title.into(),
            columns,
            rows,
        }
    }

    pub fn row_labels(&self) -> Vec<&str> {
        self.rows.iter().map(|(l, _)| l.as_str()).collect()
    }

    /// Full-precision CSV: `metric,<model>…`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (label, cells) in &self.rows {
            out.push_str(label);
            for v in cells {
                out.push(',');
                match v {
                    Some(v) => {
                        let _ = write!(out, "{v}");
                    }
                    None => out.push_str("NA"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`ReportTable::to_csv`].
    pub fn from_csv(title: impl Into<String>, text: &str, source: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::Parse {
            path: source.to_string(),
            line,
            msg,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad(1, "empty table".into()))?;
        let mut head = header.split(',');
        if head.next() != Some("metric") {
            return Err(bad(1, "table header must start with `metric`".into()));
        }
        let columns: Vec<String> = head.map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let mut cells = line.split(',');
            let label = cells.next().unwrap_or_default().to_string();
            let vals = cells
                .map(|c| match c {
                    "NA" => Ok(None),
                    _ => c
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| bad(n + 2, format!("bad number `{c}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != columns.len() {
                return Err(bad(
                    n + 2,
                    format!("{} cells for {} columns", vals.len(), columns.len()),
                ));
            }
            rows.push((label, vals));
        }
        Ok(ReportTable {
            title: title.into(),
            columns,
            rows,
        })
    }

    /// Aligned text with four decimals.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|(_, vals)| {
                vals.iter()
                    .map(|v| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}")))
                    .collect()
            })
            .collect();
        let label_w = self
            .rows
            .iter()
            .map(|(l, _)| l.chars().count())
            .max()
            .unwrap_or(0);
        let col_w: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([c.chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "{}", self.title);
        }
        let _ = write!(out, "{:label_w$}", "");
        for (c, w) in self.columns.iter().zip(&col_w) {
            let _ = write!(out, "  {c:>w$}");
        }
        out.push('\n');
        for ((label, _), row) in self.rows.iter().zip(&cells) {
            let pad = label_w - label.chars().count();
            let _ = write!(out, "{label}{}", " ".repeat(pad));
            for (v, w) in row.iter().zip(&col_w) {
                let _ = write!(out, "  {v:>w$}");
            }
            out.push('\n');
        }
        out
    }
}
