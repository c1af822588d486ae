//! Out-of-sample accuracy: MSE and R² against the zero forecast.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::data::Month;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub asset_id: String,
    /// Month whose return is forecast.
    pub month: Month,
    pub realized: f64,
    pub predicted: f64,
}

/// Forecast records with unique `(asset_id, month)` and finite values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForecastSet {
    records: Vec<Forecast>,
}

impl ForecastSet {
    pub fn new(records: Vec<Forecast>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !(r.realized.is_finite() && r.predicted.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "forecast for `{}` in {}",
                    r.asset_id, r.month
                )));
            }
            if !seen.insert((r.asset_id.as_str(), r.month)) {
                return Err(Error::Data(format!(
                    "duplicate forecast for `{}` in {}",
                    r.asset_id, r.month
                )));
            }
        }
        Ok(ForecastSet { records })
    }

    pub fn records(&self) -> &[Forecast] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn extend(&mut self, other: ForecastSet) -> Result<()> {
        let mut all = std::mem::take(&mut self.records);
        all.extend(other.records);
        *self = ForecastSet::new(all)?;
        Ok(())
    }

    /// Records sorted by `(month, asset_id)`.
    pub fn sorted(&self) -> Vec<&Forecast> {
        let mut v: Vec<&Forecast> = self.records.iter().collect();
        v.sort_by(|a, b| (a.month, &a.asset_id).cmp(&(b.month, &b.asset_id)));
        v
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// `asset_id,month,realized,predicted`, rows in `(month, asset_id)` order.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "asset_id,month,realized,predicted")?;
        for r in self.sorted() {
            writeln!(
                w,
                "{},{},{},{}",
                r.asset_id, r.month, r.realized, r.predicted
            )?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }

    pub fn read_from<R: Read>(reader: R, source: &str) -> Result<Self> {
        let err = |line: u64, msg: String| Error::Parse {
            path: source.to_string(),
            line: line as usize,
            msg,
        };
        let mut rdr = csv::Reader::from_reader(reader);
        let head = rdr.headers().map_err(|e| err(1, e.to_string()))?;
        if head.iter().collect::<Vec<_>>() != ["asset_id", "month", "realized", "predicted"] {
            return Err(err(
                1,
                "expected header asset_id,month,realized,predicted".into(),
            ));
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let num = |k: usize| {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| err(line, format!("`{}` is not a number", &rec[k])))
            };
            records.push(Forecast {
                asset_id: rec[0].to_string(),
                month: rec[1]
                    .parse()
                    .map_err(|e: Error| err(line, e.to_string()))?,
                realized: num(2)?,
                predicted: num(3)?,
            });
        }
        ForecastSet::new(records)
    }
}

fn non_empty(set: &ForecastSet) -> Result<()> {
    if set.is_empty() {
        return Err(Error::Invalid("metric over an empty forecast set".into()));
    }
    Ok(())
}

/// `(1/N) Σ (r − r̂)²`
pub fn mse_oos(set: &ForecastSet) -> Result<f64> {
    non_empty(set)?;
    let sse: f64 = set
        .records
        .iter()
        .map(|r| (r.realized - r.predicted).powi(2))
        .sum();
    Ok(sse / set.len() as f64)
}

/// `1 − Σ (r − r̂)² / Σ r²`: the benchmark is a zero forecast, not the mean.
pub fn r2_oos(set: &ForecastSet) -> Result<f64> {
    non_empty(set)?;
    let (mut num, mut den) = (0.0, 0.0);
    for r in &set.records {
        num += (r.realized - r.predicted).powi(2);
        den += r.realized * r.realized;
    }
    if den == 0.0 {
        return Err(Error::Invalid(
            "R² undefined: every realized return is zero".into(),
        ));
    }
    Ok(1.0 - num / den)
}
