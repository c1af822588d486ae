use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;

use super::month::Month;
use super::schema::{Exchange, FEATURE_COUNT, FEATURE_NAMES, KEY_COLUMNS, LOOKBACK};
use crate::error::{Error, Result};

/// One asset-month observation. Missing characteristics are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub asset_id: String,
    pub month: Month,
    pub excess_return: f64,
    pub market_cap: f64,
    pub exchange: Exchange,
    pub features: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
struct RowMeta {
    asset: usize,
    month: Month,
    excess_return: f64,
    market_cap: f64,
    exchange: Exchange,
}

/// Validated panel, rows sorted by `(asset_id, month)`.
#[derive(Debug, Clone)]
pub struct Panel {
    assets: Vec<String>,
    ranges: Vec<Range<usize>>,
    rows: Vec<RowMeta>,
    /// `rows × FEATURE_COUNT`, NaN marks a missing value.
    features: Vec<f64>,
    normalized: bool,
}

impl Panel {
    pub fn empty() -> Self {
        Panel {
            assets: Vec::new(),
            ranges: Vec::new(),
            rows: Vec::new(),
            features: Vec::new(),
            normalized: false,
        }
    }

    pub fn from_rows(mut rows: Vec<PanelRow>) -> Result<Self> {
        for r in &rows {
            validate_row(r)?;
        }
        rows.sort_by(|a, b| (&a.asset_id, a.month).cmp(&(&b.asset_id, b.month)));
        for pair in rows.windows(2) {
            if pair[0].asset_id == pair[1].asset_id && pair[0].month == pair[1].month {
                return Err(Error::Data(format!(
                    "duplicate row for asset `{}` in {}",
                    pair[0].asset_id, pair[0].month
                )));
            }
        }
        let mut panel = Panel::empty();
        panel.rows.reserve(rows.len());
        panel.features.reserve(rows.len() * FEATURE_COUNT);
        for (i, r) in rows.into_iter().enumerate() {
            if panel.assets.last() != Some(&r.asset_id) {
                panel.assets.push(r.asset_id);
                panel.ranges.push(i..i);
            }
            panel.ranges.last_mut().expect("pushed").end = i + 1;
            panel
                .features
                .extend(r.features.iter().map(|v| v.unwrap_or(f64::NAN)));
            panel.rows.push(RowMeta {
                asset: panel.assets.len() - 1,
                month: r.month,
                excess_return: r.excess_return,
                market_cap: r.market_cap,
                exchange: r.exchange,
            });
        }
        Ok(panel)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn num_assets(&self) -> usize {
        self.assets.len()
    }

    /// Asset identifiers in sorted order.
    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    /// Distinct months present, ascending.
    pub fn months(&self) -> Vec<Month> {
        let mut m: Vec<Month> = self.rows.iter().map(|r| r.month).collect();
        m.sort_unstable();
        m.dedup();
        m
    }

    pub fn first_month(&self) -> Option<Month> {
        self.rows.iter().map(|r| r.month).min()
    }

    pub fn last_month(&self) -> Option<Month> {
        self.rows.iter().map(|r| r.month).max()
    }

    /// Assets observed for fewer than twelve months. They are kept but can
    /// never produce a window.
    pub fn short_history_assets(&self) -> Vec<&str> {
        self.assets
            .iter()
            .zip(&self.ranges)
            .filter(|(_, r)| r.len() < LOOKBACK)
            .map(|(a, _)| a.as_str())
            .collect()
    }

    pub fn row(&self, i: usize) -> PanelRow {
        let m = &self.rows[i];
        PanelRow {
            asset_id: self.assets[m.asset].clone(),
            month: m.month,
            excess_return: m.excess_return,
            market_cap: m.market_cap,
            exchange: m.exchange,
            features: self
                .feature_row(i)
                .iter()
                .map(|v| if v.is_nan() { None } else { Some(*v) })
                .collect(),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = PanelRow> + '_ {
        (0..self.len()).map(|i| self.row(i))
    }

    pub fn asset_of(&self, i: usize) -> &str {
        &self.assets[self.rows[i].asset]
    }

    pub fn month_of(&self, i: usize) -> Month {
        self.rows[i].month
    }

    pub fn excess_return(&self, i: usize) -> f64 {
        self.rows[i].excess_return
    }

    pub fn market_cap(&self, i: usize) -> f64 {
        self.rows[i].market_cap
    }

    pub fn exchange(&self, i: usize) -> Exchange {
        self.rows[i].exchange
    }

    pub fn feature(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.features[i * FEATURE_COUNT + j];
        (!v.is_nan()).then_some(v)
    }

    /// Raw feature row with NaN for missing values.
    pub(crate) fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i * FEATURE_COUNT..(i + 1) * FEATURE_COUNT]
    }

    pub(crate) fn features_mut(&mut self) -> &mut [f64] {
        &mut self.features
    }

    pub(crate) fn set_normalized(&mut self) {
        self.normalized = true;
    }

    /// Row index range of the asset at position `asset` in [`Panel::assets`].
    pub(crate) fn asset_range(&self, asset: usize) -> Range<usize> {
        self.ranges[asset].clone()
    }

    pub fn find(&self, asset_id: &str, month: Month) -> Option<usize> {
        let a = self
            .assets
            .binary_search_by(|x| x.as_str().cmp(asset_id))
            .ok()?;
        let range = self.ranges[a].clone();
        let rows = &self.rows[range.clone()];
        rows.binary_search_by(|r| r.month.cmp(&month))
            .ok()
            .map(|k| range.start + k)
    }

    /// Row indices grouped by month, ascending.
    pub fn rows_by_month(&self) -> BTreeMap<Month, Vec<usize>> {
        let mut out: BTreeMap<Month, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            out.entry(r.month).or_default().push(i);
        }
        out
    }

    /// `(asset_id, month) → row` lookup for bulk joins.
    pub fn index(&self) -> HashMap<(&str, Month), usize> {
        (0..self.len())
            .map(|i| ((self.asset_of(i), self.month_of(i)), i))
            .collect()
    }
}

fn validate_row(r: &PanelRow) -> Result<()> {
    let at = || format!("asset `{}` in {}", r.asset_id, r.month);
    if r.asset_id.is_empty() {
        return Err(Error::Data(format!("empty asset_id in {}", r.month)));
    }
    if r.features.len() != FEATURE_COUNT {
        return Err(Error::Data(format!(
            "{}: expected {FEATURE_COUNT} features, got {}",
            at(),
            r.features.len()
        )));
    }
    if !r.excess_return.is_finite() {
        return Err(Error::Data(format!("{}: non-finite excess_return", at())));
    }
    if !(r.market_cap.is_finite() && r.market_cap > 0.0) {
        return Err(Error::Data(format!(
            "{}: market_cap must be positive",
            at()
        )));
    }
    for (j, v) in r.features.iter().enumerate() {
        if let Some(v) = v {
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "{}: non-finite value for `{}`",
                    at(),
                    FEATURE_NAMES[j]
                )));
            }
        }
    }
    Ok(())
}

pub fn header() -> Vec<&'static str> {
    KEY_COLUMNS
        .iter()
        .chain(FEATURE_NAMES.iter())
        .copied()
        .collect()
}

pub fn load_panel(path: &Path) -> Result<Panel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_panel(BufReader::new(file), &path.display().to_string())
}

/// Reads the panel CSV. `source` names the input in error messages.
pub fn read_panel<R: Read>(reader: R, source: &str) -> Result<Panel> {
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: source.to_string(),
        line: line as usize,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let head = rdr
        .headers()
        .map_err(|e| parse_err(1, format!("unreadable header: {e}")))?
        .clone();
    check_header(&head).map_err(|msg| parse_err(1, msg))?;

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = parse_record(&rec).map_err(|msg| parse_err(line, msg))?;
        validate_row(&row).map_err(|e| parse_err(line, e.to_string()))?;
        rows.push(row);
    }
    Panel::from_rows(rows)
}

fn check_header(head: &csv::StringRecord) -> std::result::Result<(), String> {
    let expected = header();
    for (k, name) in head.iter().enumerate() {
        let name = name.trim_start_matches('\u{feff}');
        match expected.get(k) {
            Some(e) if *e == name => {}
            _ if k >= KEY_COLUMNS.len() && !FEATURE_NAMES.contains(&name) => {
                return Err(format!("unknown feature column `{name}`"));
            }
            Some(e) => return Err(format!("column {} is `{name}`, expected `{e}`", k + 1)),
            None => return Err(format!("unexpected extra column `{name}`")),
        }
    }
    if head.len() < expected.len() {
        return Err(format!("missing column `{}`", expected[head.len()]));
    }
    Ok(())
}

fn parse_record(rec: &csv::StringRecord) -> std::result::Result<PanelRow, String> {
    let num = |k: usize| -> std::result::Result<f64, String> {
        let s = rec[k].trim();
        s.parse::<f64>()
            .map_err(|_| format!("`{}` is not a number in column `{}`", s, header()[k]))
    };
    let month: Month = rec[1].parse().map_err(|e: Error| e.to_string())?;
    let exchange: Exchange = rec[4].parse().map_err(|e: Error| e.to_string())?;
    let mut features = Vec::with_capacity(FEATURE_COUNT);
    for k in KEY_COLUMNS.len()..rec.len() {
        features.push(if rec[k].trim().is_empty() {
            None
        } else {
            Some(num(k)?)
        });
    }
    Ok(PanelRow {
        asset_id: rec[0].trim().to_string(),
        month,
        excess_return: num(2)?,
        market_cap: num(3)?,
        exchange,
        features,
    })
}

pub fn write_panel(panel: &Panel, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_panel_to(panel, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Floats are written in shortest round-trip form, so a written panel
/// reloads bit-exactly.
pub fn write_panel_to<W: Write>(panel: &Panel, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{}", header().join(","))?;
    let mut line = String::new();
    for i in 0..panel.len() {
        use std::fmt::Write as _;
        line.clear();
        let _ = write!(
            line,
            "{},{},{},{},{}",
            csv_field(panel.asset_of(i)),
            panel.month_of(i),
            panel.excess_return(i),
            panel.market_cap(i),
            panel.exchange(i)
        );
        for v in panel.feature_row(i) {
            line.push(',');
            if !v.is_nan() {
                let _ = write!(line, "{v}");
            }
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn csv_field(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"")).into()
    } else {
        s.into()
    }
}
