use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::data::{Exchange, Month};
use crate::error::{Error, Result};

/// Share of the cross-section in each leg.
pub const LEG_FRACTION: f64 = 0.1;
/// NYSE size percentile below which assets count as micro-caps.
pub const MICROCAP_PERCENTILE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightMode {
    Equal,
    Value,
}

impl WeightMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightMode::Equal => "equal",
            WeightMode::Value => "value",
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "equal" | "ew" => Ok(WeightMode::Equal),
            "value" | "vw" => Ok(WeightMode::Value),
            _ => Err(Error::Config(format!(
                "unknown weighting `{s}` (equal or value)"
            ))),
        }
    }
}

/// An asset eligible for the portfolio at formation.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub asset_id: String,
    pub predicted: f64,
    pub market_cap: f64,
    pub exchange: Exchange,
}

/// Signed weights at a formation month: longs sum to +1, shorts to −1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Holdings {
    pub month: Option<Month>,
    pub weights: BTreeMap<String, f64>,
}

impl Holdings {
    pub fn long_sum(&self) -> f64 {
        self.weights.values().filter(|w| **w > 0.0).sum()
    }

    pub fn short_sum(&self) -> f64 {
        self.weights.values().filter(|w| **w < 0.0).sum()
    }

    pub fn gross(&self) -> f64 {
        self.weights.values().map(|w| w.abs()).sum()
    }

    pub fn n_long(&self) -> usize {
        self.weights.values().filter(|w| **w > 0.0).count()
    }

    pub fn n_short(&self) -> usize {
        self.weights.values().filter(|w| **w < 0.0).count()
    }

    /// `Σ w_i r_i` over held assets; every held asset needs a return.
    pub fn portfolio_return(&self, returns: &BTreeMap<String, f64>) -> Result<f64> {
        self.weights
            .iter()
            .map(|(a, w)| {
                returns
                    .get(a)
                    .map(|r| w * r)
                    .ok_or_else(|| Error::Data(format!("no realized return for held asset `{a}`")))
            })
            .sum()
    }
}

/// Percentile with linear interpolation between order statistics
/// (`h = (n − 1)·p`).
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    Some(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

/// The 20th percentile of NYSE market caps among `candidates`, if any are
/// NYSE-listed.
pub fn nyse_breakpoint(candidates: &[Candidate]) -> Option<f64> {
    let caps: Vec<f64> = candidates
        .iter()
        .filter(|c| c.exchange == Exchange::Nyse)
        .map(|c| c.market_cap)
        .collect();
    percentile(&caps, MICROCAP_PERCENTILE)
}

/// Drops assets whose cap is below the NYSE breakpoint. Without NYSE assets
/// there is no breakpoint and nothing is dropped.
pub fn exclude_microcaps(candidates: &[Candidate]) -> Vec<Candidate> {
    match nyse_breakpoint(candidates) {
        Some(bp) => candidates
            .iter()
            .filter(|c| c.market_cap >= bp)
            .cloned()
            .collect(),
        None => candidates.to_vec(),
    }
}

/// Long the top decile of forecasts, short the bottom decile. Sorting is by
/// `(predicted, asset_id)` so ties resolve deterministically; each leg holds
/// `⌊n/10⌋` assets.
pub fn form_portfolio(
    month: Month,
    candidates: &[Candidate],
    mode: WeightMode,
    microcap_filter: bool,
) -> Result<Holdings> {
    for c in candidates {
        if !c.predicted.is_finite() || !(c.market_cap.is_finite() && c.market_cap > 0.0) {
            return Err(Error::Data(format!(
                "candidate `{}` in {month} has a non-finite forecast or non-positive cap",
                c.asset_id
            )));
        }
    }
    let pool = if microcap_filter {
        exclude_microcaps(candidates)
    } else {
        candidates.to_vec()
    };
    let n = pool.len();
    let k = (n as f64 * LEG_FRACTION).floor() as usize;
    if k == 0 {
        return Err(Error::Data(format!(
            "{month}: {n} eligible assets, at least 10 are needed for decile portfolios"
        )));
    }
    let mut sorted: Vec<&Candidate> = pool.iter().collect();
    sorted.sort_by(|a, b| {
        a.predicted
            .total_cmp(&b.predicted)
            .then_with(|| a.asset_id.cmp(&b.asset_id))
    });
    let shorts = &sorted[..k];
    let longs = &sorted[n - k..];
    let mut weights = BTreeMap::new();
    for (leg, sign) in [(longs, 1.0), (shorts, -1.0)] {
        let total: f64 = match mode {
            WeightMode::Equal => k as f64,
            WeightMode::Value => leg.iter().map(|c| c.market_cap).sum(),
        };
        for c in leg {
            let raw = match mode {
                WeightMode::Equal => 1.0,
                WeightMode::Value => c.market_cap,
            };
            weights.insert(c.asset_id.clone(), sign * raw / total);
        }
    }
    Ok(Holdings {
        month: Some(month),
        weights,
    })
}

/// `¼ Σ_i |w_prev,i (1 + r_i) − w_next,i|` over the union of both holdings.
/// `prev_returns` must cover every previously held asset.
pub fn turnover(
    prev: &Holdings,
    prev_returns: &BTreeMap<String, f64>,
    next: &Holdings,
) -> Result<f64> {
    let mut total = 0.0;
    for (a, w) in &prev.weights {
        let r = prev_returns
            .get(a)
            .ok_or_else(|| Error::Data(format!("no return for previously held asset `{a}`")))?;
        let drifted = w * (1.0 + r);
        let now = next.weights.get(a).copied().unwrap_or(0.0);
        total += (drifted - now).abs();
    }
    for (a, w) in &next.weights {
        if !prev.weights.contains_key(a) {
            total += w.abs();
        }
    }
    Ok(total / 4.0)
}
