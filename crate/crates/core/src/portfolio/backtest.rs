use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::holdings::{form_portfolio, turnover, Candidate, Holdings, WeightMode};
use super::stats::{perf_stats, PerfReport};
use crate::data::{Month, Panel};
use crate::error::{Error, Result};
use crate::eval::ForecastSet;

#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyPoint {
    /// Month in which the long-short return is realized.
    pub month: Month,
    pub long_short_return: f64,
    /// Turnover into this month's holdings; none for the first month.
    pub turnover: Option<f64>,
    pub n_long: usize,
    pub n_short: usize,
}

#[derive(Debug, Clone)]
pub struct BacktestResult {
    pub report: PerfReport,
    pub series: Vec<MonthlyPoint>,
    pub holdings: Vec<Holdings>,
}

impl BacktestResult {
    pub fn series_csv(&self) -> String {
        let mut out = String::from("month,return,turnover,n_long,n_short\n");
        for p in &self.series {
            let t = p
                .turnover
                .map_or_else(|| "NA".to_string(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.month, p.long_short_return, t, p.n_long, p.n_short
            );
        }
        out
    }
}

/// Monthly decile long-short backtest. Forecasts dated `M` are sorted at
/// formation month `M − 1`, using that month's market cap and exchange from
/// `panel`, and earn the realized returns of `M`.
pub fn backtest(
    forecasts: &ForecastSet,
    panel: &Panel,
    mode: WeightMode,
    microcap_filter: bool,
) -> Result<BacktestResult> {
    let mut by_month: BTreeMap<Month, Vec<usize>> = BTreeMap::new();
    for (i, f) in forecasts.records().iter().enumerate() {
        by_month.entry(f.month).or_default().push(i);
    }
    if by_month.len() < 2 {
        return Err(Error::Data(
            "a backtest needs forecasts for at least 2 months".into(),
        ));
    }
    let months: Vec<Month> = by_month.keys().copied().collect();
    if let Some(w) = months.windows(2).find(|w| w[1] != w[0].next()) {
        return Err(Error::Data(format!(
            "forecast months jump from {} to {}",
            w[0], w[1]
        )));
    }

    let records = forecasts.records();
    let mut series = Vec::with_capacity(months.len());
    let mut all_holdings: Vec<Holdings> = Vec::with_capacity(months.len());
    let mut prev_returns: BTreeMap<String, f64> = BTreeMap::new();
    for (month, idx) in &by_month {
        let formation = month.prev();
        let mut candidates = Vec::with_capacity(idx.len());
        let mut realized = BTreeMap::new();
        for &i in idx {
            let f = &records[i];
            let row = panel.find(&f.asset_id, formation).ok_or_else(|| {
                Error::Data(format!(
                    "no panel row for `{}` at formation month {formation}",
                    f.asset_id
                ))
            })?;
            candidates.push(Candidate {
                asset_id: f.asset_id.clone(),
                predicted: f.predicted,
                market_cap: panel.market_cap(row),
                exchange: panel.exchange(row),
            });
            realized.insert(f.asset_id.clone(), f.realized);
        }
        let holdings = form_portfolio(formation, &candidates, mode, microcap_filter)?;
        let ret = holdings.portfolio_return(&realized)?;
        let to = match all_holdings.last() {
            Some(prev) => Some(turnover(prev, &prev_returns, &holdings)?),
            None => None,
        };
        series.push(MonthlyPoint {
            month: *month,
            long_short_return: ret,
            turnover: to,
            n_long: holdings.n_long(),
            n_short: holdings.n_short(),
        });
        all_holdings.push(holdings);
        prev_returns = realized;
    }
    let returns: Vec<f64> = series.iter().map(|p| p.long_short_return).collect();
    let turnovers: Vec<f64> = series.iter().filter_map(|p| p.turnover).collect();
    Ok(BacktestResult {
        report: perf_stats(&returns, &turnovers)?,
        series,
        holdings: all_holdings,
    })
}
