//! Decile long-short portfolios, turnover and annualized performance.

mod backtest;
mod holdings;
mod report;
mod stats;

pub use backtest::{backtest, BacktestResult, MonthlyPoint};
pub use holdings::{
    exclude_microcaps, form_portfolio, nyse_breakpoint, percentile, turnover, Candidate, Holdings,
    WeightMode, LEG_FRACTION, MICROCAP_PERCENTILE,
};
pub use report::{ReportTable, EVALUATION_ROWS};
pub use stats::{max_drawdown, perf_stats, PerfReport};
