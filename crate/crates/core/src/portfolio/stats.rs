use crate::error::{Error, Result};

/// Annualized long-short statistics, percentages as percent values.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfReport {
    pub annualized_return: f64,
    pub annualized_std: f64,
    /// Undefined for a constant series.
    pub sharpe: Option<f64>,
    pub skewness: Option<f64>,
    /// Non-excess (a normal sample gives about 3).
    pub kurtosis: Option<f64>,
    /// Mean monthly turnover; undefined with a single holdings month.
    pub avg_turnover: Option<f64>,
    pub max_drawdown: f64,
}

impl PerfReport {
    pub const ROW_LABELS: [&'static str; 7] = [
        "Return (%)",
        "Std.Dev(%)",
        "Sharpe",
        "Skewness",
        "Kurtosis",
        "Turnover(%)",
        "MDD(%)",
    ];

    /// Values in [`PerfReport::ROW_LABELS`] order.
    pub fn values(&self) -> [Option<f64>; 7] {
        [
            Some(self.annualized_return),
            Some(self.annualized_std),
            self.sharpe,
            self.skewness,
            self.kurtosis,
            self.avg_turnover,
            Some(self.max_drawdown),
        ]
    }
}

/// Mean and population central moments 2..4.
fn moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    if x.iter().all(|v| *v == x[0]) {
        // the summed mean can be off by an ulp, which would fake dispersion
        return (x[0], 0.0, 0.0, 0.0);
    }
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

/// Largest peak-to-trough loss of the compounded wealth path starting at 1,
/// as a positive fraction.
pub fn max_drawdown(returns: &[f64]) -> f64 {
    let (mut wealth, mut peak, mut worst) = (1.0f64, 1.0f64, 0.0f64);
    for r in returns {
        wealth *= 1.0 + r;
        peak = peak.max(wealth);
        worst = worst.max(1.0 - wealth / peak);
    }
    worst
}

/// `returns` are monthly decimal long-short returns; `turnovers` are the
/// monthly turnover fractions between consecutive holdings.
pub fn perf_stats(returns: &[f64], turnovers: &[f64]) -> Result<PerfReport> {
    if returns.len() < 2 {
        return Err(Error::Invalid(format!(
            "performance statistics need at least 2 months, got {}",
            returns.len()
        )));
    }
    if returns.iter().chain(turnovers).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("portfolio return series".into()));
    }
    let n = returns.len() as f64;
    let (mean, m2, m3, m4) = moments(returns);
    let sample_sd = (m2 * n / (n - 1.0)).sqrt();
    let annualized_return = 12.0 * mean * 100.0;
    let annualized_std = 12f64.sqrt() * sample_sd * 100.0;
    let defined = m2 > 0.0;
    Ok(PerfReport {
        annualized_return,
        annualized_std,
        sharpe: (annualized_std > 0.0).then(|| annualized_return / annualized_std),
        skewness: defined.then(|| m3 / m2.powf(1.5)),
        kurtosis: defined.then(|| m4 / (m2 * m2)),
        avg_turnover: (!turnovers.is_empty())
            .then(|| turnovers.iter().sum::<f64>() / turnovers.len() as f64 * 100.0),
        max_drawdown: max_drawdown(returns) * 100.0,
    })
}
