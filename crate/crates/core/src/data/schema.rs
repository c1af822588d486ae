use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const FEATURE_COUNT: usize = 51;

/// Months of lagged features per sample.
pub const LOOKBACK: usize = 12;

/// Firm characteristics, in column order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "A2ME",
    "OA",
    "AOA",
    "AT",
    "BEME",
    "Beta_daily",
    "C",
    "C2D",
    "CTO",
    "Dept2P",
    "Δceq",
    "Δ(ΔGM – ΔSales)",
    "ΔSo",
    "Δshrout",
    "ΔPI2A",
    "E2P",
    "EPS",
    "Free CF",
    "Idol_vol",
    "Investment",
    "IPM",
    "IVC",
    "Lev",
    "LDP",
    "MC",
    "Turnover",
    "NOA",
    "NOP",
    "O2P",
    "OL",
    "PCM",
    "PM",
    "Prof",
    "Q",
    "Ret",
    "Ret_max",
    "RNA",
    "ROA",
    "ROC",
    "ROE",
    "ROIC",
    "S2C",
    "Sale_g",
    "SAT",
    "S2P",
    "SGA2S",
    "Spread",
    "Std_turnover",
    "Std_vol",
    "Tan",
    "Total_vol",
];

/// Leading panel columns before the features.
pub const KEY_COLUMNS: [&str; 5] = [
    "asset_id",
    "month",
    "excess_return",
    "market_cap",
    "exchange",
];

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Exchange {
    Nyse,
    Amex,
    Nasdaq,
}

impl Exchange {
    pub fn as_str(self) -> &'static str {
        match self {
            Exchange::Nyse => "NYSE",
            Exchange::Amex => "AMEX",
            Exchange::Nasdaq => "NASDAQ",
        }
    }
}

impl fmt::Display for Exchange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Exchange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NYSE" => Ok(Exchange::Nyse),
            "AMEX" => Ok(Exchange::Amex),
            "NASDAQ" => Ok(Exchange::Nasdaq),
            _ => Err(Error::Data(format!("unknown exchange `{s}`"))),
        }
    }
}
