//! Pipeline stages behind the `deepseq` binary.
//!
//! Every stage reads the same flat config and works inside `output.dir`:
//! `synth` writes the panel, `train` the checkpoints, `evaluate` the
//! forecasts, `backtest` the portfolio tables and `report` the text summary.

mod commands;
mod config;
mod manifest;

pub use commands::{
    backtest_table_path, checkpoint_rel, evaluate, forecast_model, forecast_path, log_rel, report,
    run_backtests, synth, train, write_file, UNIVERSES,
};
pub use config::{parse_kv, parse_overrides, ExperimentConfig, DEFAULTS};
pub use manifest::{sha256_file, sha256_hex, FitRecord, Manifest, MANIFEST_FORMAT};
