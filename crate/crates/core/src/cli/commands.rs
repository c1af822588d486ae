use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::manifest::{sha256_file, sha256_hex, FitRecord, Manifest, MANIFEST_FORMAT};
use crate::data::{
    gen_synthetic, load_panel, normalize_features, test_windows, write_panel, Panel, Schedule,
    ScheduleEntry,
};
use crate::error::{Error, Result, ResultExt};
use crate::eval::{mse_oos, r2_oos, Forecast, ForecastSet};
use crate::models::{Checkpoint, Model, ModelKind};
use crate::optim::{predict_windows, refit_seed, rolling_fit};
use crate::portfolio::{backtest, ReportTable, WeightMode};

/// `(file suffix, drop microcaps)` for the two backtest universes.
pub const UNIVERSES: [(&str, bool); 2] = [("all", false), ("exmicro", true)];

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn checkpoint_rel(kind: ModelKind, year: i32) -> String {
    format!("checkpoints/{}/{year}.json", kind.label())
}

pub fn log_rel(kind: ModelKind, year: i32) -> String {
    format!("logs/{}_{year}.csv", kind.label())
}

pub fn forecast_path(cfg: &ExperimentConfig, kind: ModelKind) -> PathBuf {
    cfg.output_dir
        .join(format!("forecasts/{}.csv", kind.label()))
}

pub fn backtest_table_path(cfg: &ExperimentConfig, mode: WeightMode, universe: &str) -> PathBuf {
    cfg.output_dir
        .join(format!("tables/backtest_{mode}_{universe}.csv"))
}

fn load_raw_panel(cfg: &ExperimentConfig) -> Result<Panel> {
    let path = cfg.panel_path();
    if !path.exists() {
        return Err(Error::Data(format!(
            "panel {} does not exist; set data.panel or run `deepseq synth` first",
            path.display()
        )));
    }
    load_panel(&path)
}

fn schedule_for(cfg: &ExperimentConfig, panel: &Panel) -> Result<Schedule> {
    Schedule::for_panel(panel, cfg.initial_train_years, cfg.refit_every)
}

/// The refit year whose parameters forecast each schedule entry.
fn refit_years(schedule: &Schedule) -> Vec<(ScheduleEntry, i32)> {
    let mut current = None;
    schedule
        .entries()
        .iter()
        .map(|e| {
            if e.refit || current.is_none() {
                current = Some(e.test_year);
            }
            (*e, current.unwrap_or(e.test_year))
        })
        .collect()
}

fn warn_if_no_models(cfg: &ExperimentConfig, what: &str) -> bool {
    if cfg.models.is_empty() {
        log::warn!("no models configured; nothing to {what}");
        true
    } else {
        false
    }
}

/// Generates the synthetic panel and its oracle sidecar. Returns the panel path.
pub fn synth(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let (panel, oracle) = gen_synthetic(&cfg.synth)?;
    let path = cfg.panel_path();
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_panel(&panel, &path)?;
    write_file(&path.with_extension("oracle"), oracle.to_text().as_bytes())?;
    log::info!(
        "wrote {} rows to {} (R² ceiling {:.4}%)",
        panel.len(),
        path.display(),
        oracle.r2_ceiling * 100.0
    );
    Ok(path)
}

/// Rolling fits for every configured model; writes checkpoints, logs and
/// the manifest.
pub fn train(cfg: &ExperimentConfig) -> Result<Option<Manifest>> {
    if warn_if_no_models(cfg, "train") {
        return Ok(None);
    }
    let panel_path = cfg.panel_path();
    let raw = load_raw_panel(cfg)?;
    let panel = normalize_features(&raw)?;
    let schedule = schedule_for(cfg, &panel)?;
    let hash = cfg.hash();
    let out = &cfg.output_dir;
    let mut fits = Vec::new();
    for &kind in &cfg.models {
        let spec = cfg.model_spec(kind);
        let model = Model::new(spec.clone())?;
        log::info!("training {kind} ({} parameters)", model.parameter_count());
        rolling_fit(&model, &panel, &schedule, &cfg.train, |o| {
            let year = o.entry.test_year;
            let ckpt = checkpoint_rel(kind, year);
            let json = Checkpoint::new(spec.clone(), hash.clone(), &o.params).to_json();
            write_file(&out.join(&ckpt), json.as_bytes())?;
            let log_path = log_rel(kind, year);
            write_file(&out.join(&log_path), o.log.to_csv().as_bytes())?;
            fits.push(FitRecord {
                model: kind.label().to_string(),
                test_year: year,
                train_end: o.entry.train_end.to_string(),
                refit_seed: refit_seed(cfg.train.seed, year),
                checkpoint: ckpt,
                checkpoint_sha256: sha256_hex(json.as_bytes()),
                log: log_path,
                train_windows: o.train_windows,
                valid_windows: o.valid_windows,
                best_epoch: o.log.best_epoch,
            });
            Ok(())
        })?;
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: hash,
        seed: cfg.seed,
        panel_sha256: sha256_file(&panel_path)?,
        config: cfg
            .values()
            .iter()
            .filter(|(k, _)| k.as_str() != "output.dir")
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
        fits,
    };
    write_file(&out.join("manifest.json"), manifest.to_json().as_bytes())?;
    Ok(Some(manifest))
}

/// Out-of-sample forecasts of one model over every test year.
pub fn forecast_model(
    cfg: &ExperimentConfig,
    panel: &Panel,
    schedule: &Schedule,
    kind: ModelKind,
) -> Result<ForecastSet> {
    let mut all = ForecastSet::default();
    let mut loaded: Option<(i32, Model, crate::models::ParamSet)> = None;
    for (entry, refit_year) in refit_years(schedule) {
        if loaded.as_ref().map(|l| l.0) != Some(refit_year) {
            let path = cfg.output_dir.join(checkpoint_rel(kind, refit_year));
            if !path.exists() {
                return Err(Error::Data(format!(
                    "missing checkpoint for {kind} {refit_year} at {}; run `deepseq train`",
                    path.display()
                )));
            }
            let ckpt = Checkpoint::load(&path)?;
            if ckpt.config_hash != cfg.hash() {
                log::warn!("{} was trained under a different config", path.display());
            }
            let (model, params) = ckpt.restore()?;
            loaded = Some((refit_year, model, params));
        }
        let (_, model, params) = loaded.as_ref().expect("checkpoint loaded above");
        let windows = test_windows(panel, entry.test_year, model.spec().seq_len)?;
        let preds = predict_windows(model, params, &windows)
            .context(|| format!("{kind} {}", entry.test_year))?;
        let records = windows
            .keys()
            .iter()
            .zip(windows.targets())
            .zip(preds)
            .map(|((k, &realized), predicted)| Forecast {
                asset_id: k.asset_id.clone(),
                month: k.target_month(),
                realized,
                predicted,
            })
            .collect();
        all.extend(ForecastSet::new(records)?)?;
    }
    Ok(all)
}

fn evaluation_table(results: &[(String, f64, f64)]) -> ReportTable {
    ReportTable::evaluation("Out-of-sample accuracy", results)
}

/// Writes forecasts per model and the accuracy table.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Option<ReportTable>> {
    if warn_if_no_models(cfg, "evaluate") {
        return Ok(None);
    }
    let mut results = Vec::new();
    let ctx = if cfg.reuse_forecasts {
        None
    } else {
        let panel = normalize_features(&load_raw_panel(cfg)?)?;
        let schedule = schedule_for(cfg, &panel)?;
        Some((panel, schedule))
    };
    for &kind in &cfg.models {
        let path = forecast_path(cfg, kind);
        let set = match &ctx {
            None => ForecastSet::read_csv(&path)?,
            Some((panel, schedule)) => {
                let set = forecast_model(cfg, panel, schedule, kind)?;
                set.write_csv(&path)?;
                set
            }
        };
        let mse = mse_oos(&set)?;
        let r2 = r2_oos(&set).context(|| kind.to_string())?;
        log::info!("{kind}: MSE {:.6}%  R²_oos {:.4}%", mse * 100.0, r2 * 100.0);
        results.push((kind.label().to_string(), mse, r2));
    }
    let table = evaluation_table(&results);
    write_file(
        &cfg.output_dir.join("tables/evaluate.csv"),
        table.to_csv().as_bytes(),
    )?;
    Ok(Some(table))
}

fn backtest_title(mode: WeightMode, exclude_micro: bool) -> String {
    format!(
        "Long-short {}-weighted, {}",
        mode,
        if exclude_micro {
            "excluding microcaps"
        } else {
            "all stocks"
        }
    )
}

/// One table per weighting and universe, plus monthly series per model.
pub fn run_backtests(cfg: &ExperimentConfig) -> Result<Vec<ReportTable>> {
    if warn_if_no_models(cfg, "backtest") {
        return Ok(Vec::new());
    }
    let panel = load_raw_panel(cfg)?;
    let mut forecasts = BTreeMap::new();
    for &kind in &cfg.models {
        let path = forecast_path(cfg, kind);
        if !path.exists() {
            return Err(Error::Data(format!(
                "missing forecasts for {kind} at {}; run `deepseq evaluate`",
                path.display()
            )));
        }
        forecasts.insert(kind, ForecastSet::read_csv(&path)?);
    }
    let mut tables = Vec::new();
    for &mode in &cfg.portfolio_modes {
        for (universe, exclude) in UNIVERSES {
            let mut reports = Vec::new();
            for &kind in &cfg.models {
                let result = backtest(&forecasts[&kind], &panel, mode, exclude)
                    .context(|| format!("{kind} {mode} {universe}"))?;
                write_file(
                    &cfg.output_dir
                        .join(format!("series/{}_{mode}_{universe}.csv", kind.label())),
                    result.series_csv().as_bytes(),
                )?;
                reports.push((kind.label().to_string(), result.report));
            }
            let table = ReportTable::backtest(backtest_title(mode, exclude), &reports);
            write_file(
                &backtest_table_path(cfg, mode, universe),
                table.to_csv().as_bytes(),
            )?;
            tables.push(table);
        }
    }
    Ok(tables)
}

/// Renders every table already on disk into `report.txt`.
pub fn report(cfg: &ExperimentConfig) -> Result<String> {
    let mut out = String::new();
    let eval_path = cfg.output_dir.join("tables/evaluate.csv");
    let mut tables = Vec::new();
    if eval_path.exists() {
        let text = read_file(&eval_path)?;
        tables.push(ReportTable::from_csv(
            "Out-of-sample accuracy",
            &text,
            &eval_path.display().to_string(),
        )?);
    }
    for &mode in &cfg.portfolio_modes {
        for (universe, exclude) in UNIVERSES {
            let path = backtest_table_path(cfg, mode, universe);
            if path.exists() {
                let text = read_file(&path)?;
                tables.push(ReportTable::from_csv(
                    backtest_title(mode, exclude),
                    &text,
                    &path.display().to_string(),
                )?);
            }
        }
    }
    if tables.is_empty() {
        return Err(Error::Data(format!(
            "no tables under {}; run `deepseq evaluate` and `deepseq backtest` first",
            cfg.output_dir.join("tables").display()
        )));
    }
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(out, "{}", t.to_text());
    }
    write_file(&cfg.output_dir.join("report.txt"), out.as_bytes())?;
    Ok(out)
}
