//! C interface to the `deepseq` library.
//!
//! Every fallible call returns a [`DsStatus`]; on failure the message is
//! available from [`ds_last_error_message`] on the same thread until the next
//! failing call. Handles are opaque and must be released with their `_free`
//! function. No function unwinds across the boundary: panics are caught and
//! reported as [`DsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use deepseq::data::{gen_synthetic, load_panel, write_panel, Month, Panel, SynthSpec};
use deepseq::eval::{mse_oos, r2_oos, Forecast, ForecastSet};
use deepseq::models::{Checkpoint, Model, ParamSet, SequenceBatch};
use deepseq::portfolio::perf_stats;
use deepseq::{Error, ErrorClass};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    Config = 1,
    Data = 2,
    Numerical = 3,
    /// A required pointer argument was null or a string was not UTF-8.
    InvalidArgument = 4,
    Panic = 5,
}

/// A loaded or generated panel.
pub struct DsPanel {
    panel: Panel,
}

/// A model architecture with fitted parameters.
pub struct DsModel {
    model: Model,
    params: ParamSet,
}

/// Annualized long-short statistics. Undefined values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsPerfStats {
    pub annualized_return: f64,
    pub annualized_std: f64,
    pub sharpe: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub avg_turnover: f64,
    pub max_drawdown: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(DsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.class() {
            ErrorClass::Config => DsStatus::Config,
            ErrorClass::Data => DsStatus::Data,
            ErrorClass::Numerical => DsStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(DsStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            DsStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller promises a valid, writable pointer when non-null.
    unsafe { p.as_mut() }.ok_or_else(|| invalid(format!("{what} is null")))
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads a panel CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_panel_load(path: *const c_char, out: *mut *mut DsPanel) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = path_arg(path, "path")?;
        let panel = load_panel(&path)?;
        *out = Box::into_raw(Box::new(DsPanel { panel }));
        Ok(())
    })
}

/// Writes a panel CSV.
///
/// # Safety
/// `panel` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ds_panel_write(panel: *const DsPanel, path: *const c_char) -> DsStatus {
    guard(|| {
        let panel = panel.as_ref().ok_or_else(|| invalid("panel is null"))?;
        let path = path_arg(path, "path")?;
        write_panel(&panel.panel, &path)?;
        Ok(())
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `panel` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn ds_panel_rows(panel: *const DsPanel) -> usize {
    panel.as_ref().map_or(0, |p| p.panel.len())
}

/// Number of distinct assets, or 0 for a null handle.
///
/// # Safety
/// `panel` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn ds_panel_assets(panel: *const DsPanel) -> usize {
    panel.as_ref().map_or(0, |p| p.panel.num_assets())
}

/// # Safety
/// `panel` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ds_panel_free(panel: *mut DsPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// Generates a synthetic panel starting January 1970 and reports the
/// analytic out-of-sample R² ceiling of its return process.
///
/// # Safety
/// `out` and `ceiling` must be writable (`ceiling` may be null).
#[no_mangle]
pub unsafe extern "C" fn ds_synth_generate(
    n_assets: usize,
    n_months: usize,
    momentum_coeff: f64,
    reversal_coeff: f64,
    noise_std: f64,
    seed: u64,
    out: *mut *mut DsPanel,
    ceiling: *mut f64,
) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = SynthSpec {
            n_assets,
            n_months,
            momentum_coeff,
            reversal_coeff,
            noise_std,
            seed,
            start: Month::january(1970),
        };
        let (panel, oracle) = gen_synthetic(&spec)?;
        if let Some(c) = ceiling.as_mut() {
            *c = oracle.r2_ceiling;
        }
        *out = Box::into_raw(Box::new(DsPanel { panel }));
        Ok(())
    })
}

/// Restores a model and its parameters from a checkpoint file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_model_load(path: *const c_char, out: *mut *mut DsModel) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = path_arg(path, "path")?;
        let (model, params) = Checkpoint::load(&path)?.restore()?;
        *out = Box::into_raw(Box::new(DsModel { model, params }));
        Ok(())
    })
}

/// Expected sequence length and per-step feature count.
///
/// # Safety
/// `model` must come from this library; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_model_shape(
    model: *const DsModel,
    seq_len: *mut usize,
    input_dim: *mut usize,
) -> DsStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| invalid("model is null"))?;
        *out_arg(seq_len, "seq_len")? = m.model.spec().seq_len;
        *out_arg(input_dim, "input_dim")? = m.model.spec().input_dim;
        Ok(())
    })
}

/// Forecasts for `batch` sequences laid out `batch × seq_len × input_dim`,
/// oldest step first. Writes `batch` values to `out`.
///
/// # Safety
/// `inputs` must hold `batch · seq_len · input_dim` values and `out` room
/// for `batch`.
#[no_mangle]
pub unsafe extern "C" fn ds_model_predict(
    model: *const DsModel,
    inputs: *const f64,
    batch: usize,
    out: *mut f64,
) -> DsStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| invalid("model is null"))?;
        let (t, f) = (m.model.spec().seq_len, m.model.spec().input_dim);
        let xs = slice_arg(inputs, batch * t * f, "inputs")?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let b = SequenceBatch::new(batch, t, f, xs.to_vec(), vec![0.0; batch])?;
        let preds = m.model.predict(&m.params, &b)?;
        std::slice::from_raw_parts_mut(out, batch).copy_from_slice(&preds);
        Ok(())
    })
}

/// # Safety
/// `model` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ds_model_free(model: *mut DsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn forecast_set(
    realized: *const f64,
    predicted: *const f64,
    n: usize,
) -> Result<ForecastSet, Failure> {
    let r = slice_arg(realized, n, "realized")?;
    let p = slice_arg(predicted, n, "predicted")?;
    let month = Month::january(2000);
    let records = r
        .iter()
        .zip(p)
        .enumerate()
        .map(|(i, (r, p))| Forecast {
            asset_id: i.to_string(),
            month,
            realized: *r,
            predicted: *p,
        })
        .collect();
    Ok(ForecastSet::new(records)?)
}

/// Mean squared forecast error (as a fraction).
///
/// # Safety
/// Both arrays must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_metrics_mse(
    realized: *const f64,
    predicted: *const f64,
    n: usize,
    out: *mut f64,
) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = mse_oos(&forecast_set(realized, predicted, n)?)?;
        Ok(())
    })
}

/// Out-of-sample R² against a zero forecast (as a fraction).
///
/// # Safety
/// Both arrays must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_metrics_r2_oos(
    realized: *const f64,
    predicted: *const f64,
    n: usize,
    out: *mut f64,
) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = r2_oos(&forecast_set(realized, predicted, n)?)?;
        Ok(())
    })
}

/// Annualized statistics of monthly long-short returns. `turnovers` may be
/// null when `n_turnovers` is 0.
///
/// # Safety
/// Arrays must hold the stated number of values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_perf_stats(
    returns: *const f64,
    n_returns: usize,
    turnovers: *const f64,
    n_turnovers: usize,
    out: *mut DsPerfStats,
) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = slice_arg(returns, n_returns, "returns")?;
        let t = slice_arg(turnovers, n_turnovers, "turnovers")?;
        let rep = perf_stats(r, t)?;
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        *out = DsPerfStats {
            annualized_return: rep.annualized_return,
            annualized_std: rep.annualized_std,
            sharpe: nan(rep.sharpe),
            skewness: nan(rep.skewness),
            kurtosis: nan(rep.kurtosis),
            avg_turnover: nan(rep.avg_turnover),
            max_drawdown: rep.max_drawdown,
        };
        Ok(())
    })
}
