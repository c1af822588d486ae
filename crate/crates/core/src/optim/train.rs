use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::AdamState;
use super::loss::{l2_on_tape, mse_on_tape, sse};
use crate::autograd::Tape;
use crate::data::WindowSet;
use crate::error::{Error, ErrorClass, Result};
use crate::models::{Mode, Model, ParamSet};

/// Rows per forward pass when only forecasts are needed.
pub const PREDICT_CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub dropout: f64,
    pub l2: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping; 0 disables
    /// early stopping.
    pub patience: usize,
    /// Global gradient-norm ceiling; `None` disables clipping.
    pub clip_norm: Option<f64>,
    /// Share of the latest training months held out for validation.
    pub validation_fraction: f64,
    /// Continue from the previous refit's parameters instead of a fresh
    /// initialization.
    pub warm_start: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            dropout: 0.2,
            l2: 0.0005,
            batch_size: 2048,
            max_epochs: 100,
            patience: 5,
            clip_norm: Some(5.0),
            validation_fraction: 0.1,
            warm_start: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad(format!(
                "learning_rate must be ≥ 0, got {}",
                self.learning_rate
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad(format!("l2 must be ≥ 0, got {}", self.l2));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if let Some(c) = self.clip_norm {
            if !(c.is_finite() && c > 0.0) {
                return bad(format!("clip_norm must be positive, got {c}"));
            }
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!(
                "validation_fraction must lie in [0, 1), got {}",
                self.validation_fraction
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean squared error over the epoch's training batches (dropout on,
    /// penalty excluded).
    pub train_loss: f64,
    /// Mean squared error on the validation windows, if any.
    pub valid_loss: Option<f64>,
    pub wall_seconds: f64,
    /// Mean pre-clipping global gradient norm over the epoch.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept (0 = the initial parameters).
    pub best_epoch: usize,
}

impl TrainLog {
    pub const HEADER: &'static str = "epoch,train_loss,valid_loss,wall_seconds,grad_norm";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.epochs {
            let valid = r
                .valid_loss
                .map_or_else(|| "NA".to_string(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{:.3},{}",
                r.epoch, r.train_loss, valid, r.wall_seconds, r.grad_norm
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: ParamSet,
    pub log: TrainLog,
}

/// Eval-mode forecasts for every window, in window order.
pub fn predict_windows(model: &Model, params: &ParamSet, windows: &WindowSet) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(windows.len());
    let idx: Vec<usize> = (0..windows.len()).collect();
    for chunk in idx.chunks(PREDICT_CHUNK) {
        let batch = windows.batch(chunk)?;
        out.extend(model.predict(params, &batch)?);
    }
    Ok(out)
}

/// Mean squared forecast error over `windows`.
pub fn evaluate_mse(model: &Model, params: &ParamSet, windows: &WindowSet) -> Result<f64> {
    let preds = predict_windows(model, params, windows)?;
    Ok(sse(&preds, windows.targets())? / windows.len() as f64)
}

/// Mini-batch Adam on mean squared error plus the L2 penalty, with early
/// stopping on validation loss (training loss when `valid` is empty).
/// Returns the parameters of the best epoch.
pub fn fit(
    model: &Model,
    init: ParamSet,
    train: &WindowSet,
    valid: &WindowSet,
    config: &TrainConfig,
) -> Result<FitResult> {
    config.validate()?;
    model.check_params(&init)?;
    if train.is_empty() {
        return Err(Error::Data("no training windows".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = init;
    let mut adam = AdamState::new(&params);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best = params.clone();
    let mut best_loss = f64::INFINITY;
    let mut log = TrainLog::default();
    let mut stale = 0;

    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        let diverged = |reason: String, best: &ParamSet| Error::Diverged {
            epoch,
            reason,
            last_good: Box::new(best.clone()),
        };
        order.shuffle(&mut rng);
        let (mut sq_sum, mut norm_sum, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let step = (|| -> Result<(f64, f64)> {
                let batch = train.batch(chunk)?;
                let mut tape = Tape::new();
                let bound = tape.bind(&params)?;
                let mode = if config.dropout > 0.0 {
                    Mode::Train {
                        dropout: config.dropout,
                        rng: &mut rng,
                    }
                } else {
                    Mode::Eval
                };
                let out = model.forward(&mut tape, &bound, &batch, mode)?;
                let data_loss = mse_on_tape(&mut tape, out.forecast, batch.target_column())?;
                let loss = match l2_on_tape(&mut tape, &bound, config.l2)? {
                    Some(pen) => tape.add(data_loss, pen)?,
                    None => data_loss,
                };
                let mse = tape.value(data_loss).get(0, 0);
                let mut grads = tape.backward(loss)?;
                let norm = match config.clip_norm {
                    Some(c) => grads.clip_global_norm(c),
                    None => grads.global_norm(),
                };
                adam.step(&mut params, &grads, config.learning_rate)?;
                Ok((mse, norm))
            })();
            match step {
                Ok((mse, norm)) => {
                    sq_sum += mse * chunk.len() as f64;
                    norm_sum += norm;
                    batches += 1;
                }
                Err(e) if e.class() == ErrorClass::Numerical => {
                    return Err(diverged(e.to_string(), &best));
                }
                Err(e) => return Err(e),
            }
        }
        let train_loss = sq_sum / train.len() as f64;
        let valid_loss = if valid.is_empty() {
            None
        } else {
            match evaluate_mse(model, &params, valid) {
                Ok(v) => Some(v),
                Err(e) if e.class() == ErrorClass::Numerical => {
                    return Err(diverged(e.to_string(), &best));
                }
                Err(e) => return Err(e),
            }
        };
        let monitored = valid_loss.unwrap_or(train_loss);
        if !monitored.is_finite() {
            return Err(diverged(format!("loss became {monitored}"), &best));
        }
        log.epochs.push(EpochRecord {
            epoch,
            train_loss,
            valid_loss,
            wall_seconds: started.elapsed().as_secs_f64(),
            grad_norm: norm_sum / batches.max(1) as f64,
        });
        log::debug!(
            "{} epoch {epoch}: train {train_loss:.6e} valid {:?}",
            model.kind(),
            valid_loss
        );
        if monitored < best_loss {
            best_loss = monitored;
            best = params.clone();
            log.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if config.patience > 0 && stale >= config.patience {
                break;
            }
        }
    }
    if config.max_epochs == 0 {
        best = params;
    }
    Ok(FitResult { params: best, log })
}
