use super::train::{fit, TrainConfig, TrainLog};
use crate::data::{Panel, Schedule, ScheduleEntry, TrainingSlice};
use crate::error::{Result, ResultExt};
use crate::models::{Model, ParamSet};

#[derive(Debug, Clone)]
pub struct RefitOutcome {
    pub entry: ScheduleEntry,
    pub params: ParamSet,
    pub log: TrainLog,
    pub train_windows: usize,
    pub valid_windows: usize,
}

/// Fits one parameter set per refit point of `schedule`, each on windows
/// whose targets end no later than the refit's boundary. Later refits start
/// from the previous parameters when `warm_start` is set. `on_refit` sees
/// every outcome as soon as it is ready.
pub fn rolling_fit(
    model: &Model,
    panel: &Panel,
    schedule: &Schedule,
    config: &TrainConfig,
    mut on_refit: impl FnMut(&RefitOutcome) -> Result<()>,
) -> Result<Vec<RefitOutcome>> {
    config.validate()?;
    schedule.check_covers(panel)?;
    let seq_len = model.spec().seq_len;
    let mut outcomes: Vec<RefitOutcome> = Vec::new();
    for entry in schedule.refits() {
        let year = entry.test_year;
        let slice = TrainingSlice::from_panel(panel, entry.train_end, seq_len)
            .context(|| format!("{} {year}", model.kind()))?;
        let (train, valid) = slice.split_validation(config.validation_fraction);
        let init = match outcomes.last() {
            Some(prev) if config.warm_start => prev.params.clone(),
            _ => model.init_params(config.seed),
        };
        let cfg = TrainConfig {
            seed: refit_seed(config.seed, year),
            ..config.clone()
        };
        let result = fit(model, init, &train, &valid, &cfg)
            .context(|| format!("{} {year}", model.kind()))?;
        log::info!(
            "{} {year}: {} train / {} valid windows, best epoch {}",
            model.kind(),
            train.len(),
            valid.len(),
            result.log.best_epoch
        );
        let outcome = RefitOutcome {
            entry: *entry,
            params: result.params,
            log: result.log,
            train_windows: train.len(),
            valid_windows: valid.len(),
        };
        on_refit(&outcome)?;
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

/// Shuffling and dropout stream for the refit before `year`.
pub fn refit_seed(seed: u64, year: i32) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ year as u64
}
