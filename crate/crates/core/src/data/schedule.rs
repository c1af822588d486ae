use super::month::Month;
use super::panel::Panel;
use super::windows::{build_windows_between, WindowSet};
use crate::error::{Error, Result};

/// One test year and the parameter set that forecasts it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub test_year: i32,
    /// Last target month the parameters may have been trained on.
    pub train_end: Month,
    /// Whether parameters are (re)fitted before this year, or carried over.
    pub refit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    entries: Vec<ScheduleEntry>,
}

impl Schedule {
    /// Years `first_year … last_year` inclusive: the first
    /// `initial_train_years` train only, every following year is tested, and
    /// parameters are refitted every `refit_every` test years.
    pub fn new(
        first_year: i32,
        last_year: i32,
        initial_train_years: usize,
        refit_every: usize,
    ) -> Result<Self> {
        if initial_train_years == 0 || refit_every == 0 {
            return Err(Error::Config(
                "initial_train_years and refit_every must be positive".into(),
            ));
        }
        let span = (last_year - first_year + 1).max(0) as usize;
        if span < initial_train_years + 1 {
            return Err(Error::Config(format!(
                "{span} years of data cannot cover {initial_train_years} training years plus a test year"
            )));
        }
        let first_test = first_year + initial_train_years as i32;
        let mut entries = Vec::new();
        let mut train_end = Month::december(first_test - 1);
        for (k, year) in (first_test..=last_year).enumerate() {
            let refit = k % refit_every == 0;
            if refit {
                train_end = Month::december(year - 1);
            }
            entries.push(ScheduleEntry {
                test_year: year,
                train_end,
                refit,
            });
        }
        Ok(Schedule { entries })
    }

    pub fn for_panel(
        panel: &Panel,
        initial_train_years: usize,
        refit_every: usize,
    ) -> Result<Self> {
        let (first, last) = panel
            .first_month()
            .zip(panel.last_month())
            .ok_or_else(|| Error::Data("empty panel has no schedule".into()))?;
        Schedule::new(first.year(), last.year(), initial_train_years, refit_every)
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn refits(&self) -> impl Iterator<Item = &ScheduleEntry> {
        self.entries.iter().filter(|e| e.refit)
    }

    pub fn test_years(&self) -> Vec<i32> {
        self.entries.iter().map(|e| e.test_year).collect()
    }

    /// Fails if the panel does not reach into every scheduled test year.
    pub fn check_covers(&self, panel: &Panel) -> Result<()> {
        let (Some(first), Some(last)) = (panel.first_month(), panel.last_month()) else {
            return Err(Error::Data("empty panel".into()));
        };
        for e in &self.entries {
            if e.test_year > last.year() || e.train_end < first {
                return Err(Error::Config(format!(
                    "schedule year {} lies outside the panel ({first} to {last})",
                    e.test_year
                )));
            }
        }
        Ok(())
    }
}

/// Training windows certified to use no target after `boundary`.
#[derive(Debug, Clone)]
pub struct TrainingSlice {
    boundary: Month,
    windows: WindowSet,
}

impl TrainingSlice {
    /// The leakage guard: rejects any window whose target month (and hence
    /// any of its feature months) is later than `boundary`.
    pub fn new(windows: WindowSet, boundary: Month) -> Result<Self> {
        if let Some(k) = windows.keys().iter().find(|k| k.target_month() > boundary) {
            return Err(Error::Leakage(format!(
                "window for `{}` targets {} beyond the training boundary {boundary}",
                k.asset_id,
                k.target_month()
            )));
        }
        Ok(TrainingSlice { boundary, windows })
    }

    /// All windows of `panel` with targets up to `boundary`.
    pub fn from_panel(panel: &Panel, boundary: Month, seq_len: usize) -> Result<Self> {
        let windows = build_windows_between(panel, Month::from_index(0), boundary, seq_len)?;
        TrainingSlice::new(windows, boundary)
    }

    pub fn boundary(&self) -> Month {
        self.boundary
    }

    pub fn windows(&self) -> &WindowSet {
        &self.windows
    }

    /// Splits off the last `fraction` of target months (at least one month
    /// when there are two or more) as a validation set.
    pub fn split_validation(&self, fraction: f64) -> (WindowSet, WindowSet) {
        let months = self.windows.target_months();
        let n_valid = if months.len() < 2 || fraction <= 0.0 {
            0
        } else {
            ((months.len() as f64 * fraction).ceil() as usize).clamp(1, months.len() - 1)
        };
        if n_valid == 0 {
            return (
                self.windows.clone(),
                WindowSet::empty(self.windows.seq_len()),
            );
        }
        let cut = months[months.len() - n_valid];
        let train = self.windows.select(|k| k.target_month() < cut);
        let valid = self.windows.select(|k| k.target_month() >= cut);
        (train, valid)
    }
}

/// Windows whose target month falls in `year`.
pub fn test_windows(panel: &Panel, year: i32, seq_len: usize) -> Result<WindowSet> {
    build_windows_between(panel, Month::january(year), Month::december(year), seq_len)
}
