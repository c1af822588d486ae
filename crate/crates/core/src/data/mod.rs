//! Panel ingestion, normalization, sample windows, schedules and the
//! synthetic generator.

mod month;
mod normalize;
mod panel;
mod schedule;
mod schema;
pub mod synth;
mod windows;

pub use month::Month;
pub use normalize::{normalize_features, rank_to_unit};
pub use panel::{header, load_panel, read_panel, write_panel, write_panel_to, Panel, PanelRow};
pub use schedule::{test_windows, Schedule, ScheduleEntry, TrainingSlice};
pub use schema::{feature_index, Exchange, FEATURE_COUNT, FEATURE_NAMES, KEY_COLUMNS, LOOKBACK};
pub use synth::{gen_synthetic, SynthOracle, SynthSpec};
pub use windows::{build_windows, build_windows_between, SampleWindow, WindowKey, WindowSet};
