//! Loss, L2 penalty, Adam, the training loop and rolling refits.

mod adam;
mod loss;
mod rolling;
mod train;

pub use adam::AdamState;
pub use loss::{l2_on_tape, l2_penalty, mse_loss, mse_on_tape, sse};
pub use rolling::{refit_seed, rolling_fit, RefitOutcome};
pub use train::{
    evaluate_mse, fit, predict_windows, EpochRecord, FitResult, TrainConfig, TrainLog,
    PREDICT_CHUNK,
};
