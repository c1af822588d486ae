//! Reverse-mode differentiation over [`Matrix`](crate::tensor::Matrix)
//! operations. Unrolling a recurrence on the tape and sweeping it backward is
//! back-propagation through time: a weight shared by T steps collects the sum
//! of its T per-step contributions.

mod gradcheck;
mod tape;

pub use gradcheck::{evaluate, grad_check, relative_error, EntryCheck, GradCheckReport, Objective};
pub use tape::{Bound, GradientSet, Tape, Var};
