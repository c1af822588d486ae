pub mod autograd;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod models;
pub mod optim;
pub mod portfolio;
pub mod tensor;

pub use error::{Error, ErrorClass, Result};
