pub mod cli;
pub mod error;
pub mod eigen_stats;
pub mod estimators;
pub mod loss;
pub mod matrix;
pub mod montecarlo;
pub mod risk;
pub mod sampling;
pub mod special;

pub use error::{Error, Result};
