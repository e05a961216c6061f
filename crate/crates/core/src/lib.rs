pub mod bootstrap;
pub mod cli;
pub mod error;
pub mod modelselect;
pub mod panel;
pub mod regression;
pub mod residcorr;
pub mod rng;
pub mod simstudy;
pub mod stats;
pub mod warning;

pub use error::{Error, Result};
pub use warning::Warning;
