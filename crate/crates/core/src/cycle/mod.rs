//! Piecewise-linear model of a heteroclinic cycle and its first-return map.

pub mod analysis;
pub mod config;
pub mod dictionary;
pub mod model;

pub use analysis::*;
pub use config::*;
pub use dictionary::*;
pub use model::*;
