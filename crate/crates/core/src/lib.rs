//! Neimark-Sacker normal forms, the Hénon map, invariant-circle detection and
//! an explicit heteroclinic-cycle model whose return maps rescale to Hénon.

pub mod circle;
pub mod cycle;
pub mod error;
pub mod henon;
pub mod jet;
pub mod normal_form;

pub use error::{Error, Result};
