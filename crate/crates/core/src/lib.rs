//! Coverage and spectrum-efficiency analysis of near-field beamfocusing
//! networks with users drawn from a binomial point process in a cell sector.

pub mod error;
pub mod geometry;
pub mod pattern;
pub mod quadrature;
pub mod analysis;
pub mod montecarlo;
pub mod cli;

pub use error::{Error, Result};
