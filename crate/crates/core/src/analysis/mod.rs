//! Analytical coverage, spectrum efficiency and area spectrum efficiency
//! under the exact pattern, the multi-level pattern, and its closed-form
//! upper bound.

mod coverage;
mod inversion;
mod levels;
mod measure;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{PolarPoint, SectorGeometry};
use crate::pattern::{ArrayConfig, MlapConfig};

pub use coverage::{
    conditional_cp, conditional_sinr_cp, laplace_exact, InterferenceModel, laplace_mlap, overall_cp, se_and_ase,
    sinr_equivalent_threshold, SinrThreshold,
};
pub use inversion::GainLaw;
pub use levels::{
    conditional_cp_upper, level_probabilities, level_probabilities_for, tau_star,
    LevelProbabilities,
};
pub use measure::exact_gain_law;

/// Everything that defines one network scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub array: ArrayConfig,
    pub sector: SectorGeometry,
    pub n_active: usize,
    pub pathloss_exponent: f64,
    pub tx_power: f64,
    pub noise_power: f64,
    pub mlap: MlapConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            array: ArrayConfig::new(256, 28e9).expect("valid default array"),
            sector: SectorGeometry::new(3, 150.0, 150.0).expect("valid default sector"),
            n_active: 15,
            pathloss_exponent: 2.0,
            tx_power: 10.0,
            noise_power: 0.0,
            mlap: MlapConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_active < 1 {
            return Err(invalid("n_active must be at least 1"));
        }
        if !(self.pathloss_exponent >= 2.0) {
            return Err(invalid(format!(
                "path-loss exponent must be ≥ 2, got {}",
                self.pathloss_exponent
            )));
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(invalid(format!("tx power must be positive, got {}", self.tx_power)));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(invalid(format!(
                "noise power must be ≥ 0, got {}",
                self.noise_power
            )));
        }
        self.mlap.validate_for(&self.array)
    }

    /// Reference path gain `ζ = (λ/4π)²`.
    pub fn ref_pathloss(&self) -> f64 {
        (self.array.wavelength() / (4.0 * std::f64::consts::PI)).powi(2)
    }

    pub(crate) fn check_user(&self, theta_k: f64, r_k: f64, kappa: usize) -> Result<PolarPoint> {
        self.validate()?;
        if kappa < 1 || kappa > self.n_active {
            return Err(invalid(format!(
                "kappa {kappa} must lie in [1, {}]",
                self.n_active
            )));
        }
        let p = PolarPoint::new(theta_k, r_k);
        if !self.sector.contains(&p) || !(r_k > 0.0) {
            return Err(crate::error::domain(format!(
                "user (θ = {theta_k}, r = {r_k}) outside the sector"
            )));
        }
        Ok(p)
    }
}

/// Controls for the Gil-Pelaez inversion and the averaging quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InversionConfig {
    /// Truncation of the inversion integral, in units of `τ` (the integral
    /// runs over `t·(1/τ) ≤ t_max`).
    pub t_max: f64,
    pub rel_tol: f64,
    /// Integrand evaluations allowed per inversion.
    pub max_nodes: usize,
    /// Gauss–Legendre nodes on the half sector when averaging over angle.
    pub theta_nodes: usize,
    /// Absolute tolerance of the adaptive average over the user's distance.
    pub outer_tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            t_max: 400.0,
            rel_tol: 1e-6,
            max_nodes: 1_000_000,
            theta_nodes: 6,
            outer_tol: 1e-3,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || !(self.rel_tol > 0.0) || self.max_nodes < 15 {
            return Err(invalid("inversion needs t_max > 0, rel_tol > 0, max_nodes ≥ 15"));
        }
        if self.theta_nodes < 1 || !(self.outer_tol > 0.0) {
            return Err(invalid("averaging needs theta_nodes ≥ 1 and outer_tol > 0"));
        }
        Ok(())
    }
}

/// Which antenna pattern the analysis uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CpMode {
    Exact,
    Mlap,
    Upper,
}
