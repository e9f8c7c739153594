use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::inversion::{coverage_probability, GainLaw};
use super::levels::{check_tau, level_probabilities_for, upper_from_parts, LevelProbabilities};
use super::measure::exact_gain_law;
use super::{CpMode, InversionConfig, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::{ordered_distance_dist, Side};
use crate::pattern::{mlap_levels, MlapLevels};
use crate::quadrature::{gauss_legendre, integrate, Tolerance};

/// Interference laws seen by one user: `κ − 1` inner and `N_a − κ` outer
/// interferers. Build once, then evaluate coverage at many thresholds.
#[derive(Debug, Clone)]
pub struct InterferenceModel {
    inner: Option<GainLaw>,
    outer: Option<GainLaw>,
    n_inner: usize,
    n_outer: usize,
}

impl InterferenceModel {
    pub fn exact(theta_k: f64, r_k: f64, kappa: usize, scenario: &ScenarioConfig) -> Result<Self> {
        scenario.check_user(theta_k, r_k, kappa)?;
        let n_inner = kappa - 1;
        let n_outer = scenario.n_active - kappa;
        let law = |side, n: usize| -> Result<Option<GainLaw>> {
            if n == 0 {
                Ok(None)
            } else {
                exact_gain_law(theta_k, r_k, side, scenario).map(Some)
            }
        };
        Ok(Self {
            inner: law(Side::Inner, n_inner)?,
            outer: law(Side::Outer, n_outer)?,
            n_inner,
            n_outer,
        })
    }

    pub fn mlap(levels: &MlapLevels, probs: &LevelProbabilities, kappa: usize, n_active: usize) -> Self {
        let law = |p: &[f64]| {
            GainLaw::new(levels.gains().iter().cloned().zip(p.iter().cloned()).collect())
        };
        Self {
            inner: (kappa > 1).then(|| law(&probs.p_in)),
            outer: (kappa < n_active).then(|| law(&probs.p_out)),
            n_inner: kappa - 1,
            n_outer: n_active - kappa,
        }
    }

    fn sides(&self) -> Vec<(&GainLaw, usize)> {
        let mut v = Vec::with_capacity(2);
        if let Some(l) = &self.inner {
            v.push((l, self.n_inner));
        }
        if let Some(l) = &self.outer {
            v.push((l, self.n_outer));
        }
        v
    }

    /// `E[exp(−s·I)]`.
    pub fn laplace(&self, s: Complex64) -> Complex64 {
        if s == Complex64::new(0.0, 0.0) {
            return Complex64::new(1.0, 0.0);
        }
        self.sides()
            .into_iter()
            .map(|(l, n)| l.laplace(s).powi(n as i32))
            .product()
    }

    /// `P{I < 1/τ}`.
    pub fn coverage(&self, tau: f64, quad: &InversionConfig) -> Result<f64> {
        check_tau(tau)?;
        coverage_probability(1.0 / tau, &self.sides(), quad)
    }
}

/// Laplace transform of the exact-pattern beam interference.
pub fn laplace_exact(
    s: Complex64,
    theta_k: f64,
    r_k: f64,
    kappa: usize,
    scenario: &ScenarioConfig,
) -> Result<Complex64> {
    scenario.check_user(theta_k, r_k, kappa)?;
    if s == Complex64::new(0.0, 0.0) || scenario.n_active == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(InterferenceModel::exact(theta_k, r_k, kappa, scenario)?.laplace(s))
}

/// Closed-form Laplace transform of the interference under the multi-level pattern.
pub fn laplace_mlap(
    s: Complex64,
    probs: &LevelProbabilities,
    levels: &MlapLevels,
    kappa: usize,
    n_active: usize,
) -> Complex64 {
    let g = levels.gains();
    let side = |p: &[f64]| -> Complex64 {
        g.iter().zip(p).map(|(gi, pi)| *pi * (-s * *gi).exp()).sum()
    };
    if s == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    side(&probs.p_in).powi(kappa as i32 - 1) * side(&probs.p_out).powi((n_active - kappa) as i32)
}

/// Conditional SIR coverage `P{SIR_κ > τ | θ_κ, r_κ}`.
pub fn conditional_cp(
    tau: f64,
    theta_k: f64,
    r_k: f64,
    kappa: usize,
    scenario: &ScenarioConfig,
    mode: CpMode,
    quad: &InversionConfig,
) -> Result<f64> {
    check_tau(tau)?;
    quad.validate()?;
    let focal = scenario.check_user(theta_k, r_k, kappa)?;
    if scenario.n_active == 1 {
        return Ok(1.0);
    }
    match mode {
        CpMode::Exact => InterferenceModel::exact(theta_k, r_k, kappa, scenario)?.coverage(tau, quad),
        CpMode::Mlap | CpMode::Upper => {
            let levels = mlap_levels(&scenario.array, &scenario.mlap, &focal)?;
            let probs = level_probabilities_for(&levels, kappa, scenario)?;
            if mode == CpMode::Upper {
                return Ok(upper_from_parts(tau, &levels, &probs, kappa, scenario.n_active));
            }
            InterferenceModel::mlap(&levels, &probs, kappa, scenario.n_active).coverage(tau, quad)
        }
    }
}

/// Threshold on the SIR equivalent to an SINR threshold at distance `r_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SinrThreshold {
    Feasible(f64),
    /// Noise alone exceeds the budget; coverage is zero.
    Infeasible,
}

pub fn sinr_equivalent_threshold(tau: f64, r_k: f64, scenario: &ScenarioConfig) -> Result<SinrThreshold> {
    check_tau(tau)?;
    if !(r_k > 0.0) {
        return Err(crate::error::domain(format!("distance must be positive, got {r_k}")));
    }
    if scenario.noise_power == 0.0 {
        return Ok(SinrThreshold::Feasible(tau));
    }
    let n = scenario.array.n_antennas() as f64;
    let noise = scenario.n_active as f64 * scenario.noise_power * r_k.powf(scenario.pathloss_exponent)
        / (scenario.tx_power * n * scenario.ref_pathloss());
    let inv = 1.0 / tau - noise;
    Ok(if inv > 0.0 {
        SinrThreshold::Feasible(1.0 / inv)
    } else {
        SinrThreshold::Infeasible
    })
}

/// Conditional SINR coverage, via the equivalent SIR threshold.
pub fn conditional_sinr_cp(
    tau: f64,
    theta_k: f64,
    r_k: f64,
    kappa: usize,
    scenario: &ScenarioConfig,
    mode: CpMode,
    quad: &InversionConfig,
) -> Result<f64> {
    match sinr_equivalent_threshold(tau, r_k, scenario)? {
        SinrThreshold::Feasible(t) => conditional_cp(t, theta_k, r_k, kappa, scenario, mode, quad),
        SinrThreshold::Infeasible => Ok(0.0),
    }
}

// Inverse of the ordered-distance CDF by bisection.
fn ordered_quantile(kappa: usize, p: f64, scenario: &ScenarioConfig) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, scenario.sector.cell_radius());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ordered_distance_dist(kappa, mid, scenario.n_active, &scenario.sector)?.cdf < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Coverage of the κ-th user averaged over its location. With nonzero noise
/// power the SINR coverage is averaged instead.
///
/// The angle average uses the mirror symmetry of the sector; the distance
/// average is taken in the CDF variable `p = F_{R_κ}(r)`, where it has
/// uniform weight.
pub fn overall_cp(
    tau: f64,
    kappa: usize,
    scenario: &ScenarioConfig,
    mode: CpMode,
    quad: &InversionConfig,
) -> Result<f64> {
    check_tau(tau)?;
    quad.validate()?;
    scenario.validate()?;
    if kappa < 1 || kappa > scenario.n_active {
        return Err(crate::error::invalid(format!(
            "kappa {kappa} must lie in [1, {}]",
            scenario.n_active
        )));
    }
    if scenario.n_active == 1 && scenario.noise_power == 0.0 {
        return Ok(1.0);
    }
    let hw = scenario.sector.half_width();
    let (x, w) = gauss_legendre(quad.theta_nodes);
    let thetas: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(xi, wi)| (0.5 * hw * (xi + 1.0), 0.5 * wi))
        .collect();
    let mut failure: Option<Error> = None;
    let integrand = |p: f64| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        let r = match ordered_quantile(kappa, p, scenario) {
            Ok(r) => r,
            Err(e) => {
                failure = Some(e);
                return 0.0;
            }
        };
        let parts: Vec<Result<f64>> = thetas
            .par_iter()
            .map(|&(th, _)| conditional_sinr_cp(tau, th, r, kappa, scenario, mode, quad))
            .collect();
        let mut acc = 0.0;
        for (v, &(_, wt)) in parts.into_iter().zip(&thetas) {
            match v {
                Ok(v) => acc += wt * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    return 0.0;
                }
            }
        }
        acc
    };
    let tol = Tolerance::new(quad.outer_tol, 0.0, 64);
    let result = integrate(integrand, 0.0, 1.0, tol);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(result?.value.clamp(0.0, 1.0))
}

/// Per-user spectrum efficiencies `CP_κ(τ)·log₂(1+τ)` and the area spectrum
/// efficiency `(N_s/(πR_c²))·Σ_κ SE_κ`.
pub fn se_and_ase(
    tau: f64,
    scenario: &ScenarioConfig,
    mode: CpMode,
    quad: &InversionConfig,
) -> Result<(Vec<f64>, f64)> {
    check_tau(tau)?;
    let rate = (1.0 + tau).log2();
    let se: Vec<f64> = (1..=scenario.n_active)
        .into_par_iter()
        .map(|k| overall_cp(tau, k, scenario, mode, quad).map(|cp| cp * rate))
        .collect::<Result<Vec<f64>>>()?;
    let rc = scenario.sector.cell_radius();
    let density = scenario.sector.n_sectors() as f64 / (PI * rc * rc);
    let ase = density * se.iter().sum::<f64>();
    Ok((se, ase))
}
