//! Near-field channel physics for a half-wavelength ULA: array
//! responses, exact and far-field beam patterns, the distance-domain pattern
//! and beam depth, and the multi-level quantized pattern ([`mlap`]).

mod fresnel;
pub mod mlap;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::geometry::PolarPoint;

pub use fresnel::fresnel_integrals;
pub use mlap::{
    distance_three_level, m_star, mlap_gain, mlap_level_index, mlap_levels, MStar, MlapConfig,
    MlapLevels,
};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Uniform linear array of `N` elements at half-wavelength spacing, indexed
/// by centred offsets `n − (N−1)/2` (the integers `−N̄..=N̄` when `N = 2N̄ + 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    n_antennas: u32,
    carrier_freq: f64,
    wavelength: f64,
    spacing: f64,
}

impl ArrayConfig {
    pub fn new(n_antennas: u32, carrier_freq: f64) -> Result<Self> {
        if n_antennas < 2 {
            return Err(invalid(format!("antenna count must be ≥ 2, got {n_antennas}")));
        }
        if !(carrier_freq > 0.0) || !carrier_freq.is_finite() {
            return Err(invalid(format!("carrier frequency must be positive, got {carrier_freq}")));
        }
        let wavelength = SPEED_OF_LIGHT / carrier_freq;
        Ok(Self {
            n_antennas,
            carrier_freq,
            wavelength,
            spacing: 0.5 * wavelength,
        })
    }

    pub fn n_antennas(&self) -> u32 {
        self.n_antennas
    }

    /// Largest element offset, `(N−1)/2`.
    pub fn half_extent(&self) -> f64 {
        0.5 * (self.n_antennas as f64 - 1.0)
    }

    /// Centred element offsets in ascending order.
    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.half_extent();
        (0..self.n_antennas).map(move |i| i as f64 - h)
    }

    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn aperture(&self) -> f64 {
        (self.n_antennas - 1) as f64 * self.spacing
    }

    /// Rayleigh distance `2D²/λ`.
    pub fn rayleigh_distance(&self) -> f64 {
        let d = self.aperture();
        2.0 * d * d / self.wavelength
    }

    /// Fresnel distance `0.62·√(D³/λ)`.
    pub fn fresnel_distance(&self) -> f64 {
        let d = self.aperture();
        0.62 * (d * d * d / self.wavelength).sqrt()
    }

    /// `N²d²/(2λ)`, the common prefactor of every distance-domain β.
    fn depth_scale(&self) -> f64 {
        let n = self.n_antennas as f64;
        n * n * self.spacing * self.spacing / (2.0 * self.wavelength)
    }
}

fn check_range(r: f64, what: &str) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{what} distance must be positive and finite, got {r}")))
    }
}

/// Normalized NF response at `p`, using exact element distances.
pub fn array_response(cfg: &ArrayConfig, p: &PolarPoint) -> Result<Vec<Complex64>> {
    check_range(p.r, "observation")?;
    let k = 2.0 * PI / cfg.wavelength;
    let amp = 1.0 / (cfg.n_antennas as f64).sqrt();
    let (s, _) = p.theta.sin_cos();
    let r = p.r;
    let d = cfg.spacing;
    Ok(cfg
        .offsets()
        .map(|n| {
            let nd = n * d;
            let rn = (r * r + nd * nd - 2.0 * r * nd * s).sqrt();
            // r_n − r without cancellation.
            let delta = (nd * nd - 2.0 * r * nd * s) / (rn + r);
            Complex64::from_polar(amp, -k * delta)
        })
        .collect())
}

/// Per-point quantities entering the Fresnel-phase gain sum.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PhasePoint {
    sin_theta: f64,
    curvature: f64,
}

impl PhasePoint {
    pub(crate) fn new(p: &PolarPoint) -> Self {
        let (s, c) = p.theta.sin_cos();
        Self {
            sin_theta: s,
            curvature: c * c / p.r,
        }
    }
}

/// Gain between two precomputed points. Symmetric bit-for-bit.
pub(crate) fn exact_gain_phase(cfg: &ArrayConfig, obs: PhasePoint, focal: PhasePoint) -> f64 {
    // With d = λ/2 the linear coefficient is π·Δsinθ and the quadratic one
    // (πλ/4)·Δ(cos²θ/r).
    let a = PI * (obs.sin_theta - focal.sin_theta);
    let b = 0.25 * PI * cfg.wavelength * (focal.curvature - obs.curvature);
    let n = cfg.n_antennas as f64;
    fresnel_sum(cfg.n_antennas, a, b).norm_sqr() / (n * n)
}

// Σ_n exp(j(an + bn²)) over the centred offsets, up to conjugation, paired
// as Σ 2cos(an)e^{jbn²} over n > 0. The sign of `a` never matters and the
// sign of `b` only conjugates, so both are folded to make the result
// independent of argument order.
fn fresnel_sum(n_antennas: u32, a: f64, b: f64) -> Complex64 {
    const ANCHOR: u32 = 32;
    let odd = n_antennas % 2 == 1;
    if a == 0.0 && b == 0.0 {
        return Complex64::new(n_antennas as f64, 0.0);
    }
    let a = a.abs();
    let b = b.abs();
    let (first, center) = if odd { (1.0, 1.0) } else { (0.5, 0.0) };
    let pairs = n_antennas / 2;
    let ea = Complex64::from_polar(1.0, a);
    let e2b = Complex64::from_polar(1.0, 2.0 * b);
    let mut za = Complex64::new(1.0, 0.0);
    let mut zb = za;
    let mut step = za;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..pairs {
        if k % ANCHOR == 0 {
            let n = first + k as f64;
            za = Complex64::from_polar(1.0, a * n);
            zb = Complex64::from_polar(1.0, b * n * n);
            step = Complex64::from_polar(1.0, b * (2.0 * n + 1.0));
        }
        acc += zb * za.re;
        za *= ea;
        zb *= step;
        step *= e2b;
    }
    Complex64::new(center, 0.0) + 2.0 * acc
}

/// Exact NF beam gain at `obs` for a beam focused on `focal` (Fresnel-phase sum).
pub fn exact_gain(cfg: &ArrayConfig, obs: &PolarPoint, focal: &PolarPoint) -> Result<f64> {
    check_range(obs.r, "observation")?;
    check_range(focal.r, "focal")?;
    Ok(exact_gain_phase(cfg, PhasePoint::new(obs), PhasePoint::new(focal)))
}

/// Angular-domain pattern `sin²(πNφ)/(N² sin²(πφ))`.
pub fn angular_gain(n_antennas: u32, phi: f64) -> f64 {
    let n = n_antennas as f64;
    let x = phi - phi.round();
    if (n * x).abs() < 1e-6 {
        let t = PI * x;
        return 1.0 - t * t * (n * n - 1.0) / 3.0;
    }
    let num = (PI * n * x).sin();
    let den = n * (PI * x).sin();
    (num / den).powi(2)
}

/// Far-field beam pattern between two directions.
pub fn ff_gain(cfg: &ArrayConfig, theta: f64, theta_focal: f64) -> f64 {
    angular_gain(cfg.n_antennas, 0.5 * (theta.sin() - theta_focal.sin()))
}

/// `G_D(β) = |(C(β) + jS(β))/β|²`, with `G_D(0) = 1`.
pub fn distance_pattern(beta: f64) -> Result<f64> {
    if beta < 0.0 || beta.is_nan() {
        return Err(domain(format!("β must be ≥ 0, got {beta}")));
    }
    if beta < 1e-6 {
        return Ok(1.0 - PI * PI * beta.powi(4) / 45.0);
    }
    let (c, s) = fresnel_integrals(beta)?;
    Ok((c * c + s * s) / (beta * beta))
}

/// Distance-domain gain on the focal ray, between `r_focal` and `r_obs`.
pub fn distance_gain(cfg: &ArrayConfig, theta_focal: f64, r_focal: f64, r_obs: f64) -> Result<f64> {
    check_range(r_focal, "focal")?;
    check_range(r_obs, "observation")?;
    let c = theta_focal.cos();
    let beta = (cfg.depth_scale() * c * c * (1.0 / r_focal - 1.0 / r_obs).abs()).sqrt();
    distance_pattern(beta)
}

/// Limit of [`distance_gain`] as the observation distance goes to infinity.
pub fn asymptotic_gain(cfg: &ArrayConfig, theta_focal: f64, r_focal: f64) -> Result<f64> {
    check_range(r_focal, "focal")?;
    let c = theta_focal.cos();
    distance_pattern((cfg.depth_scale() * c * c / r_focal).sqrt())
}

/// Solves `G_D(β) = 10^{γ/10}` on the main lobe of the distance pattern.
pub fn beta_for_gamma(gamma_db: f64) -> Result<f64> {
    const HI: f64 = 1.9;
    let target = 10f64.powf(gamma_db / 10.0);
    let floor = distance_pattern(HI)?;
    if !(target > floor && target < 1.0) {
        return Err(invalid(format!(
            "γ = {gamma_db} dB outside the monotone range of the distance pattern"
        )));
    }
    let (mut lo, mut hi) = (0.0, HI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if distance_pattern(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Far edge of the beam-depth interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DepthEdge {
    Finite(f64),
    Unbounded,
}

impl DepthEdge {
    /// True when `r` is at or beyond this edge.
    pub fn at_or_beyond(&self, r: f64) -> bool {
        match *self {
            DepthEdge::Finite(d) => r >= d,
            DepthEdge::Unbounded => false,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            DepthEdge::Finite(d) => Some(d),
            DepthEdge::Unbounded => None,
        }
    }
}

/// Distances around a focal point where the on-ray gain stays above `G_D(β_γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamDepthInterval {
    /// `D_θ = N²d²cos²θ/(2λβ_γ²)`.
    pub scale: f64,
    pub d_left: f64,
    pub d_right: DepthEdge,
}

impl BeamDepthInterval {
    /// `D_right − D_left`, or `None` when unbounded.
    pub fn depth(&self) -> Option<f64> {
        self.d_right.finite().map(|r| r - self.d_left)
    }
}

/// Beam-depth interval for a focal point.
///
/// The edges are placed where `β = β_γ`, so `distance_gain` equals
/// `G_D(β_γ)` at both finite edges.
pub fn beam_depth(
    cfg: &ArrayConfig,
    theta_focal: f64,
    r_focal: f64,
    beta_gamma: f64,
) -> Result<BeamDepthInterval> {
    check_range(r_focal, "focal")?;
    if !(beta_gamma > 0.0) || !beta_gamma.is_finite() {
        return Err(invalid(format!("β_γ must be positive, got {beta_gamma}")));
    }
    let c = theta_focal.cos();
    let scale = cfg.depth_scale() * c * c / (beta_gamma * beta_gamma);
    let r = r_focal;
    let d_left = r * scale / (scale + r);
    let d_right = if r < scale {
        DepthEdge::Finite(r * scale / (scale - r))
    } else {
        DepthEdge::Unbounded
    };
    Ok(BeamDepthInterval {
        scale,
        d_left,
        d_right,
    })
}
