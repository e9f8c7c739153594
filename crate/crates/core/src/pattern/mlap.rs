//! Near-field multi-level antenna pattern: the mainlobe split by beam depth
//! into `g_0`/`g_1`, sidelobe bands quantized to `g_2..g_M`, zero beyond.

use serde::{Deserialize, Serialize};

use super::{angular_gain, asymptotic_gain, beam_depth, ArrayConfig, BeamDepthInterval};
use crate::error::{invalid, Result};
use crate::geometry::PolarPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlapConfig {
    pub n_levels: u32,
    pub beta_gamma: f64,
    pub delta: f64,
}

impl Default for MlapConfig {
    fn default() -> Self {
        Self {
            n_levels: 10,
            beta_gamma: 1.3,
            delta: std::f64::consts::FRAC_1_SQRT_2,
        }
    }
}

impl MlapConfig {
    pub fn new(n_levels: u32, beta_gamma: f64, delta: f64) -> Result<Self> {
        let c = Self {
            n_levels,
            beta_gamma,
            delta,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 1 {
            return Err(invalid("MLAP needs at least one level"));
        }
        if !(self.beta_gamma > 0.0) || !self.beta_gamma.is_finite() {
            return Err(invalid(format!("β_γ must be positive, got {}", self.beta_gamma)));
        }
        if !(self.delta > 0.0 && self.delta <= 2.0) {
            return Err(invalid(format!("δ must lie in (0, 2], got {}", self.delta)));
        }
        Ok(())
    }

    pub(crate) fn validate_for(&self, cfg: &ArrayConfig) -> Result<()> {
        self.validate()?;
        let cap = cfg.n_antennas() / 2;
        if self.n_levels > cap {
            return Err(invalid(format!(
                "M = {} exceeds ⌊N/2⌋ = {cap}",
                self.n_levels
            )));
        }
        Ok(())
    }
}

/// Level gains `g_0..=g_{M+1}` for one focal point, with the geometry needed
/// to look them up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlapLevels {
    gains: Vec<f64>,
    focal: PolarPoint,
    depth: BeamDepthInterval,
    n_antennas: u32,
}

impl MlapLevels {
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// `M`.
    pub fn n_levels(&self) -> usize {
        self.gains.len() - 2
    }

    pub fn focal(&self) -> &PolarPoint {
        &self.focal
    }

    pub fn depth(&self) -> &BeamDepthInterval {
        &self.depth
    }

    pub fn n_antennas(&self) -> u32 {
        self.n_antennas
    }
}

fn sidelobe_level(n: u32, delta: f64, m: u32) -> f64 {
    if m == 1 {
        0.5 * delta
    } else {
        0.5 * delta * angular_gain(n, (2 * m - 1) as f64 / (2.0 * n as f64))
    }
}

pub fn mlap_levels(cfg: &ArrayConfig, mlap: &MlapConfig, focal: &PolarPoint) -> Result<MlapLevels> {
    mlap.validate_for(cfg)?;
    let depth = beam_depth(cfg, focal.theta, focal.r, mlap.beta_gamma)?;
    let asym = asymptotic_gain(cfg, focal.theta, focal.r)?;
    let n = cfg.n_antennas();
    let mut gains = Vec::with_capacity(mlap.n_levels as usize + 2);
    let g1 = sidelobe_level(n, mlap.delta, 1);
    gains.push(g1 * asym);
    for m in 1..=mlap.n_levels {
        gains.push(sidelobe_level(n, mlap.delta, m));
    }
    gains.push(0.0);
    Ok(MlapLevels {
        gains,
        focal: *focal,
        depth,
        n_antennas: n,
    })
}

/// Index `i` of the level that applies at `obs`.
pub fn mlap_level_index(levels: &MlapLevels, obs: &PolarPoint) -> usize {
    let n = levels.n_antennas as f64;
    let m_cap = levels.n_levels();
    let phi = 0.5 * (obs.theta.sin() - levels.focal.theta.sin());
    let band = (phi.abs() * n).ceil();
    if band <= 1.0 {
        if levels.depth.d_right.at_or_beyond(obs.r) {
            0
        } else if obs.r > levels.depth.d_left {
            1
        } else {
            m_cap + 1
        }
    } else if band <= m_cap as f64 {
        band as usize
    } else {
        m_cap + 1
    }
}

/// Quantized gain at `obs`.
pub fn mlap_gain(levels: &MlapLevels, obs: &PolarPoint) -> f64 {
    levels.gains[mlap_level_index(levels, obs)]
}

/// Three-level quantization of the on-ray distance pattern: 1 inside the
/// beam depth, the asymptotic gain beyond it, 0 in front of it.
pub fn distance_three_level(
    cfg: &ArrayConfig,
    theta_focal: f64,
    r_focal: f64,
    beta_gamma: f64,
    r_obs: f64,
) -> Result<f64> {
    let bd = beam_depth(cfg, theta_focal, r_focal, beta_gamma)?;
    Ok(if bd.d_right.at_or_beyond(r_obs) {
        asymptotic_gain(cfg, theta_focal, r_focal)?
    } else if r_obs > bd.d_left {
        1.0
    } else {
        0.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MStar {
    pub m: u32,
    /// No level up to `⌊N/2⌋` fell below `1/τ`.
    pub saturated: bool,
}

/// Smallest `M` for which the lowest non-zero level `min(g_0, g_1..g_M)` is
/// below `1/τ`, i.e. `τ < τ*` and the MLAP coverage has not yet flattened.
///
/// `g_0` takes part only when a focal point is given.
pub fn m_star(
    cfg: &ArrayConfig,
    mlap: &MlapConfig,
    tau: f64,
    focal: Option<&PolarPoint>,
) -> Result<MStar> {
    mlap.validate()?;
    if !(tau > 0.0) {
        return Err(invalid(format!("τ must be positive, got {tau}")));
    }
    let n = cfg.n_antennas();
    let cap = n / 2;
    let inv = 1.0 / tau;
    let mut lowest = match focal {
        Some(p) => sidelobe_level(n, mlap.delta, 1) * asymptotic_gain(cfg, p.theta, p.r)?,
        None => f64::INFINITY,
    };
    for m in 1..=cap {
        lowest = lowest.min(sidelobe_level(n, mlap.delta, m));
        if lowest < inv {
            return Ok(MStar {
                m,
                saturated: false,
            });
        }
    }
    Ok(MStar {
        m: cap,
        saturated: true,
    })
}
