use super::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::{conditional_cdf_clamped, spatial_angle_cdf_clamped, PolarPoint, Side};
use crate::pattern::{mlap_levels, MlapLevels};

/// Probabilities `p_i^in`, `p_i^out` that an inner/outer interferer sees
/// level `g_i`, for `i = 0..=M+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProbabilities {
    pub p_in: Vec<f64>,
    pub p_out: Vec<f64>,
    pub focal: PolarPoint,
}

impl LevelProbabilities {
    pub fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Inner => &self.p_in,
            Side::Outer => &self.p_out,
        }
    }
}

pub fn level_probabilities(
    theta_k: f64,
    r_k: f64,
    kappa: usize,
    scenario: &ScenarioConfig,
) -> Result<LevelProbabilities> {
    let focal = scenario.check_user(theta_k, r_k, kappa)?;
    let levels = mlap_levels(&scenario.array, &scenario.mlap, &focal)?;
    level_probabilities_for(&levels, kappa, scenario)
}

/// Same as [`level_probabilities`] for levels that are already built.
pub fn level_probabilities_for(
    levels: &MlapLevels,
    kappa: usize,
    scenario: &ScenarioConfig,
) -> Result<LevelProbabilities> {
    let focal = *levels.focal();
    scenario.check_user(focal.theta, focal.r, kappa)?;
    let sector = &scenario.sector;
    let rc = sector.cell_radius();
    let n = scenario.array.n_antennas() as f64;
    let m_cap = levels.n_levels();
    let vk = focal.spatial_angle();
    let ang = |lo: f64, hi: f64| {
        spatial_angle_cdf_clamped(vk + hi / n, sector) - spatial_angle_cdf_clamped(vk + lo / n, sector)
    };
    let main = ang(-1.0, 1.0);
    let bands: Vec<f64> = (2..=m_cap)
        .map(|m| {
            let m = m as f64;
            ang(-m, -(m - 1.0)) + ang(m - 1.0, m)
        })
        .collect();
    let depth = levels.depth();
    let side_probs = |side: Side, used: bool| -> Result<Vec<f64>> {
        let empty = match side {
            Side::Inner => focal.r <= 0.0,
            Side::Outer => focal.r >= rc,
        };
        if empty {
            if used {
                return Err(Error::DegenerateSupport(format!(
                    "{side:?} interferers required but their distance range is empty"
                )));
            }
            let mut p = vec![0.0; m_cap + 2];
            p[m_cap + 1] = 1.0;
            return Ok(p);
        }
        let cdf = |r: f64| conditional_cdf_clamped(side, r, focal.r, rc);
        let right = depth.d_right.finite().map_or(1.0, cdf);
        let left = cdf(depth.d_left);
        let mut p = Vec::with_capacity(m_cap + 2);
        p.push(main * (1.0 - right));
        p.push(main * (right - left).max(0.0));
        p.extend_from_slice(&bands);
        let rest = 1.0 - p.iter().sum::<f64>();
        p.push(rest.max(0.0));
        Ok(p)
    };
    Ok(LevelProbabilities {
        p_in: side_probs(Side::Inner, kappa > 1)?,
        p_out: side_probs(Side::Outer, kappa < scenario.n_active)?,
        focal,
    })
}

/// `τ*` with `1/τ* = min(g_0, …, g_M)`.
pub fn tau_star(levels: &MlapLevels) -> f64 {
    let g = levels.gains();
    let lowest = g[..g.len() - 1].iter().cloned().fold(f64::INFINITY, f64::min);
    1.0 / lowest
}

/// Closed-form upper bound on the MLAP conditional coverage.
pub fn conditional_cp_upper(
    tau: f64,
    theta_k: f64,
    r_k: f64,
    kappa: usize,
    scenario: &ScenarioConfig,
) -> Result<f64> {
    check_tau(tau)?;
    let focal = scenario.check_user(theta_k, r_k, kappa)?;
    let levels = mlap_levels(&scenario.array, &scenario.mlap, &focal)?;
    let probs = level_probabilities_for(&levels, kappa, scenario)?;
    Ok(upper_from_parts(tau, &levels, &probs, kappa, scenario.n_active))
}

pub(crate) fn passing_mass(gains: &[f64], probs: &[f64], w: f64) -> f64 {
    gains
        .iter()
        .zip(probs)
        .filter(|(g, _)| **g < w)
        .map(|(_, p)| p)
        .sum()
}

pub(crate) fn upper_from_parts(
    tau: f64,
    levels: &MlapLevels,
    probs: &LevelProbabilities,
    kappa: usize,
    n_active: usize,
) -> f64 {
    let w = 1.0 / tau;
    let g = levels.gains();
    let pin = passing_mass(g, &probs.p_in, w);
    let pout = passing_mass(g, &probs.p_out, w);
    (pin.powi(kappa as i32 - 1) * pout.powi((n_active - kappa) as i32)).clamp(0.0, 1.0)
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && !tau.is_nan() {
        Ok(())
    } else {
        Err(crate::error::invalid(format!("τ must be positive, got {tau}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_conditional_user_set;
    use crate::pattern::{mlap_level_index, MlapConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn probabilities_sum_to_one() {
        let sc = ScenarioConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let hw = sc.sector.half_width();
        for _ in 0..100 {
            let th = rng.random_range(-hw..hw);
            let r = rng.random_range(0.5..150.0);
            let k = rng.random_range(1..=15);
            let p = level_probabilities(th, r, k, &sc).unwrap();
            assert_eq!(p.p_in.len(), 12);
            for side in [&p.p_in, &p.p_out] {
                assert!((side.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(side.iter().all(|x| (0.0..=1.0).contains(x)));
            }
            for m in 2..=10 {
                assert_eq!(p.p_in[m], p.p_out[m]);
            }
        }
    }

    #[test]
    fn degenerate_sides() {
        let sc = ScenarioConfig::default();
        let e = level_probabilities(0.0, 150.0, 3, &sc).unwrap_err();
        assert!(matches!(e, Error::DegenerateSupport(_)));
        // The last user has no outer interferers, so r = R_c is fine.
        let p = level_probabilities(0.0, 150.0, 15, &sc).unwrap();
        assert_eq!(p.p_out[11], 1.0);
    }

    #[test]
    fn tau_star_properties() {
        let sc = ScenarioConfig::default();
        let focal = PolarPoint::new(0.0, 30.0);
        // Adding levels can only lower min g_i, so τ* never decreases with M.
        let mut prev = 0.0;
        for m in 1..=20 {
            let mlap = MlapConfig { n_levels: m, ..sc.mlap };
            let lv = mlap_levels(&sc.array, &mlap, &focal).unwrap();
            let t = tau_star(&lv);
            assert!(t >= prev);
            prev = t;
            if m == 1 {
                let g = lv.gains();
                assert_eq!(t, 1.0 / g[0].min(g[1]));
            }
        }
    }

    #[test]
    fn upper_is_one_when_all_levels_pass() {
        let sc = ScenarioConfig::default();
        let v = conditional_cp_upper(1.0 / 0.36, 0.1, 40.0, 4, &sc).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn bucketed_sampling_matches() {
        let sc = ScenarioConfig::default();
        let focal = PolarPoint::new(0.05, 30.0);
        let kappa = 4;
        let lv = mlap_levels(&sc.array, &sc.mlap, &focal).unwrap();
        let p = level_probabilities_for(&lv, kappa, &sc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut counts_in = [0usize; 12];
        let mut counts_out = [0usize; 12];
        let draws = 20_000;
        for _ in 0..draws {
            let set = sample_conditional_user_set(kappa, focal, 15, &sc.sector, &mut rng).unwrap();
            for (j, u) in set.users().iter().enumerate() {
                let idx = mlap_level_index(&lv, u);
                if j + 1 < kappa {
                    counts_in[idx] += 1;
                } else if j + 1 > kappa {
                    counts_out[idx] += 1;
                }
            }
        }
        let n_in = (draws * (kappa - 1)) as f64;
        let n_out = (draws * (15 - kappa)) as f64;
        for i in 0..12 {
            let e_in = counts_in[i] as f64 / n_in;
            let e_out = counts_out[i] as f64 / n_out;
            assert!((e_in - p.p_in[i]).abs() < 0.005, "in {i}: {e_in} vs {}", p.p_in[i]);
            assert!((e_out - p.p_out[i]).abs() < 0.005, "out {i}: {e_out} vs {}", p.p_out[i]);
        }
    }
}
