//! Discretized law of the exact beam gain seen by one interferer.
//!
//! The interferer's angle is uniform on the sector and its distance follows
//! the inner or outer conditional law. The `(θ, r)` average is replaced by a
//! product rule: angular panels aligned with the lobes of the angular
//! pattern (finer near the mainlobe), and radial nodes placed uniformly in
//! the distance-domain variable `β` near the focal distance. The resulting
//! weighted gains are merged into narrow relative-width bins.

use super::inversion::GainLaw;
use super::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::{PolarPoint, Side};
use crate::pattern::{exact_gain_phase, PhasePoint};
use crate::quadrature::{composite_gauss_legendre, gauss_legendre};

const BIN_REL_WIDTH: f64 = 1e-3;
const GAIN_FLOOR: f64 = 1e-14;

/// Law of `G(u; u_κ)` for `u` an inner or outer interferer of the user at
/// `(theta_k, r_k)`.
pub fn exact_gain_law(
    theta_k: f64,
    r_k: f64,
    side: Side,
    scenario: &ScenarioConfig,
) -> Result<GainLaw> {
    scenario.validate()?;
    let rc = scenario.sector.cell_radius();
    let focal = PolarPoint::new(theta_k, r_k);
    if !scenario.sector.contains(&focal) {
        return Err(crate::error::domain(format!("focal point {focal:?} outside the sector")));
    }
    match side {
        Side::Inner if r_k <= 0.0 => {
            return Err(Error::DegenerateSupport("no inner interferers when r_κ = 0".into()))
        }
        Side::Outer if r_k >= rc => {
            return Err(Error::DegenerateSupport("no outer interferers when r_κ = R_c".into()))
        }
        _ => {}
    }
    let angles = angular_rule(theta_k, scenario);
    let fine = fine_radial_rule(theta_k, r_k, side, scenario);
    let medium = mass_radial_rule(r_k, rc, side, 16);
    let coarse = mass_radial_rule(r_k, rc, side, 6);
    let fp = PhasePoint::new(&focal);
    let mut raw = Vec::with_capacity(angles.len() * 64);
    for &(theta, wa, lobe) in &angles {
        let radial = match lobe {
            0..=3 => &fine,
            4..=15 => &medium,
            _ => &coarse,
        };
        for &(r, wr) in radial {
            let g = exact_gain_phase(&scenario.array, PhasePoint::new(&PolarPoint::new(theta, r)), fp);
            raw.push((g, wa * wr));
        }
    }
    Ok(GainLaw::new(compress(raw)))
}

// (θ, weight, lobe index) with weights summing to one.
fn angular_rule(theta_k: f64, scenario: &ScenarioConfig) -> Vec<(f64, f64, u32)> {
    let hw = scenario.sector.half_width();
    let n = scenario.array.n_antennas() as f64;
    let s_lo = (-hw).sin();
    let s_hi = hw.sin();
    // Null positions in sin θ: sin θ_κ + 2k/N.
    let sk = theta_k.sin();
    let k_lo = ((s_lo - sk) * n / 2.0).floor() as i64;
    let k_hi = ((s_hi - sk) * n / 2.0).ceil() as i64;
    let mut out = Vec::new();
    let rules: Vec<(Vec<f64>, Vec<f64>)> = [4usize, 6].iter().map(|&m| gauss_legendre(m)).collect();
    for k in k_lo..k_hi {
        let a = (sk + 2.0 * k as f64 / n).max(s_lo);
        let b = (sk + 2.0 * (k + 1) as f64 / n).min(s_hi);
        if b <= a {
            continue;
        }
        // Panels k = −1 and k = 0 form the mainlobe.
        let lobe = if k >= 0 { k as u32 } else { (-k - 1) as u32 };
        let (subpanels, rule) = match lobe {
            0 => (8, &rules[1]),
            1..=3 => (3, &rules[1]),
            4..=15 => (1, &rules[1]),
            _ => (1, &rules[0]),
        };
        let ta = a.clamp(-1.0, 1.0).asin();
        let tb = b.clamp(-1.0, 1.0).asin();
        // Uniform density 1/(2·hw) in θ.
        let breaks: Vec<f64> = (0..=subpanels)
            .map(|i| ta + (tb - ta) * i as f64 / subpanels as f64)
            .collect();
        for p in breaks.windows(2) {
            let c = 0.5 * (p[0] + p[1]);
            let h = 0.5 * (p[1] - p[0]);
            for (x, w) in rule.0.iter().zip(&rule.1) {
                out.push((c + h * x, h * w / (2.0 * hw), lobe));
            }
        }
    }
    out
}

// Radial nodes uniform in β around r_κ; weights are the conditional
// probabilities and sum to one.
fn fine_radial_rule(theta_k: f64, r_k: f64, side: Side, scenario: &ScenarioConfig) -> Vec<(f64, f64)> {
    let rc = scenario.sector.cell_radius();
    let n = scenario.array.n_antennas() as f64;
    let d = scenario.array.spacing();
    let c2 = theta_k.cos().powi(2);
    let s = n * n * d * d * c2 / (2.0 * scenario.array.wavelength());
    let (x, w) = gauss_legendre(5);
    let mut nodes = Vec::new();
    let push_panel = |b0: f64, b1: f64, nodes: &mut Vec<(f64, f64)>| {
        let c = 0.5 * (b0 + b1);
        let h = 0.5 * (b1 - b0);
        for (xi, wi) in x.iter().zip(&w) {
            let beta = c + h * xi;
            let inv = match side {
                Side::Inner => 1.0 / r_k + beta * beta / s,
                Side::Outer => 1.0 / r_k - beta * beta / s,
            };
            let r = 1.0 / inv;
            let drdb = r * r * 2.0 * beta / s;
            let dens = match side {
                Side::Inner => 2.0 * r / (r_k * r_k),
                Side::Outer => 2.0 * r / (rc * rc - r_k * r_k),
            };
            nodes.push((r, h * wi * dens * drdb));
        }
    };
    let step = 0.25;
    match side {
        Side::Outer => {
            let b_max = (s * (1.0 / r_k - 1.0 / rc)).max(0.0).sqrt();
            let panels = ((b_max / step).ceil() as usize).clamp(2, 400);
            for i in 0..panels {
                let b0 = b_max * i as f64 / panels as f64;
                let b1 = b_max * (i + 1) as f64 / panels as f64;
                push_panel(b0, b1, &mut nodes);
            }
        }
        Side::Inner => {
            // Down to r = 1e-3·r_κ in β, then one plain panel in r.
            let r_end = 1e-3 * r_k;
            let b_end = (s * (1.0 / r_end - 1.0 / r_k)).sqrt();
            let mut b0 = 0.0;
            let mut width = step;
            while b0 < b_end {
                let b1 = (b0 + width).min(b_end);
                push_panel(b0, b1, &mut nodes);
                b0 = b1;
                if b0 > 8.0 {
                    width *= 1.15;
                }
            }
            for (r, wr) in composite_gauss_legendre(&[0.0, r_end], 4) {
                nodes.push((r, wr * 2.0 * r / (r_k * r_k)));
            }
        }
    }
    normalize(nodes)
}

// Gauss–Legendre in the conditional-CDF variable: equal-mass coverage.
fn mass_radial_rule(r_k: f64, rc: f64, side: Side, m: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(m);
    x.iter()
        .zip(&w)
        .map(|(xi, wi)| {
            let q = 0.5 * (xi + 1.0);
            let r = match side {
                Side::Inner => r_k * q.sqrt(),
                Side::Outer => (r_k * r_k + q * (rc * rc - r_k * r_k)).sqrt(),
            };
            (r, 0.5 * wi)
        })
        .collect()
}

fn normalize(mut nodes: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let total: f64 = nodes.iter().map(|n| n.1).sum();
    for n in &mut nodes {
        n.1 /= total;
    }
    nodes
}

// Merge weighted gains into bins of relative width BIN_REL_WIDTH, each
// represented by its centre of mass.
fn compress(mut raw: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = raw.iter().map(|r| r.1).sum();
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut start = f64::NAN;
    let mut mass = 0.0;
    let mut moment = 0.0;
    let flush = |mass: &mut f64, moment: &mut f64, out: &mut Vec<(f64, f64)>| {
        if *mass > 0.0 {
            out.push((*moment / *mass, *mass / total));
        }
        *mass = 0.0;
        *moment = 0.0;
    };
    for (g, w) in raw {
        let g = if g < GAIN_FLOOR { 0.0 } else { g.min(1.0) };
        let same_bin = if start == 0.0 {
            g == 0.0
        } else {
            g <= start * (1.0 + BIN_REL_WIDTH)
        };
        if !(mass > 0.0 && same_bin) {
            flush(&mut mass, &mut moment, &mut out);
            start = g;
        }
        mass += w;
        moment += w * g;
    }
    flush(&mut mass, &mut moment, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_conditional_user_set;
    use crate::pattern::exact_gain;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rules_are_normalized() {
        let sc = ScenarioConfig::default();
        let a: f64 = angular_rule(0.2, &sc).iter().map(|x| x.1).sum();
        assert!((a - 1.0).abs() < 1e-12);
        for side in [Side::Inner, Side::Outer] {
            let f: f64 = fine_radial_rule(0.2, 30.0, side, &sc).iter().map(|x| x.1).sum();
            assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_rule_integrates_the_conditional_law() {
        // Unnormalized sum should already be close to one.
        let sc = ScenarioConfig::default();
        for side in [Side::Inner, Side::Outer] {
            let nodes = fine_radial_rule(0.3, 45.0, side, &sc);
            let mean: f64 = nodes.iter().map(|(r, w)| r * w).sum();
            let exact = match side {
                Side::Inner => 2.0 / 3.0 * 45.0,
                Side::Outer => 2.0 / 3.0 * (150f64.powi(3) - 45f64.powi(3)) / (150f64.powi(2) - 45f64.powi(2)),
            };
            assert!((mean - exact).abs() < 2e-5 * exact, "{side:?}: {mean} vs {exact}");
        }
    }

    #[test]
    fn law_matches_sampled_gains() {
        let sc = ScenarioConfig::default();
        let focal = PolarPoint::new(0.0, 30.0);
        let law = exact_gain_law(0.0, 30.0, Side::Outer, &sc).unwrap();
        assert!((law.total_mass() - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut gains = Vec::new();
        for _ in 0..4000 {
            let set = sample_conditional_user_set(1, focal, 15, &sc.sector, &mut rng).unwrap();
            for u in &set.users()[1..] {
                gains.push(exact_gain(&sc.array, u, &focal).unwrap());
            }
        }
        let n = gains.len() as f64;
        for w in [1e-4, 1e-3, 1e-2, 0.1, 0.3] {
            let emp = gains.iter().filter(|g| **g < w).count() as f64 / n;
            let got = law.mass_below(w);
            assert!((emp - got).abs() < 4.0 * (got * (1.0 - got) / n).sqrt() + 2e-3, "w={w}: {emp} vs {got}");
        }
        let mean_emp = gains.iter().sum::<f64>() / n;
        let mean = law.atoms().iter().map(|a| a.0 * a.1).sum::<f64>();
        assert!((mean - mean_emp).abs() < 0.1 * mean, "{mean} vs {mean_emp}");
    }

    #[test]
    fn degenerate_sides_rejected() {
        let sc = ScenarioConfig::default();
        assert!(exact_gain_law(0.0, 150.0, Side::Outer, &sc).is_err());
    }
}
