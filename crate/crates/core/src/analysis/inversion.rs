//! Gil-Pelaez inversion for `P{Σ G_j < w}` where the `G_j` are independent
//! non-negative gains with discrete laws.
//!
//! Every term must itself be below `w` for the sum to be, so the probability
//! factors as `Π_v P{G < w}^{n_v} · P{Σ < w | every term < w}`. Only the
//! second factor is inverted, on the laws restricted to `[0, w)` and in the
//! scaled variable `u = t·w`. A point mass at zero is split off analytically.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::InversionConfig;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_from, Tolerance};

/// Law of one interferer's gain as weighted atoms, sorted by gain.
#[derive(Debug, Clone, PartialEq)]
pub struct GainLaw {
    atoms: Vec<(f64, f64)>,
}

impl GainLaw {
    /// Builds a law from `(gain, probability)` pairs; equal gains are merged.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.retain(|a| a.1 > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (g, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == g => last.1 += p,
                _ => merged.push((g, p)),
            }
        }
        Self { atoms: merged }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `E[exp(−s·G)]`.
    pub fn laplace(&self, s: Complex64) -> Complex64 {
        if s == Complex64::new(0.0, 0.0) {
            return Complex64::new(self.total_mass(), 0.0);
        }
        self.atoms.iter().map(|&(g, p)| p * (-s * g).exp()).sum()
    }

    /// `P{G < w}`.
    pub fn mass_below(&self, w: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.0 < w).map(|a| a.1).sum()
    }
}

struct Truncated {
    zero: f64,
    atoms: Vec<(f64, f64)>,
    count: i32,
}

impl Truncated {
    fn cf(&self, u: f64) -> Complex64 {
        let mut acc = Complex64::new(self.zero, 0.0);
        for &(g, p) in &self.atoms {
            let (s, c) = (u * g).sin_cos();
            acc.re += p * c;
            acc.im += p * s;
        }
        acc
    }
}

/// `P{Σ_v Σ_{j ≤ n_v} G_{v,j} < w}` for independent gains with laws `sides[v].0`.
pub fn coverage_probability(w: f64, sides: &[(&GainLaw, usize)], cfg: &InversionConfig) -> Result<f64> {
    let mut factor = 1.0;
    let mut parts = Vec::with_capacity(sides.len());
    for &(law, n) in sides {
        if n == 0 {
            continue;
        }
        let pass = law.mass_below(w);
        if pass <= 0.0 {
            return Ok(0.0);
        }
        factor *= pass.powi(n as i32);
        let mut zero = 0.0;
        let mut atoms = Vec::new();
        for &(g, p) in law.atoms.iter().take_while(|a| a.0 < w) {
            if g <= 0.0 {
                zero += p / pass;
            } else {
                atoms.push((g / w, p / pass));
            }
        }
        parts.push(Truncated {
            zero,
            atoms,
            count: n as i32,
        });
    }
    if factor == 0.0 || parts.iter().all(|p| p.atoms.is_empty()) {
        return Ok(factor.clamp(0.0, 1.0));
    }
    let conditional = invert_scaled(&parts, cfg)?;
    Ok((factor * conditional).clamp(0.0, 1.0))
}

// P{X̃ < 1} for X̃ the sum of the scaled truncated terms.
fn invert_scaled(parts: &[Truncated], cfg: &InversionConfig) -> Result<f64> {
    let c: f64 = parts.iter().map(|p| p.zero.powi(p.count)).product();
    let mean: f64 = parts
        .iter()
        .map(|p| p.count as f64 * p.atoms.iter().map(|a| a.0 * a.1).sum::<f64>())
        .sum();
    let psi = |u: f64| -> Complex64 {
        let mut prod = Complex64::new(1.0, 0.0);
        for p in parts {
            prod *= p.cf(u).powi(p.count);
        }
        prod - c
    };
    let total: i32 = parts.iter().map(|p| p.count).sum();
    let cap = cfg.t_max;
    // Find where |ψ| has died out; otherwise taper over [cap/2, cap].
    let probe = 0.5 * PI;
    let mut last_alive = 0.0;
    let mut u = probe;
    while u <= cap {
        if psi(u).norm() > cfg.rel_tol {
            last_alive = u;
        }
        u += probe;
    }
    let (end, taper) = if last_alive + PI < 0.5 * cap {
        (last_alive + PI, false)
    } else {
        (cap, true)
    };
    let half = 0.5 * cap;
    let integrand = |u: f64| -> f64 {
        if u < 1e-8 {
            return mean - (1.0 - c);
        }
        let v = (Complex64::from_polar(1.0, -u) * psi(u)).im / u;
        if taper && u > half {
            v * 0.5 * (1.0 + (PI * (u - half) / half).cos())
        } else {
            v
        }
    };
    // Panels short enough for GK15 to see the fastest oscillation e^{−ju(1+X̃)}.
    let width = 2.0 * PI / (total as f64 + 2.0);
    let n_panels = (end / width).ceil().max(1.0) as usize;
    if 15 * n_panels > cfg.max_nodes {
        return Err(Error::NumericFailure {
            message: format!("inversion needs {n_panels} panels, over the node budget"),
            estimate: f64::NAN,
            error_bound: f64::INFINITY,
        });
    }
    let breaks: Vec<f64> = (0..=n_panels).map(|i| end * i as f64 / n_panels as f64).collect();
    let tol = Tolerance::new(cfg.rel_tol * PI, 0.0, cfg.max_nodes / 15);
    let mut f = integrand;
    let integral = integrate_from(&mut f, &breaks, tol).map_err(|e| match e {
        Error::NumericFailure {
            estimate,
            error_bound,
            ..
        } => Error::NumericFailure {
            message: "Gil-Pelaez inversion did not converge within the node budget".into(),
            estimate: (0.5 + 0.5 * c - estimate / PI).clamp(0.0, 1.0),
            error_bound: error_bound / PI,
        },
        other => other,
    })?;
    Ok((0.5 + 0.5 * c - integral.value / PI).clamp(0.0, 1.0))
}
