//! Sector spatial model: binomial point process sampling, ordered and
//! conditional distance laws, and the spatial-angle law.
//!
//! The representative sector spans the physical angles
//! `[-π/N_s, π/N_s]`; users are i.i.d. uniform over its area, so the angle
//! is uniform and the distance has CDF `r²/R_c²`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};

/// Cell/sector geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorGeometry {
    n_sectors: u32,
    cell_radius: f64,
    los_radius: f64,
}

impl SectorGeometry {
    pub fn new(n_sectors: u32, cell_radius: f64, los_radius: f64) -> Result<Self> {
        if n_sectors < 1 {
            return Err(invalid("n_sectors must be at least 1"));
        }
        if !(cell_radius > 0.0 && cell_radius.is_finite()) {
            return Err(invalid(format!("cell_radius must be positive, got {cell_radius}")));
        }
        if !(los_radius >= cell_radius) {
            return Err(invalid(format!(
                "cell_radius {cell_radius} exceeds LoS radius {los_radius}"
            )));
        }
        Ok(Self {
            n_sectors,
            cell_radius,
            los_radius,
        })
    }

    pub fn n_sectors(&self) -> u32 {
        self.n_sectors
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell_radius
    }

    pub fn los_radius(&self) -> f64 {
        self.los_radius
    }

    /// Angular half-width `π/N_s` of the sector.
    pub fn half_width(&self) -> f64 {
        PI / self.n_sectors as f64
    }

    /// Largest spatial angle `(1/2)·sin(π/N_s)` reachable inside the sector.
    ///
    /// For `N_s = 1` the sector wraps the whole circle and the spatial angle
    /// is not monotone in the physical angle; the bound is then `1/2`.
    pub fn max_spatial_angle(&self) -> f64 {
        if self.n_sectors <= 2 {
            0.5
        } else {
            0.5 * self.half_width().sin()
        }
    }

    /// Sector area `π R_c² / N_s`.
    pub fn area(&self) -> f64 {
        PI * self.cell_radius * self.cell_radius / self.n_sectors as f64
    }

    pub fn contains(&self, p: &PolarPoint) -> bool {
        p.theta.abs() <= self.half_width() * (1.0 + 1e-12)
            && p.r >= 0.0
            && p.r <= self.cell_radius * (1.0 + 1e-12)
    }
}

/// A location in polar coordinates around the base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub theta: f64,
    pub r: f64,
}

impl PolarPoint {
    pub fn new(theta: f64, r: f64) -> Self {
        Self { theta, r }
    }

    /// Spatial angle `(1/2)·sin θ`.
    pub fn spatial_angle(&self) -> f64 {
        0.5 * self.theta.sin()
    }
}

/// One BPP realization, sorted by distance.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedUserSet {
    users: Vec<PolarPoint>,
}

impl OrderedUserSet {
    /// Sorts `users` ascending by distance; ties fall back to angle and then
    /// to input position.
    pub fn from_unsorted(mut users: Vec<PolarPoint>) -> Result<Self> {
        if users.is_empty() {
            return Err(invalid("a user set needs at least one user"));
        }
        // sort_by is stable, so equal (r, theta) keep their draw order
        users.sort_by(|a, b| a.r.total_cmp(&b.r).then(a.theta.total_cmp(&b.theta)));
        Ok(Self { users })
    }

    pub fn users(&self) -> &[PolarPoint] {
        &self.users
    }

    pub fn n_active(&self) -> usize {
        self.users.len()
    }

    /// The κ-th closest user, 1-based.
    pub fn user(&self, kappa: usize) -> Option<&PolarPoint> {
        kappa.checked_sub(1).and_then(|i| self.users.get(i))
    }
}

fn uniform_angle<R: Rng + ?Sized>(sector: &SectorGeometry, rng: &mut R) -> f64 {
    let h = sector.half_width();
    -h + 2.0 * h * rng.random::<f64>()
}

/// Draws `n_active` i.i.d. users uniformly over the sector.
pub fn sample_user_set<R: Rng + ?Sized>(
    sector: &SectorGeometry,
    n_active: usize,
    rng: &mut R,
) -> Result<OrderedUserSet> {
    if n_active < 1 {
        return Err(invalid("n_active must be at least 1"));
    }
    let rc = sector.cell_radius();
    let users = (0..n_active)
        .map(|_| {
            let theta = uniform_angle(sector, rng);
            let r = rc * rng.random::<f64>().sqrt();
            PolarPoint::new(theta, r)
        })
        .collect();
    OrderedUserSet::from_unsorted(users)
}

/// A CDF value together with its density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPdf {
    pub cdf: f64,
    pub pdf: f64,
}

fn check_radius(r: f64, sector: &SectorGeometry) -> Result<()> {
    if !(0.0..=sector.cell_radius()).contains(&r) {
        return Err(domain(format!(
            "distance {r} outside [0, {}]",
            sector.cell_radius()
        )));
    }
    Ok(())
}

/// Distance law of a single unordered user: `F = r²/R_c²`, `f = 2r/R_c²`.
pub fn unordered_distance_dist(r: f64, sector: &SectorGeometry) -> Result<CdfPdf> {
    check_radius(r, sector)?;
    let rc2 = sector.cell_radius().powi(2);
    Ok(CdfPdf {
        cdf: r * r / rc2,
        pdf: 2.0 * r / rc2,
    })
}

/// `ln C(n, k)` as a sum of log ratios.
pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Distance law of the κ-th closest of `n_active` users.
///
/// The CDF is `1 − Σ_{u<κ} C(N_a,u) p^u (1−p)^{N_a−u}` with `p = r²/R_c²`,
/// evaluated as the complementary sum over `u ≥ κ`;
/// binomial weights are formed in log space.
pub fn ordered_distance_dist(
    kappa: usize,
    r: f64,
    n_active: usize,
    sector: &SectorGeometry,
) -> Result<CdfPdf> {
    if n_active < 1 || kappa < 1 || kappa > n_active {
        return Err(invalid(format!(
            "kappa {kappa} must lie in [1, {n_active}]"
        )));
    }
    check_radius(r, sector)?;
    let rc = sector.cell_radius();
    let p = (r / rc).powi(2);
    let q = 1.0 - p;
    let cdf = if p == 0.0 {
        0.0
    } else if q == 0.0 {
        1.0
    } else {
        // P{at least κ of N_a users inside r}: a sum of positive terms, so it
        // keeps full relative precision in the lower tail.
        let step = (p / q).ln();
        let mut ln_t = ln_binomial(n_active, kappa)
            + kappa as f64 * p.ln()
            + (n_active - kappa) as f64 * q.ln();
        let mut logs = Vec::with_capacity(n_active - kappa + 1);
        for u in kappa..=n_active {
            logs.push(ln_t);
            if u < n_active {
                ln_t += ((n_active - u) as f64 / (u + 1) as f64).ln() + step;
            }
        }
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().map(|l| (l - top).exp()).sum();
        (top.exp() * sum).clamp(0.0, 1.0)
    };
    let pdf = if r == 0.0 {
        // density behaves like r^{2κ−1}
        0.0
    } else if q == 0.0 {
        if kappa == n_active {
            2.0 * kappa as f64 / rc
        } else {
            0.0
        }
    } else {
        let ln_pdf = (2.0 / r).ln()
            + (kappa as f64).ln()
            + ln_binomial(n_active, kappa)
            + kappa as f64 * p.ln()
            + (n_active - kappa) as f64 * q.ln();
        ln_pdf.exp()
    };
    Ok(CdfPdf { cdf, pdf })
}

/// Which side of the κ-th user an interferer lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Inner,
    Outer,
}

fn check_anchor_radius(side: Side, r_kappa: f64, sector: &SectorGeometry) -> Result<()> {
    let rc = sector.cell_radius();
    match side {
        Side::Inner if r_kappa <= 0.0 => Err(Error::DegenerateSupport(
            "inner distance law is empty when r_kappa = 0".into(),
        )),
        Side::Outer if r_kappa >= rc => Err(Error::DegenerateSupport(
            "outer distance law is empty when r_kappa = R_c".into(),
        )),
        _ if !(0.0..=rc).contains(&r_kappa) => Err(domain(format!(
            "r_kappa {r_kappa} outside [0, {rc}]"
        ))),
        _ => Ok(()),
    }
}

/// Distance law of an inner (`r < r_κ`) or outer (`r ≥ r_κ`) interferer.
pub fn conditional_distance_dist(
    side: Side,
    r: f64,
    r_kappa: f64,
    sector: &SectorGeometry,
) -> Result<CdfPdf> {
    check_anchor_radius(side, r_kappa, sector)?;
    let rc = sector.cell_radius();
    let f_k = (r_kappa / rc).powi(2);
    let pdf_parent = 2.0 * r / (rc * rc);
    let f_r = (r / rc).powi(2);
    match side {
        Side::Inner => {
            if !(0.0..=r_kappa).contains(&r) {
                return Err(domain(format!("inner distance {r} outside [0, {r_kappa})")));
            }
            Ok(CdfPdf {
                cdf: f_r / f_k,
                pdf: pdf_parent / f_k,
            })
        }
        Side::Outer => {
            if !(r_kappa..=rc).contains(&r) {
                return Err(domain(format!("outer distance {r} outside [{r_kappa}, {rc}]")));
            }
            Ok(CdfPdf {
                cdf: (f_r - f_k) / (1.0 - f_k),
                pdf: pdf_parent / (1.0 - f_k),
            })
        }
    }
}

/// Conditional CDF clamped to its support, for arbitrary `r` (including ∞).
pub(crate) fn conditional_cdf_clamped(side: Side, r: f64, r_kappa: f64, rc: f64) -> f64 {
    match side {
        Side::Inner => {
            let r = r.clamp(0.0, r_kappa);
            (r / r_kappa).powi(2)
        }
        Side::Outer => {
            let r = r.clamp(r_kappa, rc);
            (r * r - r_kappa * r_kappa) / (rc * rc - r_kappa * r_kappa)
        }
    }
}

/// Law of the spatial angle `ϑ = (1/2)·sin θ` for θ uniform on the sector.
pub fn spatial_angle_dist(vartheta: f64, sector: &SectorGeometry) -> Result<CdfPdf> {
    let bound = sector.max_spatial_angle();
    if sector.n_sectors() <= 2 {
        return Err(invalid(
            "spatial-angle law requires N_s ≥ 3 (sin θ monotone on the sector)",
        ));
    }
    if vartheta.abs() > bound * (1.0 + 1e-14) {
        return Err(domain(format!("spatial angle {vartheta} outside ±{bound}")));
    }
    let ns = sector.n_sectors() as f64;
    let x = (2.0 * vartheta).clamp(-1.0, 1.0);
    let cdf = (ns / (2.0 * PI) * (x.asin() + PI / ns)).clamp(0.0, 1.0);
    let pdf = ns / (PI * (1.0 - x * x).sqrt());
    Ok(CdfPdf { cdf, pdf })
}

/// Spatial-angle CDF extended by 0 below and 1 above the support.
pub(crate) fn spatial_angle_cdf_clamped(vartheta: f64, sector: &SectorGeometry) -> f64 {
    let bound = sector.max_spatial_angle();
    if vartheta <= -bound {
        0.0
    } else if vartheta >= bound {
        1.0
    } else {
        let ns = sector.n_sectors() as f64;
        (ns / (2.0 * PI) * ((2.0 * vartheta).asin() + PI / ns)).clamp(0.0, 1.0)
    }
}

/// Draws the inner/outer interferers around a user pinned at `anchor`.
///
/// The returned set has the anchor at position `kappa` (1-based) with
/// `kappa − 1` inner users and `n_active − kappa` outer users.
pub fn sample_conditional_user_set<R: Rng + ?Sized>(
    kappa: usize,
    anchor: PolarPoint,
    n_active: usize,
    sector: &SectorGeometry,
    rng: &mut R,
) -> Result<OrderedUserSet> {
    if kappa < 1 || kappa > n_active {
        return Err(invalid(format!("kappa {kappa} must lie in [1, {n_active}]")));
    }
    if !sector.contains(&anchor) {
        return Err(domain(format!("anchor {anchor:?} outside the sector")));
    }
    let rc = sector.cell_radius();
    let rk = anchor.r;
    if kappa > 1 && rk <= 0.0 {
        return Err(Error::DegenerateSupport(
            "no room for inner users when the anchor sits at r = 0".into(),
        ));
    }
    if kappa < n_active && rk >= rc {
        return Err(Error::DegenerateSupport(
            "no room for outer users when the anchor sits at r = R_c".into(),
        ));
    }
    let mut users = Vec::with_capacity(n_active);
    for _ in 1..kappa {
        let theta = uniform_angle(sector, rng);
        let r = rk * rng.random::<f64>().sqrt();
        users.push(PolarPoint::new(theta, r));
    }
    users.push(anchor);
    let rk2 = rk * rk;
    for _ in kappa..n_active {
        let theta = uniform_angle(sector, rng);
        let u = rng.random::<f64>();
        let r = (rk2 + u * (rc * rc - rk2)).sqrt().max(rk);
        users.push(PolarPoint::new(theta, r));
    }
    users[..kappa - 1].sort_by(|a, b| a.r.total_cmp(&b.r).then(a.theta.total_cmp(&b.theta)));
    users[kappa..].sort_by(|a, b| a.r.total_cmp(&b.r).then(a.theta.total_cmp(&b.theta)));
    Ok(OrderedUserSet { users })
}
