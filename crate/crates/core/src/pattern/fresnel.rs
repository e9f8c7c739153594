use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{domain, Result};

const SERIES_SWITCH: f64 = 1.6;

/// Fresnel integrals `C(β) = ∫₀^β cos(πt²/2) dt` and `S(β) = ∫₀^β sin(πt²/2) dt`.
pub fn fresnel_integrals(beta: f64) -> Result<(f64, f64)> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(domain(format!("fresnel argument must be finite and ≥ 0, got {beta}")));
    }
    Ok(if beta < SERIES_SWITCH {
        series(beta)
    } else {
        continued_fraction(beta)
    })
}

fn series(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 0.0);
    }
    // term_k = (-1)^k (π/2)^{2k} x^{4k+1} / (2k)!  for C, odd powers for S.
    let z = FRAC_PI_2 * x * x;
    let mut c = 0.0;
    let mut s = 0.0;
    let mut pow = x; // z^n x / n!
    let mut n = 0u32;
    loop {
        let term = pow / (2 * n + 1) as f64;
        match n % 4 {
            0 => c += term,
            1 => s += term,
            2 => c -= term,
            _ => s -= term,
        }
        if term.abs() < 1e-17 * (c.abs() + s.abs()) && n > 2 {
            break;
        }
        n += 1;
        pow *= z / n as f64;
        if n > 200 {
            break;
        }
    }
    (c, s)
}

// Modified Lentz evaluation of the continued fraction for erfc, as in the
// classical "frenel" routine.
fn continued_fraction(x: f64) -> (f64, f64) {
    let pix2 = PI * x * x;
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut n = -1.0f64;
    for _ in 0..100_000 {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = (a * d + b).inv();
        cc = b + a / cc;
        let del = cc * d;
        h *= del;
        if (del - 1.0).norm_sqr() < 1e-32 {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    let phase = Complex64::from_polar(1.0, 0.5 * pix2);
    let cs = Complex64::new(0.5, 0.5) * (Complex64::new(1.0, 0.0) - phase * h);
    (cs.re, cs.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};

    fn oracle(beta: f64) -> (f64, f64) {
        let tol = Tolerance::new(1e-13, 0.0, 20_000);
        let c = integrate(|t| (FRAC_PI_2 * t * t).cos(), 0.0, beta, tol).unwrap().value;
        let s = integrate(|t| (FRAC_PI_2 * t * t).sin(), 0.0, beta, tol).unwrap().value;
        (c, s)
    }

    #[test]
    fn zero_and_negative() {
        assert_eq!(fresnel_integrals(0.0).unwrap(), (0.0, 0.0));
        assert!(fresnel_integrals(-0.1).is_err());
        assert!(fresnel_integrals(f64::NAN).is_err());
    }

    #[test]
    fn reference_values() {
        let (c, s) = fresnel_integrals(1.0).unwrap();
        assert!((c - 0.779_893_400_376_822_8).abs() < 1e-12);
        assert!((s - 0.438_259_147_390_354_8).abs() < 1e-12);
        let (_, s2) = fresnel_integrals(2.0).unwrap();
        assert!((s2 - 0.343_415_678_363_698_2).abs() < 1e-12);
    }

    #[test]
    fn matches_quadrature_oracle() {
        let mut beta = 0.01;
        while beta <= 12.0 {
            let (c, s) = fresnel_integrals(beta).unwrap();
            let (co, so) = oracle(beta);
            assert!((c - co).abs() < 1e-10, "C({beta}) = {c} vs {co}");
            assert!((s - so).abs() < 1e-10, "S({beta}) = {s} vs {so}");
            beta += 0.137;
        }
    }

    #[test]
    fn continuous_across_switch() {
        let lo = series(SERIES_SWITCH);
        let hi = continued_fraction(SERIES_SWITCH);
        assert!((lo.0 - hi.0).abs() < 1e-12 && (lo.1 - hi.1).abs() < 1e-12);
    }

    #[test]
    fn large_argument_limit() {
        let (c, s) = fresnel_integrals(100.0).unwrap();
        // C(x) ≈ 1/2 + sin(πx²/2)/(πx), S(x) ≈ 1/2 − cos(πx²/2)/(πx).
        assert!((c - 0.5).abs() < 0.01 && (s - 0.5).abs() < 0.01);
        // High-precision reference values.
        assert!((c - 0.499_999_898_678_817_9).abs() < 1e-12);
        assert!((s - 0.496_816_901_147_837_55).abs() < 1e-12);
        let (c, s) = fresnel_integrals(37.3).unwrap();
        assert!((c - 0.492_335_575_087_333_04).abs() < 1e-12);
        assert!((s - 0.496_247_411_099_955_94).abs() < 1e-12);
    }
}
