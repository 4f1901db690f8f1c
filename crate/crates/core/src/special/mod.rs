//! Scaled complex arithmetic and the special functions used throughout:
//! `ln Γ`, `ζ`, `θ(s) = π^{-s} Γ(s) ζ(2s)`, `e^{πT/2} K_{iT}` and the gamma
//! factors of `V_T(y) = √y K_{iT}(y)` and its square.

mod bessel;
mod gamma;
mod scaled;
mod zeta;

pub use bessel::{bessel_k_scaled, bessel_k_scaled_tol, k_scaled_envelope_ln, DEFAULT_TOL as BESSEL_TOL, T_MAX};
pub use gamma::log_gamma;
pub use scaled::ScaledComplex;
pub use zeta::{zeta, zeta_cutoff, zeta_em, DEFAULT_MARGIN as ZETA_MARGIN};

use crate::Result;
use num_complex::Complex64;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `θ(s) = π^{-s} Γ(s) ζ(2s)`.
pub fn theta(s: Complex64) -> Result<ScaledComplex> {
    let lg = log_gamma(s)?;
    let z = zeta(2.0 * s)?;
    Ok(ScaledComplex::from_log(lg - s * PI.ln()) * ScaledComplex::from_complex(z))
}

/// `γ_{V_T}(1/2 + s) = ∫_0^∞ V_T(2πy) y^s dy/y`
/// `= 2^{-3/2} π^{-s} Γ((1/2+s+iT)/2) Γ((1/2+s-iT)/2)`.
pub fn gamma_vt(t: f64, s: Complex64) -> Result<ScaledComplex> {
    let a = log_gamma((0.5 + s + c(0.0, t)) * 0.5)?;
    let b = log_gamma((0.5 + s - c(0.0, t)) * 0.5)?;
    Ok(ScaledComplex::from_log(a + b - s * PI.ln() - 1.5 * 2f64.ln()))
}

/// `γ_{V_T²}(1 + s) = ∫_0^∞ V_T(2πy)² y^s dy/y`
/// `= 2^{-2} π^{-s} Γ((1+s+2iT)/2) Γ((1+s)/2)² Γ((1+s-2iT)/2) / Γ(1+s)`.
pub fn gamma_vt2(t: f64, s: Complex64) -> Result<ScaledComplex> {
    let a = log_gamma((1.0 + s + c(0.0, 2.0 * t)) * 0.5)?;
    let b = log_gamma((1.0 + s) * 0.5)?;
    let d = log_gamma((1.0 + s - c(0.0, 2.0 * t)) * 0.5)?;
    let e = log_gamma(1.0 + s)?;
    Ok(ScaledComplex::from_log(a + 2.0 * b + d - e - s * PI.ln() - 2.0 * 2f64.ln()))
}

/// `ln cosh(πT)` without overflow.
pub fn ln_cosh_pi(t: f64) -> f64 {
    let x = PI * t.abs();
    x + (0.5 * (1.0 + (-2.0 * x).exp())).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_values() {
        let v = theta(c(1.0, 0.0)).unwrap().to_complex();
        assert!((v - c(PI / 6.0, 0.0)).norm() < 1e-15);
        let s = c(0.5, 10.0);
        let direct = (log_gamma(s).unwrap() - s * PI.ln()).exp() * zeta(2.0 * s).unwrap();
        let got = theta(s).unwrap().to_complex();
        assert!((got - direct).norm() < 1e-12 * direct.norm());
        let conj = theta(s.conj()).unwrap().to_complex();
        assert!((conj - got.conj()).norm() < 1e-14 * got.norm());
    }

    #[test]
    fn gamma_vt_closed_values() {
        let v = gamma_vt(0.0, c(0.5, 0.0)).unwrap().to_complex();
        assert!((v.re - 2f64.powf(-1.5) * PI.sqrt()).abs() < 1e-15);
        for t in [0.0, 3.0, 40.0] {
            let g = gamma_vt(t, c(0.3, 0.0)).unwrap().to_complex();
            assert!(g.im.abs() < 1e-14 * g.norm());
        }
        let v2 = gamma_vt2(0.0, c(0.0, 0.0)).unwrap().to_complex();
        assert!((v2.re - PI * PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_vt2_at_one_is_pi_squared_over_four_cosh() {
        for t in [1.0, 10.0, 250.0, 1000.0, 4000.0] {
            let g = gamma_vt2(t, c(0.0, 0.0)).unwrap().scale_exp(ln_cosh_pi(t)).to_complex();
            assert!((g.re - PI * PI / 4.0).abs() < 1e-11, "T={t}: {g}");
        }
    }
}
