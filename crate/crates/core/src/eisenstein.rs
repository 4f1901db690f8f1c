//! The completed Eisenstein series `E_T^*(x+iy)` on the critical line via its
//! Fourier expansion
//!
//! `E_T^* = μ y^{1/2+iT} + μ̄ y^{1/2-iT} + ρ^*(1) Σ_{n≠0} τ_{iT}(n) e(nx) |n|^{-1/2} V_T(2π|n|y)`.

use crate::arith_coeffs::{build_table, DivisorTable};
use crate::special::{
    bessel_k_scaled_tol, k_scaled_envelope_ln, ln_cosh_pi, theta, zeta, ScaledComplex, BESSEL_TOL,
};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Residuals of the structural identities checked when a context is built.
#[derive(Clone, Copy, Debug)]
pub struct ContextDiagnostics {
    /// `| |μ| - 1 |`
    pub mu_unit: f64,
    /// relative residual of `|ρ^*(1)|² / cosh(πT) = (2/π) / |ζ(1+2iT)|²`
    pub normalization: f64,
}

#[derive(Clone, Debug)]
pub struct SpectralContext {
    pub t: f64,
    pub theta_half: ScaledComplex,
    pub mu: Complex64,
    pub rho_star: ScaledComplex,
    /// `ρ^*(1) e^{-πT/2}`, an O(1) number.
    pub rho_scaled: f64,
    pub zeta_1_2it: Complex64,
    pub table: DivisorTable,
    pub diagnostics: ContextDiagnostics,
}

pub fn make_context(t: f64, n_max: usize) -> Result<SpectralContext> {
    let table = build_table(n_max.max(1), t)?;
    context_with_table(t, table)
}

/// Context around an existing table; the table's `T` must match.
pub fn context_with_table(t: f64, table: DivisorTable) -> Result<SpectralContext> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("spectral parameter T = {t} must be positive")));
    }
    if table.t.to_bits() != t.to_bits() {
        return Err(Error::Invalid(format!("table built for T = {}, context wants {t}", table.t)));
    }
    let theta_half = theta(Complex64::new(0.5, t))?;
    let mu = theta_half.mantissa / theta_half.mantissa.norm();
    let rho_star = ScaledComplex::from_real((2.0 / PI).sqrt()) / theta_half.abs();
    let rho_scaled = rho_star.scale_exp(-0.5 * PI * t).re();
    let zeta_1_2it = zeta(Complex64::new(1.0, 2.0 * t))?;
    let lhs = rho_star.norm_sqr().scale_exp(-ln_cosh_pi(t)).re();
    let rhs = (2.0 / PI) / zeta_1_2it.norm_sqr();
    let diagnostics = ContextDiagnostics { mu_unit: (mu.norm() - 1.0).abs(), normalization: (lhs / rhs - 1.0).abs() };
    Ok(SpectralContext { t, theta_half, mu, rho_star, rho_scaled, zeta_1_2it, table, diagnostics })
}

/// `ρ^*(1) e^{-πT/2}` from `|θ(1/2+iT)|`.
pub fn rho_scaled(t: f64) -> Result<f64> {
    let th = theta(Complex64::new(0.5, t))?;
    Ok((ScaledComplex::from_real((2.0 / PI).sqrt()) / th.abs()).scale_exp(-0.5 * PI * t).re())
}

/// Smallest `n*` such that the Fourier terms with `|n| > n*` sum to less
/// than `tol` in absolute value, and at least `⌈(T + 10 T^{1/3}) / 2πy⌉`.
pub fn truncation_index(y: f64, t: f64, tol: f64) -> Result<usize> {
    Ok(truncation_index_rho(y, t, tol, rho_scaled(t)?))
}

/// As [`truncation_index`] with `ρ^*(1) e^{-πT/2}` supplied.
///
/// Past the turning point `u = 2πny > T`, `|e^{πT/2}K_{iT}(u)|` is bounded by
/// `e^{T acos(T/u)} K_0(√(u²-T²))`; with `|τ(n)| <= 2√n` the `±n` terms are
/// at most `4ρ √(2πy n) B(u_n)`, and their ratio decreases in `n`, so the tail
/// is dominated by a geometric series.
pub fn truncation_index_rho(y: f64, t: f64, tol: f64, rho: f64) -> usize {
    assert!(y > 0.0 && tol > 0.0);
    let step = 2.0 * PI * y;
    let base = ((t + 10.0 * t.cbrt()) / step).ceil().max(1.0) as usize;
    let first_past = (t / step).floor() as usize + 1;
    let mut n = base.max(first_past);
    let ln_pref = (4.0 * rho.abs().max(1e-300) * step.sqrt()).ln();
    loop {
        let m = (n + 1) as f64;
        let u = step * m;
        if u > t {
            let ln_term = ln_pref + 0.5 * m.ln() + k_scaled_envelope_ln(t, u);
            let c = (u * u - t * t).sqrt();
            let ln_q = 0.5 / m - step * c / u;
            if ln_q < 0.0 {
                let ln_tail = ln_term - (1.0 - ln_q.exp()).ln();
                if ln_tail < tol.ln() {
                    return n;
                }
            }
        }
        n += 1;
    }
}

/// One horizontal slice `y = const` of the expansion: `E(x) = c0 + Σ a_n cos(2πnx)`.
#[derive(Clone, Debug)]
pub struct YSlice {
    pub y: f64,
    pub c0: f64,
    /// `amps[n-1] = 2 ρ^*(1) τ(n) n^{-1/2} V_T(2πny)`
    pub amps: Vec<f64>,
}

impl YSlice {
    pub fn eval(&self, x: f64) -> f64 {
        let x = x - x.floor();
        let r = Complex64::from_polar(1.0, 2.0 * PI * x);
        let mut e = r;
        let mut acc = 0.0;
        for (k, &a) in self.amps.iter().enumerate() {
            // re-anchor the rotation every 64 steps
            if k % 64 == 63 {
                let n = (k + 1) as f64;
                e = Complex64::from_polar(1.0, 2.0 * PI * (n * x).fract());
            }
            acc += a * e.re;
            e *= r;
        }
        self.c0 + acc
    }
}

impl SpectralContext {
    /// `2√y Re(μ y^{iT})`.
    pub fn constant_term(&self, y: f64) -> f64 {
        2.0 * y.sqrt() * (self.mu * Complex64::from_polar(1.0, self.t * y.ln())).re
    }

    pub fn truncation(&self, y: f64, tol: f64) -> usize {
        truncation_index_rho(y, self.t, tol, self.rho_scaled)
    }

    /// Fourier data at height `y`, truncated for absolute accuracy `tol`.
    pub fn slice(&self, y: f64, tol: f64) -> Result<YSlice> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("y = {y} must be positive")));
        }
        let n = self.truncation(y, tol);
        self.slice_n(y, n)
    }

    /// Fourier data at height `y` with exactly `n` positive frequencies.
    pub fn slice_n(&self, y: f64, n: usize) -> Result<YSlice> {
        self.table.require(n)?;
        let pref = 2.0 * self.rho_scaled * (2.0 * PI * y).sqrt();
        let mut amps = Vec::with_capacity(n);
        for k in 1..=n {
            let u = 2.0 * PI * k as f64 * y;
            let kv = bessel_k_scaled_tol(self.t, u, BESSEL_TOL)?.re();
            amps.push(pref * self.table.get(k) * kv);
        }
        Ok(YSlice { y, c0: self.constant_term(y), amps })
    }
}

/// `E_T^*(x+iy)` with truncation error below `tol`.
pub fn eval_e_star(ctx: &SpectralContext, x: f64, y: f64, tol: f64) -> Result<f64> {
    Ok(ctx.slice(y, tol)?.eval(x))
}
