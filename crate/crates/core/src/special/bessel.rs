//! `e^{πT/2} K_{iT}(y)` for real `T >= 0`, `y > 0`.
//!
//! Starting from `K_{iT}(y) = Re ∫_0^∞ exp(-y cosh t - iTt) dt`, the path is
//! moved to `t = v + i w(v)` with `w` piecewise linear through the relevant
//! saddle of `f(t) = -y cosh t - iTt`:
//!
//! * `y < T`: saddle at `acosh(T/y) - iπ/2`, crossed at 45 degrees, where the
//!   phase is stationary and `Re f` drops like a Gaussian on both sides.
//! * `y >= T`: saddle at `-i asin(T/y)`, left at 30 degrees so the cubic term
//!   still descends when the saddle degenerates at `y = T`.
//!
//! Each linear piece is cut where `Re f` has dropped `CUT` below the saddle
//! value and integrated with tanh-sinh.

use super::ScaledComplex;
use crate::quad::{tanh_sinh, trapezoid_decayed};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

pub const T_MAX: f64 = 5000.0;
pub const DEFAULT_TOL: f64 = 1e-13;
const CUT: f64 = 46.0;

#[derive(Clone, Copy)]
struct Path {
    y: f64,
    t: f64,
    // f at the saddle
    fs: Complex64,
}

impl Path {
    /// `f(v + i w) - f_s`.
    fn rel_exponent(&self, v: f64, w: f64) -> Complex64 {
        let ev = v.exp();
        let (ch, sh) = (0.5 * (ev + 1.0 / ev), 0.5 * (ev - 1.0 / ev));
        let (sw, cw) = w.sin_cos();
        let re = -self.y * ch * cw + self.t * w;
        let im = -self.y * sh * sw - self.t * v;
        Complex64::new(re - self.fs.re, im - self.fs.im)
    }

    fn integrand(&self, v: f64, w: f64, slope: f64) -> Complex64 {
        let e = self.rel_exponent(v, w);
        if e.re < -700.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(e.re.exp(), e.im) * Complex64::new(1.0, slope)
    }

    /// Integrate along `w = w0 + slope (v - v0)` for `v` in `[lo, hi]`.
    fn segment(&self, lo: f64, hi: f64, v0: f64, w0: f64, slope: f64, tol: f64) -> Complex64 {
        if hi <= lo {
            return Complex64::new(0.0, 0.0);
        }
        let f = |v: f64| self.integrand(v, w0 + slope * (v - v0), slope);
        // flat pieces oscillate at frequency up to about T; split them so each
        // chunk holds a few periods
        let len = hi - lo;
        let chunks = if slope == 0.0 { ((len * self.t.max(1.0)) / (8.0 * PI)).ceil().max(1.0) as usize } else { 1 };
        let h = len / chunks as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..chunks {
            let a = lo + k as f64 * h;
            let b = if k + 1 == chunks { hi } else { a + h };
            acc += tanh_sinh(f, a, b, tol / chunks as f64).0;
        }
        acc
    }

    /// Point in `[near, far]` where `Re(f - f_s)` reaches `-CUT`, assuming it
    /// decreases monotonically from `near` towards `far`; `None` if it never does.
    fn cut_point(&self, near: f64, far: f64, w_at: impl Fn(f64) -> f64) -> Option<f64> {
        let r = |v: f64| self.rel_exponent(v, w_at(v)).re;
        if r(far) > -CUT {
            return None;
        }
        let (mut a, mut b) = (near, far);
        for _ in 0..14 {
            let m = 0.5 * (a + b);
            if r(m) > -CUT {
                a = m;
            } else {
                b = m;
            }
        }
        Some(b)
    }

    /// End of a flat piece at height `w`, where `Re(f - f_s)` passes `-CUT`.
    fn flat_end(&self, w: f64) -> f64 {
        let c = (self.t * w - self.fs.re + CUT) / (self.y * w.cos());
        c.max(1.0).acosh() + 1e-3
    }
}

/// `e^{πT/2} K_{iT}(y)` with the default tolerance.
pub fn bessel_k_scaled(t: f64, y: f64) -> Result<ScaledComplex> {
    bessel_k_scaled_tol(t, y, DEFAULT_TOL)
}

/// `e^{πT/2} K_{iT}(y)`; `tol` bounds each contour piece's level-to-level change,
/// measured relative to the saddle magnitude.
pub fn bessel_k_scaled_tol(t: f64, y: f64, tol: f64) -> Result<ScaledComplex> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::Domain(format!("bessel_k_scaled: y = {y} must be positive")));
    }
    if !(t >= 0.0) || t > T_MAX {
        return Err(Error::Domain(format!("bessel_k_scaled: T = {t} outside [0, {T_MAX}]")));
    }
    let (re, log_scale) = if y < t { oscillatory(t, y, tol) } else { decaying(t, y, tol) };
    Ok(ScaledComplex::new(Complex64::new(re, 0.0), log_scale))
}

fn oscillatory(t: f64, y: f64, tol: f64) -> (f64, f64) {
    let a = (t / y).acosh();
    let sh = (t * t - y * y).sqrt();
    let p = Path { y, t, fs: Complex64::new(-t * FRAC_PI_2, sh - t * a) };
    let line = |v: f64| -FRAC_PI_2 + (v - a);
    let (delta, eps) = (1.2, FRAC_PI_2);
    let mut acc = Complex64::new(0.0, 0.0);

    let right = p.cut_point(a, a + delta, line);
    let lo = (a - eps).max(0.0);
    let left = p.cut_point(a, lo, line);
    if let (Some(l), Some(r)) = (left, right) {
        // the whole Gaussian-like bump lies on one straight line through the saddle
        let sigma = (2.0 * sh).sqrt().recip();
        let n0 = ((r - l) / sigma).ceil() as usize;
        let f = |v: f64| p.integrand(v, line(v), 1.0);
        let acc = trapezoid_decayed(f, l, r, n0, tol).0;
        let phase = Complex64::from_polar(1.0, p.fs.im);
        return ((acc * phase).re, 0.0);
    }
    // right of the saddle
    match right {
        Some(c) => acc += p.segment(a, c, a, -FRAC_PI_2, 1.0, tol),
        None => {
            acc += p.segment(a, a + delta, a, -FRAC_PI_2, 1.0, tol);
            let wf = -FRAC_PI_2 + delta;
            acc += p.segment(a + delta, p.flat_end(wf), a, wf, 0.0, tol);
        }
    }
    // left of the saddle
    match left {
        Some(c) => acc += p.segment(c, a, a, -FRAC_PI_2, 1.0, tol),
        None => {
            acc += p.segment(lo, a, a, -FRAC_PI_2, 1.0, tol);
            if a > eps {
                let wd = -FRAC_PI_2 - eps;
                let peak = p.rel_exponent(a - eps, wd).re;
                if peak > -CUT {
                    acc += p.segment(0.0, a - eps, 0.0, wd, 0.0, tol);
                }
            }
        }
    }
    let phase = Complex64::from_polar(1.0, p.fs.im);
    ((acc * phase).re, 0.0)
}

fn decaying(t: f64, y: f64, tol: f64) -> (f64, f64) {
    let phi = (t / y).min(1.0).asin();
    let c = (y * y - t * t).max(0.0).sqrt();
    let p = Path { y, t, fs: Complex64::new(-c - t * phi, 0.0) };
    if c >= 2.0 * t.powf(2.0 / 3.0) {
        // the horizontal line through the saddle is symmetric about v = 0 and
        // its cubic phase stays small across the Gaussian width 1/sqrt(c)
        let end = p.flat_end(-phi);
        let sigma = c.sqrt().recip();
        let n0 = (end / sigma).ceil() as usize + 2;
        let f = |v: f64| p.integrand(v, -phi, 0.0);
        let acc = trapezoid_decayed(f, 0.0, end, n0, tol).0;
        return (acc.re, p.fs.re + t * FRAC_PI_2);
    }
    let slope = FRAC_PI_6.tan();
    let len = 0.5 * phi / slope;
    let line = |v: f64| -phi + slope * v;
    let mut acc = Complex64::new(0.0, 0.0);
    let cut = if len > 0.0 { p.cut_point(0.0, len, line) } else { None };
    match cut {
        Some(cv) => acc += p.segment(0.0, cv, 0.0, -phi, slope, tol),
        None => {
            acc += p.segment(0.0, len, 0.0, -phi, slope, tol);
            let wf = -0.5 * phi;
            acc += p.segment(len, p.flat_end(wf), len, wf, 0.0, tol);
        }
    }
    (acc.re, p.fs.re + t * FRAC_PI_2)
}

/// Certified upper bound for `|e^{πT/2} K_{iT}(u)|` when `u > T`:
/// `e^{T acos(T/u)} K_0(√(u²-T²))` with `K_0(w) <= √(π/2w) e^{-w}`.
pub fn k_scaled_envelope_ln(t: f64, u: f64) -> f64 {
    assert!(u > t);
    let c = (u * u - t * t).sqrt();
    t * (t / u).acos() - c + 0.5 * (PI / (2.0 * c)).ln()
}
