//! Divisor-coefficient Dirichlet polynomials and correlation sums:
//! `I(Δ,T,x,N)` by two routes, the diagonal and shifted-divisor main terms,
//! the off-diagonal main term `MT_OD`, the dyadic sums of `Q(x,H)`, mean
//! values of Dirichlet polynomials, and the sieve quantities on primes.

use crate::arith_coeffs::{primes_up_to, sigma1_segment, sigma_minus1, DivisorTable};
use crate::quad::GaussLegendre;
use crate::reduce::{pairwise_sum, pairwise_sum_c, par_map, ranges};
use crate::special::zeta;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::OnceLock;

pub const ZETA2: f64 = PI * PI / 6.0;

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e(θ) = exp(2πiθ)` with `θ` reduced mod 1 first.
fn e1(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (theta - theta.floor()))
}

/// `exp(β - β/(1-v²))` on `(-1, 1)`: a bump with peak 1 at `v = 0`.
pub fn peaked_bump(v: f64, beta: f64) -> f64 {
    if v.abs() >= 1.0 {
        0.0
    } else {
        (beta - beta / (1.0 - v * v)).exp()
    }
}

/// The default `w₂`: `peaked_bump` with `β = 1` on `[1/2, 2]`.
pub fn w2(u: f64) -> f64 {
    peaked_bump((4.0 * u - 5.0) / 3.0, 1.0)
}

pub const W1_BETA: f64 = 16.0;
const HAT_POINTS: usize = 1 << 16;
const HAT_XI_MAX: f64 = 48.0;
/// `|ŵ₁(ξ)| / ŵ₁(0)` past the tail point.
pub const HAT_TAIL_REL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum W1Shape {
    /// `peaked_bump` with `β = 16` on `[1/2, 2]`.
    Bump,
    /// `g * g` for `g` the `β = 16` bump on `[-1/2, 1/2]`, normalized to
    /// `w₁(0) = 1`; even, so `ŵ₁ = ĝ² / (g*g)(0) >= 0`.
    SelfConvolution,
}

/// A weight `w₁` with its Fourier transform `ŵ₁(ξ) = ∫ w₁(v) e(-ξv) dv`
/// tabulated on `[0, 48]` and interpolated by cubic Hermite splines.
#[derive(Debug)]
pub struct Kernel {
    pub shape: W1Shape,
    pub support: (f64, f64),
    /// beyond this `|ŵ₁| < 1e-13 ŵ₁(0)`
    pub xi_tail: f64,
    step: f64,
    vals: Vec<Complex64>,
    ders: Vec<Complex64>,
    conv_norm: f64,
}

fn g_even(v: f64) -> f64 {
    peaked_bump(2.0 * v, W1_BETA)
}

/// `ĝ(ξ)` and `ĝ'(ξ)` on the grid `k·ξmax/K` for a function on `[a, b]`.
fn transform_table(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let gl = GaussLegendre::new(16);
    let (ts, ws) = gl.composite(a, b, 64);
    let fw: Vec<f64> = ts.iter().zip(&ws).map(|(&t, &w)| w * f(t)).collect();
    let step = HAT_XI_MAX / HAT_POINTS as f64;
    let chunks = ranges(HAT_POINTS + 1, 1024);
    let parts = par_map(chunks.len(), |c| {
        let r = chunks[c].clone();
        let mut v = vec![cz(0.0, 0.0); r.len()];
        let mut d = vec![cz(0.0, 0.0); r.len()];
        for (j, &t) in ts.iter().enumerate() {
            if fw[j] == 0.0 {
                continue;
            }
            let rot = Complex64::from_polar(1.0, -2.0 * PI * step * t);
            let mut e = cz(0.0, 0.0);
            for (i, k) in r.clone().enumerate() {
                if i % 128 == 0 {
                    e = e1(-(k as f64 * step * t));
                }
                v[i] += fw[j] * e;
                d[i] += fw[j] * cz(0.0, -2.0 * PI * t) * e;
                e *= rot;
            }
        }
        (v, d)
    });
    let mut vals = Vec::with_capacity(HAT_POINTS + 1);
    let mut ders = Vec::with_capacity(HAT_POINTS + 1);
    for (v, d) in parts {
        vals.extend(v);
        ders.extend(d);
    }
    (vals, ders)
}

impl Kernel {
    fn build(shape: W1Shape) -> Kernel {
        let step = HAT_XI_MAX / HAT_POINTS as f64;
        let (support, vals, ders, conv_norm) = match shape {
            W1Shape::Bump => {
                let (v, d) = transform_table(|t| peaked_bump((4.0 * t - 5.0) / 3.0, W1_BETA), 0.5, 2.0);
                ((0.5, 2.0), v, d, 1.0)
            }
            W1Shape::SelfConvolution => {
                let (g, gd) = transform_table(g_even, -0.5, 0.5);
                let gl = GaussLegendre::new(16);
                let c = gl.integrate(-0.5, 0.5, 64, |s| g_even(s) * g_even(s));
                // ĝ is real for even g
                let v = g.iter().map(|z| cz(z.re * z.re / c, 0.0)).collect();
                let d = g.iter().zip(&gd).map(|(z, dz)| cz(2.0 * z.re * dz.re / c, 0.0)).collect();
                ((-1.0, 1.0), v, d, c)
            }
        };
        let peak = vals[0].norm();
        let last = vals.iter().rposition(|z| z.norm() >= HAT_TAIL_REL * peak).unwrap_or(0);
        Kernel { shape, support, xi_tail: (last + 1) as f64 * step, step, vals, ders, conv_norm }
    }

    pub fn get(shape: W1Shape) -> &'static Kernel {
        static BUMP: OnceLock<Kernel> = OnceLock::new();
        static CONV: OnceLock<Kernel> = OnceLock::new();
        match shape {
            W1Shape::Bump => BUMP.get_or_init(|| Kernel::build(W1Shape::Bump)),
            W1Shape::SelfConvolution => CONV.get_or_init(|| Kernel::build(W1Shape::SelfConvolution)),
        }
    }

    /// `w₁(v)`.
    pub fn w(&self, v: f64) -> f64 {
        match self.shape {
            W1Shape::Bump => peaked_bump((4.0 * v - 5.0) / 3.0, W1_BETA),
            W1Shape::SelfConvolution => {
                if v.abs() >= 1.0 {
                    return 0.0;
                }
                let (a, b) = ((v - 0.5).max(-0.5), (v + 0.5).min(0.5));
                let gl = GaussLegendre::new(16);
                gl.integrate(a, b, 16, |s| g_even(s) * g_even(v - s)) / self.conv_norm
            }
        }
    }

    /// `ŵ₁(ξ)`; zero past the tabulated range.
    pub fn hat(&self, xi: f64) -> Complex64 {
        if xi < 0.0 {
            return self.hat(-xi).conj();
        }
        let p = xi / self.step;
        let k = p as usize;
        if k >= HAT_POINTS {
            return cz(0.0, 0.0);
        }
        let s = p - k as f64;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = 3.0 * s2 - 2.0 * s3;
        let h11 = s3 - s2;
        self.vals[k] * h00 + self.ders[k] * (h10 * self.step) + self.vals[k + 1] * h01 + self.ders[k + 1] * (h11 * self.step)
    }

    /// `∫ w₁ = ŵ₁(0)`.
    pub fn mass(&self) -> f64 {
        self.vals[0].re
    }
}

/// One dyadic block `|t - T| ≍ Δ` with Dirichlet polynomial length `N = √(ΔT)`.
#[derive(Clone, Copy, Debug)]
pub struct DyadicBlock {
    pub delta: f64,
    pub t: f64,
    /// `N² = delta · t`
    pub n_sq: f64,
    pub n: f64,
    pub w1: &'static Kernel,
}

impl DyadicBlock {
    pub fn new(delta: f64, t: f64) -> Result<Self> {
        Self::with_shape(delta, t, W1Shape::Bump)
    }

    pub fn with_shape(delta: f64, t: f64, shape: W1Shape) -> Result<Self> {
        if !(delta >= 1.0 && t > 0.0 && delta <= t) {
            return Err(Error::Invalid(format!("dyadic block needs 1 <= Δ <= T, got Δ = {delta}, T = {t}")));
        }
        let n_sq = delta * t;
        Ok(DyadicBlock { delta, t, n_sq, n: n_sq.sqrt(), w1: Kernel::get(shape) })
    }

    /// Range of `n` with `w₂(n/N) > 0`.
    pub fn n_range(&self) -> (usize, usize) {
        let lo = (0.5 * self.n).floor() as usize + 1;
        let hi = (2.0 * self.n).ceil() as usize - 1;
        (lo.max(1), hi)
    }

    /// `b_n = τ(n) e(nx) n^{-1/2-iT} w₂(n/N)` for `n` in `n_range`.
    pub fn coefficients(&self, x: f64, table: &DivisorTable) -> Result<Vec<Complex64>> {
        let (lo, hi) = self.n_range();
        table.require(((2.0 * self.n).ceil() as usize).max(hi))?;
        Ok((lo..=hi)
            .map(|n| {
                let nf = n as f64;
                let amp = table.get(n) * w2(nf / self.n) / nf.sqrt();
                let ph = 2.0 * PI * (nf * x - (nf * x).floor()) - self.t * nf.ln();
                Complex64::from_polar(amp, ph)
            })
            .collect())
    }

    /// Coefficients with `e(nx)` replaced by an arbitrary `twist(n)`.
    pub fn twisted_coefficients(
        &self,
        table: &DivisorTable,
        twist: impl Fn(usize) -> Complex64,
    ) -> Result<Vec<Complex64>> {
        let (lo, hi) = self.n_range();
        table.require(((2.0 * self.n).ceil() as usize).max(hi))?;
        Ok((lo..=hi)
            .map(|n| {
                let nf = n as f64;
                let amp = table.get(n) * w2(nf / self.n) / nf.sqrt();
                Complex64::from_polar(amp, -self.t * nf.ln()) * twist(n)
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IDeltaRecord {
    /// value returned by the opened double sum
    pub value: f64,
    pub route_a: f64,
    pub route_b: f64,
    pub rel_gap: f64,
    /// `m = n` part of the double sum
    pub diagonal: f64,
    pub t_nodes: usize,
}

/// `I(Δ,T,x,N) = ∫ w₁((T-t)/Δ) |Σ τ(n) e(nx) n^{-1/2-it} w₂(n/N)|² dt` by
/// quadrature in `t` (route A) and by opening the square (route B).
pub fn i_delta(block: &DyadicBlock, x: f64, table: &DivisorTable) -> Result<IDeltaRecord> {
    let b = block.coefficients(x, table)?;
    Ok(i_delta_coeffs(block, &b))
}

/// Both routes for coefficients `b` indexed from `n_range().0`.
pub fn i_delta_coeffs(block: &DyadicBlock, b: &[Complex64]) -> IDeltaRecord {
    let (lo, _) = block.n_range();
    let (route_a, nodes) = route_a(block, b, lo);
    let (route_b, diagonal) = route_b(block, b, lo);
    IDeltaRecord {
        value: route_b,
        route_a,
        route_b,
        rel_gap: (route_a - route_b).abs() / route_b.abs(),
        diagonal,
        t_nodes: nodes,
    }
}

/// `Δ ∫ w₁(v) |Σ b_n n^{iΔv}|² dv` with `t = T - Δv`.
fn route_a(block: &DyadicBlock, b: &[Complex64], lo: usize) -> (f64, usize) {
    let (a, z) = block.w1.support;
    let hi = lo + b.len() - 1;
    let spread = (hi as f64 / lo as f64).ln();
    let panels = (block.delta * spread * (z - a) / 3.0).ceil() as usize + 32;
    let gl = GaussLegendre::new(16);
    let (vs, ws) = gl.composite(a, z, panels);
    let logs: Vec<f64> = (lo..=hi).map(|n| (n as f64).ln()).collect();
    let vals = par_map(vs.len(), |k| {
        let wv = block.w1.w(vs[k]);
        if wv == 0.0 {
            return 0.0;
        }
        let terms: Vec<Complex64> = b
            .iter()
            .zip(&logs)
            .map(|(bn, ln)| bn * Complex64::from_polar(1.0, block.delta * vs[k] * ln))
            .collect();
        ws[k] * wv * pairwise_sum_c(&terms).norm_sqr()
    });
    (block.delta * pairwise_sum(&vals), vs.len())
}

/// `Δ Σ_{m,n} b_m conj(b_n) ŵ₁(Δ log(n/m) / 2π)`, returned with its diagonal.
fn route_b(block: &DyadicBlock, b: &[Complex64], lo: usize) -> (f64, f64) {
    let logs: Vec<f64> = (0..b.len()).map(|i| ((lo + i) as f64).ln()).collect();
    let reach = 2.0 * PI * block.w1.xi_tail / block.delta;
    let scale = block.delta / (2.0 * PI);
    let rows = par_map(b.len(), |i| {
        let mut terms = Vec::new();
        for j in i + 1..b.len() {
            let d = logs[j] - logs[i];
            if d > reach {
                break;
            }
            terms.push(b[j].conj() * block.w1.hat(scale * d));
        }
        (b[i] * pairwise_sum_c(&terms)).re
    });
    let sq: Vec<f64> = b.iter().map(|z| z.norm_sqr()).collect();
    let diagonal = block.delta * block.w1.mass() * pairwise_sum(&sq);
    (diagonal + 2.0 * block.delta * pairwise_sum(&rows), diagonal)
}

/// `2 Σ |b_n|² (L Δ + 3π(n+1))`, `L` the length of the support of `w₁`
/// (`w₁ <= 1`), the mean-value envelope for `I(Δ,T,x,N)`.
pub fn mv_envelope(block: &DyadicBlock, x: f64, table: &DivisorTable) -> Result<f64> {
    let b = block.coefficients(x, table)?;
    let (lo, _) = block.n_range();
    let len = block.w1.support.1 - block.w1.support.0;
    let terms: Vec<f64> =
        b.iter().enumerate().map(|(i, z)| z.norm_sqr() * (len * block.delta + 3.0 * PI * ((lo + i) as f64 + 1.0))).collect();
    Ok(2.0 * pairwise_sum(&terms))
}

/// `∫_0^U |Σ_{n>=1} a_n n^{-iu}|² du` in closed form (`a[0]` is `a_1`).
pub fn mean_value_exact(a: &[Complex64], u: f64) -> f64 {
    let logs: Vec<f64> = (1..=a.len()).map(|n| (n as f64).ln()).collect();
    let rows = par_map(a.len(), |i| {
        let terms: Vec<Complex64> = (i + 1..a.len())
            .map(|j| {
                // pair (m, n) = (i+1, j+1) and its mirror
                let lam = logs[j] - logs[i];
                let kern = (Complex64::from_polar(1.0, u * lam) - 1.0) / cz(0.0, lam);
                a[i] * a[j].conj() * kern
            })
            .collect();
        2.0 * pairwise_sum_c(&terms).re
    });
    let diag: Vec<f64> = a.iter().map(|z| u * z.norm_sqr()).collect();
    pairwise_sum(&diag) + pairwise_sum(&rows)
}

/// `∫ w(u) u^{s-1} du` over `[1/2, 2]`.
pub fn mellin_w(w: impl Fn(f64) -> f64, s: Complex64) -> Complex64 {
    let gl = GaussLegendre::new(16);
    let (us, ws) = gl.composite(0.5, 2.0, 64);
    let terms: Vec<Complex64> = us.iter().zip(&ws).map(|(&u, &wt)| wt * w(u) * ((s - 1.0) * u.ln()).exp()).collect();
    pairwise_sum_c(&terms)
}

/// `ζ'/ζ(s)` by a Richardson-extrapolated central difference.
pub fn zeta_log_derivative(s: Complex64) -> Result<Complex64> {
    let d = |h: f64| -> Result<Complex64> { Ok((zeta(s + h)? - zeta(s - h)?) / (2.0 * h)) };
    let h = 1e-3;
    let dz = (4.0 * d(h / 2.0)? - d(h)?) / 3.0;
    Ok(dz / zeta(s)?)
}

#[derive(Clone, Copy, Debug)]
pub struct DiagonalRecord {
    pub lhs: f64,
    /// `(|ζ(1+2iT)|²/ζ(2)) w̃(1) N log N`
    pub main: f64,
    pub rel_err: f64,
    /// residue at `s = 1` including the constant term
    pub refined: f64,
    pub refined_rel_err: f64,
    /// `log N >= 2 (log T)^{2/3}`
    pub hypothesis_ok: bool,
}

/// `Σ τ_{iT}(n)² w(n/N)` over the support `[N/2, 2N]`.
pub fn diagonal_lhs(n: f64, w: impl Fn(f64) -> f64, table: &DivisorTable) -> Result<f64> {
    let hi = (2.0 * n).floor() as usize;
    table.require(hi)?;
    let lo = (0.5 * n).ceil().max(1.0) as usize;
    let terms: Vec<f64> = (lo..=hi)
        .map(|k| {
            let v = table.get(k);
            v * v * w(k as f64 / n)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `Σ τ_{iT}(n)² w(n/N)` against its main term; `w` is supported on `[1/2, 2]`.
pub fn diagonal_main(n: f64, t: f64, w: impl Fn(f64) -> f64 + Sync, table: &DivisorTable) -> Result<DiagonalRecord> {
    let lhs = diagonal_lhs(n, &w, table)?;
    let z = zeta(cz(1.0, 2.0 * t))?;
    let c = z.norm_sqr() / ZETA2;
    let w1 = mellin_w(&w, cz(1.0, 0.0)).re;
    let main = c * w1 * n * n.ln();
    let gl = GaussLegendre::new(16);
    let w1d = gl.integrate(0.5, 2.0, 64, |u| w(u) * u.ln());
    let euler = 0.577_215_664_901_532_9;
    let l1 = zeta_log_derivative(cz(1.0, 2.0 * t))?.re;
    let l2 = zeta_log_derivative(cz(2.0, 0.0))?.re;
    let refined = c * n * (w1 * (n.ln() + 2.0 * euler + 2.0 * l1 - 2.0 * l2) + w1d);
    let hypothesis_ok = n.ln() >= 2.0 * t.max(std::f64::consts::E).ln().powf(2.0 / 3.0);
    Ok(DiagonalRecord {
        lhs,
        main,
        rel_err: (lhs / main - 1.0).abs(),
        refined,
        refined_rel_err: (lhs / refined - 1.0).abs(),
        hypothesis_ok,
    })
}

/// Smooth weight on `[lo, hi]`: `peaked_bump` with `β = 1`.
#[derive(Clone, Copy, Debug)]
pub struct ShiftWeight {
    pub lo: f64,
    pub hi: f64,
    /// shift of the argument: the weight is `w(n - offset)`
    pub offset: i64,
}

impl ShiftWeight {
    pub fn new(lo: f64, hi: f64) -> Self {
        ShiftWeight { lo, hi, offset: 0 }
    }

    pub fn shifted(self, by: i64) -> Self {
        ShiftWeight { offset: self.offset + by, ..self }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x - self.offset as f64;
        peaked_bump((2.0 * x - self.lo - self.hi) / (self.hi - self.lo), 1.0)
    }

    /// Integer range containing the support.
    pub fn n_range(&self) -> (i64, i64) {
        (self.lo.floor() as i64 + self.offset, self.hi.ceil() as i64 + self.offset)
    }
}

pub const THETA: f64 = 7.0 / 64.0;
pub const SHIFT_DELTA: f64 = 0.05;

#[derive(Clone, Copy, Debug)]
pub struct ShiftedRecord {
    pub brute: f64,
    pub main: f64,
    pub err: f64,
    /// `|m|^θ T^{1/3} Y^{1/2} R² + T^{1/6} Y^{3/4} R^{1/2}`, `R = P + T|m|/Y`
    pub envelope: f64,
    /// `R <= T/(TY)^δ`
    pub regime_ok: bool,
}

/// `Σ_n τ(n) τ(n+m) w(n)` by brute force, indices in the order of `n`.
pub fn shifted_brute(m: i64, w: &ShiftWeight, table: &DivisorTable) -> Result<f64> {
    let (lo, hi) = w.n_range();
    let lo = lo.max(1).max(1 - m);
    let top = (hi.max(hi + m)).max(1) as usize;
    table.require(top)?;
    let terms: Vec<f64> = (lo..=hi)
        .map(|n| {
            let wn = w.eval(n as f64);
            if wn == 0.0 {
                0.0
            } else {
                table.get(n as usize) * table.get((n + m) as usize) * wn
            }
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `Σ_± (|ζ(1+2iT)|²/ζ(2)) σ_{-1}(m) ∫ (x+m)^{∓iT} x^{±iT} w(x) dx`.
pub fn shifted_main(m: i64, t: f64, w: &ShiftWeight) -> Result<f64> {
    let c = zeta(cz(1.0, 2.0 * t))?.norm_sqr() / ZETA2;
    let (a, b) = (w.lo + w.offset as f64, w.hi + w.offset as f64);
    let a = a.max((-m as f64).max(0.0));
    let gl = GaussLegendre::new(16);
    let mf = m as f64;
    let integral = gl.integrate(a, b, 256, |x| 2.0 * (t * (1.0 + mf / x).ln()).cos() * w.eval(x));
    Ok(c * sigma_minus1(m)? * integral)
}

pub fn shifted_sum(m: i64, t: f64, w: &ShiftWeight, p: f64, table: &DivisorTable) -> Result<ShiftedRecord> {
    if m == 0 {
        return Err(Error::Invalid("shift m must be nonzero".into()));
    }
    let brute = shifted_brute(m, w, table)?;
    let main = shifted_main(m, t, w)?;
    let y = w.lo;
    let r = p + t * m.unsigned_abs() as f64 / y;
    let envelope = (m.unsigned_abs() as f64).powf(THETA) * t.cbrt() * y.sqrt() * r * r + t.powf(1.0 / 6.0) * y.powf(0.75) * r.sqrt();
    let regime_ok = r <= t / (t * y).powf(SHIFT_DELTA);
    Ok(ShiftedRecord { brute, main, err: (brute - main).abs(), envelope, regime_ok })
}

#[derive(Clone, Copy, Debug)]
pub struct MtOdRecord {
    pub value: f64,
    /// imaginary part of the unsymmetrized sum (zero up to rounding)
    pub imag: f64,
    pub h_max: usize,
}

/// Smallest `h` past which `ŵ₁(-(Δ/2π) log(1+h/(Nu)))` is in the tail for
/// every `u` in `[1/2, 2]`, capped at the support limit `1.5 N`.
pub fn mt_od_auto_h(block: &DyadicBlock) -> usize {
    let cap = (1.5 * block.n).ceil();
    let reach = 2.0 * block.n * ((2.0 * PI * block.w1.xi_tail / block.delta).exp() - 1.0);
    reach.min(cap).ceil() as usize
}

/// `∫ w₂(u) w₂(u+k)/√(u(u+k)) ŵ₁(-(Δ/2π) log(1+k/u)) du`, `k = h/N`.
fn mt_od_integral(block: &DyadicBlock, h: i64, gl: &GaussLegendre) -> Complex64 {
    let k = h as f64 / block.n;
    let a = 0.5f64.max(0.5 - k);
    let b = 2.0f64.min(2.0 - k);
    if b <= a {
        return cz(0.0, 0.0);
    }
    let (us, ws) = gl.composite(a, b, 48);
    let scale = -block.delta / (2.0 * PI);
    let terms: Vec<Complex64> = us
        .iter()
        .zip(&ws)
        .map(|(&u, &wt)| {
            let amp = wt * w2(u) * w2(u + k) / (u * (u + k)).sqrt();
            if amp == 0.0 {
                return cz(0.0, 0.0);
            }
            amp * block.w1.hat(scale * (k / u).ln_1p())
        })
        .collect();
    pairwise_sum_c(&terms)
}

/// `MT_OD = (|ζ(1+2iT)|²/ζ(2)) (Δ/N) Σ_{h≠0} e(hx) σ_{-1}(h) ∫ ... dy`, summed
/// over `0 < |h| <= h_max` without using the `h ↔ -h` symmetry.
pub fn mt_od(block: &DyadicBlock, x: f64, h_max: Option<usize>) -> Result<MtOdRecord> {
    let hm = h_max.unwrap_or_else(|| mt_od_auto_h(block));
    let c = zeta(cz(1.0, 2.0 * block.t))?.norm_sqr() / ZETA2;
    let gl = GaussLegendre::new(16);
    let hs: Vec<i64> = (1..=hm as i64).flat_map(|h| [h, -h]).collect();
    let terms: Result<Vec<Complex64>> = par_map(hs.len(), |i| {
        let h = hs[i];
        Ok(e1(h as f64 * x) * sigma_minus1(h)? * mt_od_integral(block, h, &gl))
    })
    .into_iter()
    .collect();
    let s = pairwise_sum_c(&terms?) * (c * block.delta);
    Ok(MtOdRecord { value: s.re, imag: s.im, h_max: hm })
}

/// `MT_OD` from the `h > 0` terms as `2 Re Σ_{h>0}`.
pub fn mt_od_symmetrized(block: &DyadicBlock, x: f64, h_max: usize) -> Result<f64> {
    let c = zeta(cz(1.0, 2.0 * block.t))?.norm_sqr() / ZETA2;
    let gl = GaussLegendre::new(16);
    let terms: Result<Vec<f64>> = par_map(h_max, |i| {
        let h = i as i64 + 1;
        Ok(2.0 * (e1(h as f64 * x) * sigma_minus1(h)? * mt_od_integral(block, h, &gl)).re)
    })
    .into_iter()
    .collect();
    Ok(pairwise_sum(&terms?) * c * block.delta)
}

/// `x mod 1` as a 64-bit binary fraction.
fn fixed_fraction(x: f64) -> u64 {
    let f = x - x.floor();
    let v = (f * 18446744073709551616.0).round();
    if v >= 18446744073709551616.0 {
        0
    } else {
        v as u64
    }
}

/// `e(h x)` from the fixed-point fraction; exact reduction mod 1.
fn e_fixed(h: u64, xf: u64) -> Complex64 {
    let frac = h.wrapping_mul(xf) as f64 / 18446744073709551616.0;
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}

pub const H_POW_MAX: u32 = 30;
const Q_SEGMENT: u64 = 1 << 16;

/// `Q(x, 2^k)` for `k = 0..=k_max` and every `x`:
/// `Q(x,H) = H^{-1} Σ_{h≠0} σ_{-1}(h) e(hx) ŵ₁(h/H) = (2/H) Σ_{h>0} σ_{-1}(h) Re(e(hx) ŵ₁(h/H))`,
/// truncated where `ŵ₁` enters its tail. Result is indexed `[x][k]`.
pub fn q_dyadic_table(xs: &[f64], k_max: u32, w1: &Kernel) -> Result<Vec<Vec<f64>>> {
    if k_max > H_POW_MAX {
        return Err(Error::Capacity(format!("H_max = 2^{k_max} exceeds 2^{H_POW_MAX}")));
    }
    let nk = k_max as usize + 1;
    let h_top = (w1.xi_tail * (1u64 << k_max) as f64).ceil() as u64;
    let limits: Vec<u64> = (0..nk).map(|k| (w1.xi_tail * (1u64 << k) as f64).ceil() as u64).collect();
    let xf: Vec<u64> = xs.iter().map(|&x| fixed_fraction(x)).collect();
    // per x, per k: list of segment partial sums
    let mut partials: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); nk]; xs.len()];
    let mut lo = 1u64;
    while lo <= h_top {
        let hi = (lo + Q_SEGMENT).min(h_top + 1);
        let sig = sigma1_segment(lo, hi);
        let len = (hi - lo) as usize;
        let sm1: Vec<f64> = (0..len).map(|i| sig[i] as f64 / (lo + i as u64) as f64).collect();
        let active: Vec<usize> = (0..nk).filter(|&k| limits[k] >= lo).collect();
        // ŵ₁(h / 2^k) for active k, shared by all x
        let hats: Vec<Vec<Complex64>> = active
            .iter()
            .map(|&k| {
                let inv = 1.0 / (1u64 << k) as f64;
                (0..len)
                    .map(|i| {
                        let h = lo + i as u64;
                        if h > limits[k] {
                            cz(0.0, 0.0)
                        } else {
                            w1.hat(h as f64 * inv) * sm1[i]
                        }
                    })
                    .collect()
            })
            .collect();
        let seg = par_map(xs.len(), |xi| {
            let x = xf[xi];
            let rot = e_fixed(1, x);
            let mut acc = vec![0.0; active.len()];
            let mut e = cz(0.0, 0.0);
            for i in 0..len {
                if i % 256 == 0 {
                    e = e_fixed(lo + i as u64, x);
                }
                for (a, hk) in acc.iter_mut().zip(&hats) {
                    let z = hk[i];
                    *a += e.re * z.re - e.im * z.im;
                }
                e *= rot;
            }
            acc
        });
        for (xi, acc) in seg.into_iter().enumerate() {
            for (j, &k) in active.iter().enumerate() {
                partials[xi][k].push(acc[j]);
            }
        }
        lo = hi;
    }
    Ok(partials
        .into_iter()
        .map(|per_k| per_k.iter().enumerate().map(|(k, p)| 2.0 * pairwise_sum(p) / (1u64 << k) as f64).collect())
        .collect())
}

/// `Q(x, H)` for a single `H`, by direct summation.
pub fn q_sum(x: f64, h: f64, w1: &Kernel) -> Result<f64> {
    if !(h >= 1.0) {
        return Err(Error::Invalid(format!("H = {h} must be >= 1")));
    }
    let top = (w1.xi_tail * h).ceil() as u64;
    let xf = fixed_fraction(x);
    let segs = ranges(top as usize, Q_SEGMENT as usize);
    let parts = par_map(segs.len(), |s| {
        let r = &segs[s];
        let (lo, hi) = (r.start as u64 + 1, r.end as u64 + 1);
        let sig = sigma1_segment(lo, hi);
        let terms: Vec<f64> = (lo..hi)
            .map(|hh| {
                let sm = sig[(hh - lo) as usize] as f64 / hh as f64;
                let z = e_fixed(hh, xf) * w1.hat(hh as f64 / h);
                sm * z.re
            })
            .collect();
        pairwise_sum(&terms)
    });
    Ok(2.0 * pairwise_sum(&parts) / h)
}

/// `Σ_{H = 2^k <= H_max} |Q(x, H)|`.
pub fn q_dyadic_scan(x: f64, h_max: f64, w1: &Kernel) -> Result<f64> {
    let k_max = h_max.log2().floor() as u32;
    let row = &q_dyadic_table(&[x], k_max, w1)?[0];
    Ok(row.iter().map(|q| q.abs()).sum())
}

/// `Σ_{k <= k_max} |Q(x, 2^k)|` from a row of [`q_dyadic_table`].
pub fn dyadic_total(row: &[f64], k_max: u32) -> f64 {
    row.iter().take(k_max as usize + 1).map(|q| q.abs()).sum()
}

#[derive(Clone, Copy, Debug)]
pub struct SieveRecord {
    /// `(1/log x) Π_{p<=x} (1 + |τ_{iT}(p)|/p)`
    pub value: f64,
    /// `(log T)^{1/3} |ζ(1+2iT)|^{7/9} |ζ(1+4iT)|^{-1/9}`
    pub bound_shape: f64,
    pub primes: usize,
}

pub fn sieve_product(t: f64, x_cut: f64) -> Result<SieveRecord> {
    if !(x_cut >= 100.0) {
        return Err(Error::Invalid(format!("x_cut = {x_cut} must be >= 100")));
    }
    let ps = primes_up_to(x_cut as usize);
    let logs: Vec<f64> = ps
        .iter()
        .map(|&p| {
            let pf = p as f64;
            ((2.0 * (t * pf.ln()).cos()).abs() / pf).ln_1p()
        })
        .collect();
    let value = (pairwise_sum(&logs)).exp() / x_cut.ln();
    let z2 = zeta(cz(1.0, 2.0 * t))?.norm();
    let z4 = zeta(cz(1.0, 4.0 * t))?.norm();
    let bound_shape = t.ln().cbrt() * z2.powf(7.0 / 9.0) * z4.powf(-1.0 / 9.0);
    Ok(SieveRecord { value, bound_shape, primes: ps.len() })
}

/// `(8 + 11t² - t⁴)/18 - t`, which equals `-(t-1)²(t-2)(t+4)/18`.
pub fn poly_margin(t: f64) -> f64 {
    (8.0 + 11.0 * t * t - t * t * t * t) / 18.0 - t
}

#[derive(Clone, Debug)]
pub struct PolyRecord {
    pub holds: bool,
    pub samples: usize,
    pub min_margin: f64,
    /// margin at the boundary point `t = 2`
    pub margin_at_2: f64,
    pub equality_at_2: bool,
}

/// Checks `t <= (8 + 11t² - t⁴)/18` on `samples` uniform points of `[0, 2]`
/// plus both endpoints, allowing rounding of a few ulps near the double root `t = 1`.
pub fn poly_ineq_check(samples: usize, seed: u64) -> PolyRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slack = 8.0 * f64::EPSILON;
    let mut min_margin = f64::INFINITY;
    let mut holds = true;
    for i in 0..samples + 2 {
        let t = match i {
            0 => 0.0,
            1 => 2.0,
            _ => rng.random_range(0.0..=2.0),
        };
        let m = poly_margin(t);
        min_margin = min_margin.min(m);
        if m < -slack {
            holds = false;
        }
    }
    let margin_at_2 = poly_margin(2.0);
    PolyRecord { holds, samples, min_margin, margin_at_2, equality_at_2: margin_at_2 == 0.0 }
}
