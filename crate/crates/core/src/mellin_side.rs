//! The Mellin route to the restriction norm:
//! `F_{x,T}(s) = ∫_0^∞ ψ(y) y^s E_T^*(x+iy) dy/y`, its leading approximation
//! `F_0`, Parseval `I_ψ(x,T) = (1/2π) ∫ |F(it)|² dt`, and the constant
//! identities for the gamma factors.

use crate::eisenstein::SpectralContext;
use crate::quad::GaussLegendre;
use crate::reduce::{pairwise_sum, pairwise_sum_c, par_map};
use crate::restriction::{GridSpec, Profile, TestWindow, YGrid, E_TOL};
use crate::special::{gamma_vt, gamma_vt2, ln_cosh_pi, zeta};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

/// `|F(it)|²` sampled on an increasing `t` grid.
#[derive(Clone, Debug)]
pub struct SpectralLineProfile {
    pub t: f64,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectralLineProfile {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,F2")?;
        for (t, v) in self.t_grid.iter().zip(&self.values) {
            writeln!(w, "{t:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest `|F(it)|² / peak` over `|t| >= t0`.
    pub fn relative_level_beyond(&self, t0: f64) -> f64 {
        let peak = self.peak();
        self.t_grid
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| t.abs() >= t0)
            .map(|(_, v)| v / peak)
            .fold(0.0, f64::max)
    }
}

/// `w_j ψ(y_j) E(x+iy_j)` at the nodes `s_j = log y_j` of one grid.
#[derive(Clone, Debug)]
pub struct FLine {
    pub s: Vec<f64>,
    pub g: Vec<f64>,
}

impl FLine {
    pub fn new(profile: &Profile, x: f64) -> Self {
        let e = profile.values(x);
        let g = (0..e.len()).map(|j| profile.grid.w[j] * profile.grid.psi[j] * e[j]).collect();
        FLine { s: profile.grid.s.clone(), g }
    }

    /// `Σ_j g_j e^{σ s_j} e^{i τ s_j}` for `s = σ + iτ`.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let terms: Vec<Complex64> = self
            .s
            .iter()
            .zip(&self.g)
            .map(|(&sj, &gj)| Complex64::from_polar(gj * (s.re * sj).exp(), s.im * sj))
            .collect();
        pairwise_sum_c(&terms)
    }
}

/// Two nested `y` grids for `F`, resolving `|Im s| <= t_max`.
#[derive(Clone, Debug)]
pub struct FSampler {
    pub coarse: Profile,
    pub fine: Profile,
}

impl FSampler {
    pub fn new(ctx: &SpectralContext, window: &TestWindow, t_max: f64) -> Result<Self> {
        let omega = 2.0 * ctx.t + t_max.abs();
        let spec = window.nodes;
        let coarse = Profile::build(ctx, YGrid::for_frequency(window, omega, spec), E_TOL)?;
        let fine = Profile::build(ctx, YGrid::for_frequency(window, omega, GridSpec { c: 2.0 * spec.c, ..spec }), E_TOL)?;
        Ok(FSampler { coarse, fine })
    }

    pub fn lines(&self, x: f64) -> (FLine, FLine) {
        (FLine::new(&self.coarse, x), FLine::new(&self.fine, x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FRecord {
    pub value: Complex64,
    pub est_error: f64,
}

/// Tolerance on the doubling shift of `f_direct` before it is reported as unresolved.
pub const F_TOL: f64 = 1e-8;

/// `F_{x,T}(s)` by quadrature on the `y` grid, with a doubling error estimate.
pub fn f_direct(ctx: &SpectralContext, window: &TestWindow, x: f64, s: Complex64) -> Result<FRecord> {
    if s.re.abs() > 1.0 {
        return Err(Error::Domain(format!("f_direct needs |Re s| <= 1, got {s}")));
    }
    let sampler = FSampler::new(ctx, window, s.im)?;
    let (c, f) = sampler.lines(x);
    let a = c.eval(s);
    let b = f.eval(s);
    let err = (a - b).norm();
    let scale = b.norm().max(window.l2log.sqrt());
    if err > F_TOL * scale {
        return Err(Error::OutOfRegime(format!("y grid too coarse for s = {s}: doubling shift {err:.3e}")));
    }
    Ok(FRecord { value: b, est_error: err })
}

/// Boundary of the Stirling regime for `F_0`: `|t| <= T - T^{1/3}`.
pub fn f0_regime(t_spec: f64) -> f64 {
    t_spec - t_spec.cbrt()
}

/// `F_0(it) = ρ^*(1) γ_{V_T}(1/2+it) Σ_{n≠0} τ(n) e(nx) |n|^{-1/2-it} ψ(√(T²-t²)/(2π|n|))`.
pub fn f0(ctx: &SpectralContext, window: &TestWindow, x: f64, t: f64) -> Result<Complex64> {
    let tt = ctx.t;
    if t.abs() > f0_regime(tt) {
        return Err(Error::OutOfRegime(format!("|t| = {} exceeds T - T^(1/3) = {}", t.abs(), f0_regime(tt))));
    }
    let r = (tt * tt - t * t).sqrt() / (2.0 * PI);
    let n_lo = (r / window.beta).ceil().max(1.0) as usize;
    let n_hi = (r / window.alpha).floor() as usize;
    ctx.table.require(n_hi)?;
    let terms: Vec<Complex64> = (n_lo..=n_hi)
        .map(|n| {
            let nf = n as f64;
            let psi = (window.psi)(r / nf);
            let amp = 2.0 * ctx.table.get(n) * (2.0 * PI * (nf * x).fract()).cos() * psi / nf.sqrt();
            Complex64::from_polar(amp, -t * nf.ln())
        })
        .collect();
    let sum = pairwise_sum_c(&terms);
    let pref = (ctx.rho_star * gamma_vt(tt, Complex64::new(0.0, t))?).to_complex();
    Ok(pref * sum)
}

#[derive(Clone, Debug)]
pub struct ParsevalRecord {
    /// `(1/2π) ∫ |F(it)|² dt` over the sampled range.
    pub value: f64,
    /// shift of `value` when the `y` grid is doubled
    pub est_error: f64,
    /// nominal cut `T + 20 T^{1/3}`
    pub t_cut: f64,
    /// last sampled ordinate; beyond `t_cut` only while `|F|²` is still visible
    pub t_end: f64,
    /// share of `value` coming from `t_cut < |t| <= t_end`
    pub tail_fraction: f64,
    pub y_nodes: usize,
    pub profile: SpectralLineProfile,
}

/// Cut `T + 20 T^{1/3}`.
pub fn t_cut(t_spec: f64) -> f64 {
    t_spec + 20.0 * t_spec.cbrt()
}

/// Trapezoid step in `t`. `|F(it)|²` is the Fourier transform of an
/// autocorrelation supported on `|s| <= log(β/α)`, so any step below
/// `2π/log(β/α)` integrates it without aliasing.
pub fn t_step(window: &TestWindow) -> f64 {
    (PI / (4.0 * (window.beta / window.alpha).ln())).min(0.5)
}

/// Relative level of `|F|²` below which the `t` range stops growing.
const TAIL_LEVEL: f64 = 1e-22;

/// `(1/2π) ∫ |F_{x,T}(it)|² dt` by the trapezoid rule, symmetric in `t`.
///
/// The range is `|t| <= T + 20 T^{1/3}`, extended in blocks while a block
/// still carries more than `1e-22` of the peak.
pub fn parseval_rhs(ctx: &SpectralContext, window: &TestWindow, x: f64) -> Result<ParsevalRecord> {
    let cut = t_cut(ctx.t);
    let h = t_step(window);
    let t_cap = 4.0 * ctx.t + 200.0;
    let sampler = FSampler::new(ctx, window, t_cap)?;
    let (lc, lf) = sampler.lines(x);
    let sample = |k: i64| -> (f64, f64) {
        let s = Complex64::new(0.0, k as f64 * h);
        (lc.eval(s).norm_sqr(), lf.eval(s).norm_sqr())
    };
    let k_cut = (cut / h).ceil() as i64;
    let mut ks: Vec<i64> = (-k_cut..=k_cut).collect();
    let mut vals: Vec<(f64, f64)> = par_map(ks.len(), |i| sample(ks[i]));
    let peak = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    let block = (20.0 / h).ceil() as i64;
    let mut k_end = k_cut;
    while (k_end as f64 + 1.0) * h < t_cap {
        let new: Vec<i64> = (k_end + 1..=k_end + block).flat_map(|k| [-k, k]).collect();
        let nv = par_map(new.len(), |i| sample(new[i]));
        let level = nv.iter().map(|v| v.1).fold(0.0, f64::max);
        ks.extend_from_slice(&new);
        vals.extend(nv);
        k_end += block;
        if level < TAIL_LEVEL * peak {
            break;
        }
    }
    let mut order: Vec<usize> = (0..ks.len()).collect();
    order.sort_by_key(|&i| ks[i]);
    let t_grid: Vec<f64> = order.iter().map(|&i| ks[i] as f64 * h).collect();
    let fine: Vec<f64> = order.iter().map(|&i| vals[i].1).collect();
    let coarse: Vec<f64> = order.iter().map(|&i| vals[i].0).collect();
    let scale = h / (2.0 * PI);
    let total = pairwise_sum(&fine) * scale;
    let total_c = pairwise_sum(&coarse) * scale;
    let tail: Vec<f64> = t_grid.iter().zip(&fine).filter(|(t, _)| t.abs() > cut).map(|(_, v)| *v).collect();
    let tail_fraction = pairwise_sum(&tail) * scale / total;
    Ok(ParsevalRecord {
        value: total,
        est_error: (total - total_c).abs(),
        t_cut: cut,
        t_end: k_end as f64 * h,
        tail_fraction,
        y_nodes: sampler.fine.grid.len(),
        profile: SpectralLineProfile { t: ctx.t, t_grid, values: fine },
    })
}

/// Integrals of `(1/2π)|F(it)|²` over the regimes of the `t` line:
/// the bulk `|t| <= T - ηT`, dyadic blocks `Δ/2 < ||t| - T| <= Δ` for
/// `Δ = ηT, ηT/2, ..., > 1`, the window `||t| - T| <= Δ_min`, and `|t| > T + ηT`.
#[derive(Clone, Debug)]
pub struct RegimeSplit {
    pub bulk: f64,
    pub blocks: Vec<(f64, f64)>,
    pub near: f64,
    pub outer: f64,
}

impl RegimeSplit {
    pub fn total(&self) -> f64 {
        let mut parts = vec![self.bulk, self.near, self.outer];
        parts.extend(self.blocks.iter().map(|b| b.1));
        pairwise_sum(&parts)
    }
}

pub fn regime_split(profile: &SpectralLineProfile, eta: f64) -> RegimeSplit {
    let tt = profile.t;
    let h = if profile.t_grid.len() > 1 { profile.t_grid[1] - profile.t_grid[0] } else { 0.0 };
    let scale = h / (2.0 * PI);
    let mut deltas = vec![eta * tt];
    while *deltas.last().unwrap() / 2.0 > 1.0 {
        deltas.push(deltas.last().unwrap() / 2.0);
    }
    let d_min = *deltas.last().unwrap() / 2.0;
    let mut bulk = Vec::new();
    let mut near = Vec::new();
    let mut outer = Vec::new();
    let mut blocks: Vec<Vec<f64>> = vec![Vec::new(); deltas.len()];
    for (&t, &v) in profile.t_grid.iter().zip(&profile.values) {
        let d = (t.abs() - tt).abs();
        if t.abs() <= tt - eta * tt {
            bulk.push(v);
        } else if t.abs() > tt + eta * tt {
            outer.push(v);
        } else if d <= d_min {
            near.push(v);
        } else {
            let k = deltas.iter().rposition(|&dl| d <= dl).unwrap();
            blocks[k].push(v);
        }
    }
    RegimeSplit {
        bulk: pairwise_sum(&bulk) * scale,
        blocks: deltas.iter().zip(&blocks).map(|(&dl, b)| (dl, pairwise_sum(b) * scale)).collect(),
        near: pairwise_sum(&near) * scale,
        outer: pairwise_sum(&outer) * scale,
    }
}

/// `|(|ζ(1+2iT)|²/ζ(2)) |ρ^*(1)|² γ_{V_T²}(1) - 3/π|`.
pub fn identity_3pi(t: f64) -> Result<f64> {
    let ctx = crate::eisenstein::make_context(t, 1)?;
    identity_3pi_ctx(&ctx)
}

pub fn identity_3pi_ctx(ctx: &SpectralContext) -> Result<f64> {
    let zeta2 = PI * PI / 6.0;
    let g = gamma_vt2(ctx.t, Complex64::new(0.0, 0.0))?;
    let lhs = (ctx.rho_star.norm_sqr() * g).re() * ctx.zeta_1_2it.norm_sqr() / zeta2;
    Ok((lhs - 3.0 / PI).abs())
}

/// `cosh(πT) |γ_{V_T}(1/2+it)|²`.
pub fn gamma_line_density(t_spec: f64, t: f64) -> Result<f64> {
    Ok(gamma_vt(t_spec, Complex64::new(0.0, t))?.norm_sqr().scale_exp(ln_cosh_pi(t_spec)).re())
}

/// Relative residual of `(1/2π) ∫ |γ_{V_T}(1/2+it)|² dt = γ_{V_T²}(1)`, both
/// sides multiplied by `cosh(πT)`.
///
/// Gauss-Legendre panels on `t >= 0` with widths `∝ (1+|t-T|)^{1/2}`,
/// out to where the integrand has fallen by `e^{-π(t-T)}` below `1e-20`.
pub fn gamma_plancherel(t_spec: f64) -> Result<f64> {
    if !(t_spec > 0.0) {
        return Err(Error::Domain(format!("T = {t_spec} must be positive")));
    }
    let end = t_spec + 50.0 / PI + 10.0;
    let mut cuts = vec![0.0];
    let mut a: f64 = 0.0;
    while a < end {
        let b = (a + 0.5 * (1.0 + (a - t_spec).abs()).sqrt()).min(end);
        // land a panel edge on the transition point
        let b = if a < t_spec && b > t_spec { t_spec } else { b };
        cuts.push(b);
        a = b;
    }
    let gl = GaussLegendre::new(20);
    let panels: Result<Vec<f64>> = par_map(cuts.len() - 1, |i| {
        let (a, b) = (cuts[i], cuts[i + 1]);
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        let mut vals = Vec::with_capacity(gl.nodes.len());
        for (xk, wk) in gl.nodes.iter().zip(&gl.weights) {
            vals.push(r * wk * gamma_line_density(t_spec, m + r * xk)?);
        }
        Ok(pairwise_sum(&vals))
    })
    .into_iter()
    .collect();
    let lhs = 2.0 * pairwise_sum(&panels?) / (2.0 * PI);
    let rhs = gamma_vt2(t_spec, Complex64::new(0.0, 0.0))?.scale_exp(ln_cosh_pi(t_spec)).re();
    Ok((lhs / rhs - 1.0).abs())
}

/// `cosh(πT)|γ_{V_T}(1/2+s)|² / ((1+|t-T|)^{-1/2} (1+|t+T|)^{-1/2})`
/// at `s = it`, for envelope checks.
pub fn gamma_envelope_ratio(t_spec: f64, t: f64) -> Result<f64> {
    let d = gamma_line_density(t_spec, t)?;
    Ok(d * ((1.0 + (t - t_spec).abs()) * (1.0 + (t + t_spec).abs())).sqrt())
}

/// `ζ(1+2iT)` squared modulus, for callers working outside a context.
pub fn zeta_line_sq(t: f64) -> Result<f64> {
    Ok(zeta(Complex64::new(1.0, 2.0 * t))?.norm_sqr())
}

