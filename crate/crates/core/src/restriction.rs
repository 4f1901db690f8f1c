//! Restriction norms of `E_T` to vertical segments:
//! `I_ψ(x,T) = ∫ ψ(y)² |E_T(x+iy)|² dy/y` and its thickened version
//! `I*_{ψ,γ}(x0,T) = ∫∫_{|x-x0| <= γ/T} ψ(y)² |E_T(x+iy)|² dx dy/y`.

use crate::eisenstein::{SpectralContext, YSlice};
use crate::quad::GaussLegendre;
use crate::reduce::{pairwise_sum, par_map};
use crate::{Error, Result};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type WindowFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How the `y` integral is discretized: Gauss-Legendre panels in `log y`,
/// `⌈c · ω · log(β/α)⌉` panels of `per_panel` nodes for top frequency `ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub c: f64,
    pub per_panel: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { c: 3.0, per_panel: 4 }
    }
}

#[derive(Clone)]
pub struct TestWindow {
    pub alpha: f64,
    pub beta: f64,
    pub psi: WindowFn,
    pub l2log: f64,
    pub nodes: GridSpec,
}

impl fmt::Debug for TestWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestWindow")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("l2log", &self.l2log)
            .field("nodes", &self.nodes)
            .finish()
    }
}

/// `exp(-1/(1-u²))` on `(-1, 1)`, zero outside.
pub fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Window with the default bump `ψ(y) = bump((2y - α - β)/(β - α))`.
pub fn make_window(alpha: f64, beta: f64) -> Result<TestWindow> {
    if !(alpha > 0.0 && beta > alpha && beta.is_finite()) {
        return Err(Error::Invalid(format!("window needs 0 < alpha < beta, got [{alpha}, {beta}]")));
    }
    let psi: WindowFn = Arc::new(move |y: f64| bump((2.0 * y - alpha - beta) / (beta - alpha)));
    window_from_fn(alpha, beta, psi)
}

/// Window with a caller-supplied `ψ` supported in `[α, β]`.
pub fn window_from_fn(alpha: f64, beta: f64, psi: WindowFn) -> Result<TestWindow> {
    if !(alpha > 0.0 && beta > alpha) {
        return Err(Error::Invalid(format!("window needs 0 < alpha < beta, got [{alpha}, {beta}]")));
    }
    let l2log = l2log_with(alpha, beta, &psi, 256);
    Ok(TestWindow { alpha, beta, psi, l2log, nodes: GridSpec::default() })
}

/// `∫ ψ(y)² dy/y` with `panels` Gauss-Legendre panels of 16 nodes in `log y`.
pub fn l2log_with(alpha: f64, beta: f64, psi: &WindowFn, panels: usize) -> f64 {
    let gl = GaussLegendre::new(16);
    gl.integrate(alpha.ln(), beta.ln(), panels, |s| {
        let p = psi(s.exp());
        p * p
    })
}

/// Quadrature nodes in `s = log y` with `ψ` sampled.
#[derive(Clone, Debug)]
pub struct YGrid {
    pub s: Vec<f64>,
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    pub psi: Vec<f64>,
}

impl YGrid {
    pub fn new(window: &TestWindow, panels: usize, per_panel: usize) -> Self {
        let gl = GaussLegendre::new(per_panel);
        let (s, w) = gl.composite(window.alpha.ln(), window.beta.ln(), panels.max(1));
        let y: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        let psi = y.iter().map(|&v| (window.psi)(v)).collect();
        YGrid { s, w, y, psi }
    }

    /// Grid resolving a top frequency `omega` in `log y`.
    pub fn for_frequency(window: &TestWindow, omega: f64, spec: GridSpec) -> Self {
        let panels = (spec.c * omega.max(1.0) * (window.beta / window.alpha).ln() / 2.0).ceil() as usize;
        Self::new(window, panels.max((MIN_PANELS as f64 * spec.c / 3.0) as usize), spec.per_panel)
    }

    /// Grid with the restriction panel count `⌈c T log(β/α)⌉`.
    pub fn for_restriction(window: &TestWindow, t: f64, spec: GridSpec) -> Self {
        Self::for_frequency(window, 2.0 * t, spec)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Panels needed for the window alone at the default `c`.
const MIN_PANELS: usize = 48;

/// Below this `ψ(y)` the node contributes nothing at double precision.
const PSI_FLOOR: f64 = 1e-25;

/// Default absolute truncation tolerance for `E` on the grid.
pub const E_TOL: f64 = 1e-11;

/// `E_T^*` sampled as Fourier slices on every node of a `y` grid.
#[derive(Clone, Debug)]
pub struct Profile {
    pub grid: YGrid,
    pub slices: Vec<YSlice>,
}

impl Profile {
    pub fn build(ctx: &SpectralContext, grid: YGrid, tol: f64) -> Result<Self> {
        let need = ctx.truncation(grid.y.iter().cloned().fold(f64::INFINITY, f64::min), tol);
        ctx.table.require(need)?;
        let slices: Result<Vec<YSlice>> = par_map(grid.len(), |j| {
            if grid.psi[j] < PSI_FLOOR {
                Ok(YSlice { y: grid.y[j], c0: 0.0, amps: Vec::new() })
            } else {
                ctx.slice(grid.y[j], tol)
            }
        })
        .into_iter()
        .collect();
        Ok(Profile { grid, slices: slices? })
    }

    /// `Σ_j w_j ψ_j² E(x, y_j)²`.
    pub fn weighted_square(&self, x: f64) -> f64 {
        let terms: Vec<f64> = (0..self.grid.len())
            .map(|j| {
                let p = self.grid.psi[j];
                if p < PSI_FLOOR {
                    return 0.0;
                }
                let e = self.slices[j].eval(x);
                self.grid.w[j] * p * p * e * e
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// `E(x, y_j)` for all nodes.
    pub fn values(&self, x: f64) -> Vec<f64> {
        self.slices.iter().map(|s| if s.amps.is_empty() && s.c0 == 0.0 { 0.0 } else { s.eval(x) }).collect()
    }
}

/// A quadrature result with its doubling-based error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadRecord {
    pub value: f64,
    pub est_error: f64,
    pub y_nodes: usize,
    pub x_nodes: usize,
}

/// Minimum number of `E` terms the context table must hold for this window.
pub fn required_table(ctx_t: f64, window: &TestWindow, rho: f64) -> usize {
    crate::eisenstein::truncation_index_rho(window.alpha, ctx_t, E_TOL, rho)
}

/// `I_ψ(x,T)`, with the error estimated by doubling the `y` panels.
pub fn i_psi(ctx: &SpectralContext, window: &TestWindow, x: f64) -> Result<QuadRecord> {
    let coarse = Profile::build(ctx, YGrid::for_restriction(window, ctx.t, window.nodes), E_TOL)?;
    let spec2 = GridSpec { c: 2.0 * window.nodes.c, ..window.nodes };
    let fine = Profile::build(ctx, YGrid::for_restriction(window, ctx.t, spec2), E_TOL)?;
    let a = coarse.weighted_square(x);
    let b = fine.weighted_square(x);
    Ok(QuadRecord { value: b, est_error: (a - b).abs(), y_nodes: fine.grid.len(), x_nodes: 1 })
}

/// `I_ψ(x,T)` on a single prebuilt profile.
pub fn i_psi_on(profile: &Profile, x: f64) -> f64 {
    profile.weighted_square(x)
}

#[derive(Clone, Debug)]
pub struct GeodesicPatch {
    pub x0: f64,
    pub gamma: f64,
    pub t: f64,
    pub window: TestWindow,
}

impl GeodesicPatch {
    pub fn new(x0: f64, gamma: f64, t: f64, window: TestWindow) -> Result<Self> {
        if !(gamma > 0.0 && t > 0.0) {
            return Err(Error::Invalid(format!("patch needs gamma, T > 0 (gamma = {gamma}, T = {t})")));
        }
        Ok(GeodesicPatch { x0, gamma, t, window })
    }

    pub fn half_width(&self) -> f64 {
        self.gamma / self.t
    }

    /// Gauss-Legendre node count across the patch: at least the trapezoid
    /// spacing rule `(γ/T)/max(8, γ)` would use, and three nodes per period of
    /// the fastest `x` oscillation `2 n*(α)` of `|E|²`.
    pub fn x_nodes(&self) -> usize {
        let spacing_rule = (2.0 * self.gamma.max(8.0)).ceil() as usize + 1;
        let n_top = (self.t + 10.0 * self.t.cbrt()) / (2.0 * PI * self.window.alpha);
        let periods = 2.0 * n_top * 2.0 * self.half_width();
        spacing_rule.max((3.0 * periods).ceil() as usize + 8).min(10_000)
    }
}

pub fn m_psi_gamma(patch: &GeodesicPatch) -> f64 {
    2.0 * patch.gamma / patch.t * patch.window.l2log
}

/// `∫_{x0-γ/T}^{x0+γ/T} I_ψ(x,T) dx` on a prebuilt profile with `nx` nodes.
pub fn i_star_on(profile: &Profile, x0: f64, half_width: f64, nx: usize) -> f64 {
    let gl = GaussLegendre::new(nx);
    let terms = par_map(nx, |k| {
        let x = x0 + half_width * gl.nodes[k];
        half_width * gl.weights[k] * profile.weighted_square(x)
    });
    pairwise_sum(&terms)
}

/// `I*_{ψ,γ}(x0,T)` with the error estimated by doubling `y` panels and `x` nodes.
pub fn i_star(ctx: &SpectralContext, patch: &GeodesicPatch) -> Result<QuadRecord> {
    let w = &patch.window;
    let coarse = Profile::build(ctx, YGrid::for_restriction(w, ctx.t, w.nodes), E_TOL)?;
    let fine = Profile::build(ctx, YGrid::for_restriction(w, ctx.t, GridSpec { c: 2.0 * w.nodes.c, ..w.nodes }), E_TOL)?;
    let nx = patch.x_nodes();
    let a = i_star_on(&coarse, patch.x0, patch.half_width(), nx);
    let b = i_star_on(&fine, patch.x0, patch.half_width(), 2 * nx);
    Ok(QuadRecord { value: b, est_error: (a - b).abs(), y_nodes: fine.grid.len(), x_nodes: 2 * nx })
}

/// `(3/π) log(1/4 + T²)`.
pub fn que_density(t: f64) -> f64 {
    3.0 / PI * (0.25 + t * t).ln()
}

/// `I* / ((3/π) log(1/4+T²) m_{ψ,γ})`.
pub fn que_ratio(ctx: &SpectralContext, patch: &GeodesicPatch) -> Result<f64> {
    Ok(i_star(ctx, patch)?.value / (que_density(patch.t) * m_psi_gamma(patch)))
}

/// `que_ratio` on a prebuilt profile, for scans over many patches.
pub fn que_ratio_on(profile: &Profile, patch: &GeodesicPatch) -> f64 {
    let v = i_star_on(profile, patch.x0, patch.half_width(), patch.x_nodes());
    v / (que_density(patch.t) * m_psi_gamma(patch))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_shape() {
        let w = make_window(1.0, 2.0).unwrap();
        assert_eq!((w.psi)(1.0), 0.0);
        assert_eq!((w.psi)(2.0), 0.0);
        assert!(((w.psi)(1.5) - (-1.0f64).exp()).abs() < 1e-16);
        assert!(make_window(2.0, 1.0).is_err());
        assert!(make_window(0.0, 1.0).is_err());
    }

    #[test]
    fn l2log_converged_and_scale_invariant() {
        let w = make_window(1.0, 2.0).unwrap();
        let fine = l2log_with(1.0, 2.0, &w.psi, 512);
        assert!((w.l2log - fine).abs() < 1e-10 * fine);
        let w3 = make_window(3.0, 6.0).unwrap();
        assert!((w3.l2log - w.l2log).abs() < 1e-13);
    }

    #[test]
    fn m_closed_form() {
        let w = make_window(1.0, 2.0).unwrap();
        let p = GeodesicPatch::new(0.2, 1.0, 100.0, w.clone()).unwrap();
        assert_eq!(m_psi_gamma(&p), 2.0 / 100.0 * w.l2log);
    }
}
