use eisenlab::eisenstein::{make_context, rho_scaled, SpectralContext};
use eisenlab::mellin_side::*;
use eisenlab::quad::GaussLegendre;
use eisenlab::restriction::*;
use eisenlab::special::{bessel_k_scaled, gamma_vt, gamma_vt2};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn setup(t: f64) -> (SpectralContext, TestWindow) {
    let w = make_window(1.0, 2.0).unwrap();
    let ctx = make_context(t, required_table(t, &w, rho_scaled(t).unwrap())).unwrap();
    (ctx, w)
}

/// `∫ f(e^s) ds` over `[lo, hi]` in `s = log y`.
fn log_integral<F: Fn(f64) -> Complex64>(lo: f64, hi: f64, panels: usize, f: F) -> Complex64 {
    let gl = GaussLegendre::new(12);
    let (xs, ws) = gl.composite(lo, hi, panels);
    xs.iter().zip(&ws).map(|(&s, &w)| w * f(s.exp())).sum()
}

#[test]
fn gamma_factor_is_a_mellin_transform() {
    // e^{πT/2} γ_{V_T}(1/2+s) = ∫ √(2πy) e^{πT/2}K_{iT}(2πy) y^s dy/y
    let t = 5.0;
    let s = Complex64::new(0.3, 0.0);
    let direct = log_integral(-45.0, 2.5, 1500, |y| {
        let k = bessel_k_scaled(t, 2.0 * PI * y).unwrap().re();
        (s * y.ln()).exp() * ((2.0 * PI * y).sqrt() * k)
    });
    let closed = gamma_vt(t, s).unwrap().scale_exp(0.5 * PI * t).to_complex();
    assert!((direct - closed).norm() < 1e-9 * closed.norm(), "{direct} vs {closed}");

    // e^{πT} γ_{V_T²}(1) = ∫ 2πy (e^{πT/2}K_{iT}(2πy))² dy/y
    let t = 10.0;
    let direct = log_integral(-40.0, 2.5, 1500, |y| {
        let k = bessel_k_scaled(t, 2.0 * PI * y).unwrap().re();
        Complex64::new(2.0 * PI * y * k * k, 0.0)
    });
    let closed = gamma_vt2(t, Complex64::new(0.0, 0.0)).unwrap().scale_exp(PI * t).re();
    assert!((direct.re - closed).abs() < 1e-9 * closed, "{direct} vs {closed}");
}

#[test]
fn three_over_pi_identity() {
    for (t, tol) in [(10.0, 1e-9), (250.0, 1e-9), (1000.0, 1e-8)] {
        let r = identity_3pi(t).unwrap();
        assert!(r <= tol, "T={t}: {r:e}");
    }
    // residual stays far below linear growth in T
    let r_small = identity_3pi(20.0).unwrap().max(1e-16);
    for t in [100.0, 400.0, 1600.0] {
        assert!(identity_3pi(t).unwrap() <= 50.0 * r_small * t);
    }
}

#[test]
fn gamma_plancherel_identity() {
    for t in [5.0, 50.0, 400.0] {
        let r = gamma_plancherel(t).unwrap();
        assert!(r <= 1e-6, "T={t}: {r:e}");
    }
}

proptest! {
    #[test]
    fn gamma_envelope(t in 0.5f64..3000.0, frac in -1.0f64..1.0) {
        let r = gamma_envelope_ratio(t, frac * t).unwrap();
        prop_assert!((1.0 / 20.0..=20.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn gamma_density_even(t in 0.5f64..500.0, u in 0.0f64..600.0) {
        let a = gamma_line_density(t, u).unwrap();
        let b = gamma_line_density(t, -u).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}

#[test]
fn parseval_matches_restriction_norm() {
    let (ctx, w) = setup(50.0);
    for x in [0.0, 0.37] {
        let a = i_psi(&ctx, &w, x).unwrap().value;
        let p = parseval_rhs(&ctx, &w, x).unwrap();
        assert!(p.value >= 0.0);
        assert!((a - p.value).abs() <= 1e-3 * a, "x={x}: {a} vs {}", p.value);
        assert!(p.est_error <= 1e-8 * p.value);
        // the three regimes partition the t-line
        let split = regime_split(&p.profile, 0.5);
        assert!((split.total() - p.value).abs() <= 1e-12 * p.value);
        assert!(split.blocks.len() >= 4);
    }
    let a = parseval_rhs(&ctx, &w, 0.37).unwrap().value;
    let b = parseval_rhs(&ctx, &w, 1.37).unwrap().value;
    assert!((a - b).abs() <= 1e-12 * a);
}

#[test]
fn spectral_profile_shape() {
    let (ctx, w) = setup(50.0);
    let p = parseval_rhs(&ctx, &w, 0.2).unwrap();
    let prof = &p.profile;
    assert!(prof.t_grid.windows(2).all(|v| v[1] > v[0]));
    assert!(prof.values.iter().all(|&v| v >= 0.0));
    // |F(it)|² is already small past the cut but the smooth window's
    // transform decays only like exp(-c√|t|), far from 1e-12 at T = 50
    let level = prof.relative_level_beyond(p.t_cut);
    assert!(level < 1e-3, "{level:e}");
    assert!(p.tail_fraction < 1e-3);
    let mut buf = Vec::new();
    prof.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,F2\n"));
    assert_eq!(text.lines().count(), prof.t_grid.len() + 1);
}

#[test]
fn f_direct_conjugation() {
    let (ctx, w) = setup(30.0);
    for s in [Complex64::new(0.0, 12.0), Complex64::new(0.4, -7.5), Complex64::new(-0.5, 31.0)] {
        let a = f_direct(&ctx, &w, 0.29, s).unwrap();
        let b = f_direct(&ctx, &w, 0.29, s.conj()).unwrap();
        assert!((a.value - b.value.conj()).norm() <= 1e-12 * a.value.norm().max(1e-6));
    }
    assert!(f_direct(&ctx, &w, 0.0, Complex64::new(1.5, 0.0)).is_err());
}

#[test]
fn f0_regime_and_symmetry() {
    let (ctx, w) = setup(100.0);
    assert!(f0(&ctx, &w, 0.1, 99.0).is_err());
    let a = f0(&ctx, &w, 0.21, 40.0).unwrap();
    let b = f0(&ctx, &w, -0.21, 40.0).unwrap();
    assert!((a - b).norm() <= 1e-13 * a.norm());
    // summand support: only √(T²-t²)/(2π n) in [α, β]
    let t = 0.0;
    let r = (ctx.t * ctx.t - t * t).sqrt() / (2.0 * PI);
    let outside = (1..((r / 2.0).ceil() as usize)).chain(((r).floor() as usize + 1)..200);
    for n in outside {
        assert_eq!((w.psi)(r / n as f64), 0.0);
    }
}

#[test]
fn f0_tracks_f_in_mean_square() {
    // pointwise F0 is only a leading term; its mean square over the bulk
    // follows ∫|F|² to a few percent at T = 100
    let (ctx, w) = setup(100.0);
    let sampler = FSampler::new(&ctx, &w, 100.0).unwrap();
    let (_, line) = sampler.lines(0.37);
    let lim = f0_regime(100.0) - 100f64.powf(2.0 / 3.0) + 100f64.cbrt();
    let h = 0.25;
    let (mut a, mut b) = (0.0, 0.0);
    let k = (lim / h) as i64;
    for j in -k..=k {
        let t = j as f64 * h;
        a += line.eval(Complex64::new(0.0, t)).norm_sqr();
        b += f0(&ctx, &w, 0.37, t).unwrap().norm_sqr();
    }
    assert!((a - b).abs() <= 0.05 * a, "{a} vs {b}");
}
