use eisenlab::eisenstein::{make_context, rho_scaled, SpectralContext};
use eisenlab::restriction::*;
use proptest::prelude::*;

fn setup(t: f64, alpha: f64, beta: f64) -> (SpectralContext, TestWindow) {
    let w = make_window(alpha, beta).unwrap();
    let ctx = make_context(t, required_table(t, &w, rho_scaled(t).unwrap())).unwrap();
    (ctx, w)
}

fn profile(ctx: &SpectralContext, w: &TestWindow, c: f64) -> Profile {
    let spec = GridSpec { c, ..w.nodes };
    Profile::build(ctx, YGrid::for_restriction(w, ctx.t, spec), E_TOL).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn i_psi_nonnegative(t in 2.0f64..40.0, x in -1.0f64..1.0) {
        let (ctx, w) = setup(t, 0.8, 1.7);
        let r = i_psi(&ctx, &w, x).unwrap();
        prop_assert!(r.value >= 0.0);
        prop_assert!(r.est_error <= 1e-8 * r.value.max(1e-3));
    }
}

#[test]
fn x_symmetries() {
    let (ctx, w) = setup(30.0, 1.0, 2.0);
    let p = profile(&ctx, &w, 3.0);
    for x in [0.11, 0.37, 0.8] {
        let a = i_psi_on(&p, x);
        assert!((a - i_psi_on(&p, x + 1.0)).abs() < 1e-12 * a);
        assert!((a - i_psi_on(&p, -x)).abs() < 1e-12 * a);
        assert!((a - i_psi_on(&p, 1.0 - x)).abs() < 1e-12 * a);
    }
    let patch = GeodesicPatch::new(0.3, 2.0, 30.0, w.clone()).unwrap();
    let nx = patch.x_nodes();
    let a = i_star_on(&p, 0.3, patch.half_width(), nx);
    assert!((a - i_star_on(&p, 1.3, patch.half_width(), nx)).abs() < 1e-12 * a);
    assert!((a - i_star_on(&p, -0.3, patch.half_width(), nx)).abs() < 1e-12 * a);
}

#[test]
fn refinement_stability_i_star() {
    for t in [100.0, 500.0] {
        let (ctx, w) = setup(t, 1.0, 2.0);
        let patch = GeodesicPatch::new(0.41, t.ln(), t, w).unwrap();
        let r = i_star(&ctx, &patch).unwrap();
        assert!(r.est_error < 1e-4 * r.value, "T={t}: {r:?}");
    }
}

#[test]
fn patch_identities() {
    let t = 80.0;
    let (ctx, w) = setup(t, 1.0, 2.0);
    let p = profile(&ctx, &w, 3.0);
    let patch = GeodesicPatch::new(0.23, 3.0, t, w.clone()).unwrap();
    let hw = patch.half_width();
    let nx = patch.x_nodes();
    let full = i_star_on(&p, patch.x0, hw, nx);
    assert!(full >= 0.0);

    // additivity over the two halves
    let left = i_star_on(&p, patch.x0 - hw / 2.0, hw / 2.0, nx);
    let right = i_star_on(&p, patch.x0 + hw / 2.0, hw / 2.0, nx);
    assert!((full - left - right).abs() < 1e-9 * full, "{full} vs {}", left + right);

    // replacing the integrand by its maximum over a fine x sample
    let max = (0..=400).map(|k| i_psi_on(&p, patch.x0 - hw + 2.0 * hw * k as f64 / 400.0)).fold(0.0, f64::max);
    assert!(2.0 * hw * max >= full);

    // narrow patch tends to the pointwise norm
    let narrow = GeodesicPatch::new(patch.x0, 1e-3, t, w).unwrap();
    let v = i_star_on(&p, narrow.x0, narrow.half_width(), narrow.x_nodes()) / (2.0 * narrow.half_width());
    let point = i_psi_on(&p, patch.x0);
    assert!((v - point).abs() < 1e-6 * point);
}

#[test]
fn x0_zero_is_distinguished_on_average() {
    // single-T ratios on x = 0 fluctuate a lot; their mean shows the doubling
    let w = make_window(1.0, 2.0).unwrap();
    let ts = [100.0, 150.0, 200.0, 300.0];
    let mut mean = 0.0;
    for t in ts {
        let ctx = make_context(t, required_table(t, &w, rho_scaled(t).unwrap())).unwrap();
        let p = profile(&ctx, &w, 3.0);
        mean += i_psi_on(&p, 0.0) / (que_density(t) * w.l2log) / ts.len() as f64;
    }
    assert!((1.5..=2.5).contains(&mean), "{mean}");
}

#[test]
fn lower_bound_and_envelope_at_t200() {
    let t = 200.0;
    let (ctx, w) = setup(t, 1.0, 2.0);
    let p = profile(&ctx, &w, 3.0);
    for x0 in [0.05, 0.19, 0.33, 0.62, 0.87] {
        let patch = GeodesicPatch::new(x0, t.ln(), t, w.clone()).unwrap();
        let ratio = que_ratio_on(&p, &patch);
        assert!(ratio >= 0.5, "x0={x0}: {ratio}");
        assert!(ratio <= 5.0 * t.ln(), "x0={x0}: {ratio}");
    }
}

#[test]
fn window_rejects_bad_support() {
    assert!(make_window(1.0, 1.0).is_err());
    assert!(GeodesicPatch::new(0.0, 0.0, 10.0, make_window(1.0, 2.0).unwrap()).is_err());
}
