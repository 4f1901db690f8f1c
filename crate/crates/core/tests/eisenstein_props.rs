use eisenlab::eisenstein::{eval_e_star, make_context, rho_scaled, truncation_index_rho};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const TOL: f64 = 1e-11;

fn context_for(t: f64, y_min: f64) -> eisenlab::eisenstein::SpectralContext {
    let n = truncation_index_rho(y_min, t, TOL, rho_scaled(t).unwrap());
    make_context(t, n).unwrap()
}

/// Reduce into the standard fundamental domain, returning every point visited.
fn orbit(mut x: f64, mut y: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![(x, y)];
    for _ in 0..50 {
        x -= x.round();
        pts.push((x, y));
        let r2 = x * x + y * y;
        if r2 >= 1.0 {
            break;
        }
        x = -x / r2;
        y /= r2;
        pts.push((x, y));
    }
    pts
}

#[test]
fn automorphy_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for t in [5.0, 20.0, 50.0] {
        let ctx = context_for(t, 0.1 / 9.1);
        for _ in 0..50 {
            let x: f64 = rng.random_range(0.0..1.0);
            let y: f64 = rng.random_range(0.1..3.0);
            let e0 = eval_e_star(&ctx, x, y, TOL).unwrap();
            // z -> -1/z
            let r2 = x * x + y * y;
            let e1 = eval_e_star(&ctx, -x / r2, y / r2, TOL).unwrap();
            // z -> z + 1
            let e2 = eval_e_star(&ctx, x + 1.0, y, TOL).unwrap();
            let scale = e0.abs().max(1.0);
            assert!((e1 - e0).abs() <= 1e-6 * scale, "T={t} z={x}+{y}i: {e0} vs {e1}");
            assert!((e2 - e0).abs() <= 1e-9 * scale);
        }
    }
}

#[test]
fn invariant_along_reduction_orbit() {
    let ctx = context_for(12.0, 0.05);
    let pts = orbit(0.137, 0.21);
    let v: Vec<f64> = pts.iter().map(|&(x, y)| eval_e_star(&ctx, x, y, TOL).unwrap()).collect();
    for w in &v {
        assert!((w - v[0]).abs() < 1e-8 * v[0].abs().max(1.0), "{v:?}");
    }
}

#[test]
fn complex_sum_is_real() {
    // sum over n and -n separately with complex exponentials
    let t = 20.0;
    let ctx = context_for(t, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(0.3..2.0);
        let sl = ctx.slice(y, TOL).unwrap();
        let c_pos = ctx.mu * Complex64::from_polar(y.sqrt(), t * y.ln());
        let mut acc = c_pos + c_pos.conj();
        let mut mag = 2.0 * y.sqrt();
        for (k, a) in sl.amps.iter().enumerate() {
            let n = (k + 1) as f64;
            for sgn in [1.0, -1.0] {
                let term = Complex64::from_polar(0.5 * a, 2.0 * PI * sgn * n * x);
                acc += term;
                mag += term.norm();
            }
        }
        assert!(acc.im.abs() <= 1e-10 * mag);
        assert!((acc.re - sl.eval(x)).abs() < 1e-10 * mag);
    }
}

#[test]
fn longer_truncation_changes_little() {
    let t = 30.0;
    let ctx = context_for(t, 0.1);
    for y in [0.2, 0.7, 1.9] {
        let n = ctx.truncation(y, TOL);
        let a = ctx.slice_n(y, n).unwrap();
        let b = ctx.slice_n(y, 2 * n).unwrap();
        for x in [0.0, 0.21, 0.5] {
            assert!((a.eval(x) - b.eval(x)).abs() < TOL);
        }
    }
}
