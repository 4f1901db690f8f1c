use eisenlab::arith_coeffs::{build_table, sigma_minus1};
use eisenlab::quad::GaussLegendre;
use eisenlab::special::zeta;
use eisenlab::sums_lab::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn direct_hat(k: &Kernel, xi: f64) -> Complex64 {
    let gl = GaussLegendre::new(20);
    let (a, b) = k.support;
    let (vs, ws) = gl.composite(a, b, 400);
    vs.iter().zip(&ws).map(|(&v, &w)| w * k.w(v) * Complex64::from_polar(1.0, -2.0 * PI * xi * v)).sum()
}

#[test]
fn kernel_transform_matches_direct_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for shape in [W1Shape::Bump, W1Shape::SelfConvolution] {
        let k = Kernel::get(shape);
        for _ in 0..12 {
            let xi: f64 = rng.random_range(-30.0..30.0);
            let d = direct_hat(k, xi);
            assert!((k.hat(xi) - d).norm() < 1e-12, "{shape:?} ξ={xi}: {} vs {d}", k.hat(xi));
        }
        assert!((k.mass() - direct_hat(k, 0.0).re).abs() < 1e-13);
        assert!(k.hat(k.xi_tail + 0.5).norm() < 1e-12 * k.mass());
    }
    let even = Kernel::get(W1Shape::SelfConvolution);
    for i in 0..4000 {
        let xi = i as f64 * 0.01;
        let h = even.hat(xi);
        assert!(h.re >= -1e-16 && h.im == 0.0);
    }
}

#[test]
fn weights_in_unit_interval() {
    let k = Kernel::get(W1Shape::Bump);
    let e = Kernel::get(W1Shape::SelfConvolution);
    for i in 0..=1000 {
        let u = 0.3 + 2.0 * i as f64 / 1000.0;
        assert!((0.0..=1.0).contains(&w2(u)));
        assert!((0.0..=1.0).contains(&k.w(u)));
        let v = -1.2 + 2.4 * i as f64 / 1000.0;
        assert!((0.0..=1.0 + 1e-15).contains(&e.w(v)));
    }
    assert_eq!(w2(0.5), 0.0);
    assert_eq!(w2(2.0), 0.0);
    assert_eq!(w2(1.25), 1.0);
}

#[test]
fn block_invariants() {
    let b = DyadicBlock::new(64.0, 1e4).unwrap();
    assert_eq!(b.n_sq, 64.0 * 1e4);
    assert!((b.n * b.n - b.n_sq).abs() <= 1e-9);
    assert!(DyadicBlock::new(0.5, 100.0).is_err());
    assert!(DyadicBlock::new(200.0, 100.0).is_err());
}

#[test]
fn i_delta_routes_agree() {
    for t in [1e3, 1e4] {
        let tab = build_table(2 * (64.0f64 * t).sqrt() as usize + 2, t).unwrap();
        for d in [16.0, 64.0] {
            for shape in [W1Shape::Bump, W1Shape::SelfConvolution] {
                let b = DyadicBlock::with_shape(d, t, shape).unwrap();
                for x in [0.0, 0.3, 0.71] {
                    let r = i_delta(&b, x, &tab).unwrap();
                    assert!(r.rel_gap <= 1e-6, "T={t} Δ={d} x={x} {shape:?}: {r:?}");
                    assert!(r.value >= 0.0);
                    let m = i_delta(&b, x + 1.0, &tab).unwrap();
                    assert!((m.value - r.value).abs() <= 1e-10 * r.value);
                    assert!(r.value <= mv_envelope(&b, x, &tab).unwrap());
                }
            }
        }
    }
    let tab = build_table(100, 1e4).unwrap();
    assert!(i_delta(&DyadicBlock::new(64.0, 1e4).unwrap(), 0.3, &tab).is_err());
}

#[test]
fn opened_square_bounded_by_absolute_majorant() {
    // with ŵ₁ >= 0 the double sum is dominated by Δ Σ |b_m||b_n| ŵ₁(...)
    let t = 1e4;
    let tab = build_table(2000, t).unwrap();
    let b = DyadicBlock::with_shape(16.0, t, W1Shape::SelfConvolution).unwrap();
    let coef = b.coefficients(0.3, &tab).unwrap();
    let (lo, _) = b.n_range();
    let mut major = 0.0;
    for (i, bi) in coef.iter().enumerate() {
        for (j, bj) in coef.iter().enumerate() {
            let d = ((lo + j) as f64 / (lo + i) as f64).ln();
            major += bi.norm() * bj.norm() * b.w1.hat(b.delta * d / (2.0 * PI)).re;
        }
    }
    major *= b.delta;
    let r = i_delta(&b, 0.3, &tab).unwrap();
    assert!(r.value <= major * (1.0 + 1e-12));
    assert!(r.diagonal <= major);
}

#[test]
fn mean_value_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let len = rng.random_range(20..200);
        let a: Vec<Complex64> =
            (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let u: f64 = rng.random_range(1.0..500.0);
        let exact = mean_value_exact(&a, u);
        let mass: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let weighted: f64 = a.iter().enumerate().map(|(i, z)| (i + 1) as f64 * z.norm_sqr()).sum();
        assert!(exact >= 0.0);
        worst = worst.max((exact - u * mass).abs() / weighted);
    }
    eprintln!("mean value constant: {worst:.4}");
    assert!(worst <= 3.0 * PI, "measured constant {worst}");
}

#[test]
fn mean_value_closed_form_against_quadrature() {
    let a = [Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.2), Complex64::new(0.7, -1.0), Complex64::new(0.1, 0.1)];
    let u = 37.0;
    let gl = GaussLegendre::new(20);
    let q = gl.integrate(0.0, u, 200, |s| {
        a.iter().enumerate().map(|(i, z)| z * Complex64::from_polar(1.0, -s * ((i + 1) as f64).ln())).sum::<Complex64>().norm_sqr()
    });
    assert!((q - mean_value_exact(&a, u)).abs() < 1e-10 * q);
}

#[test]
fn diagonal_main_term_trend() {
    let t = 100.0;
    let tab = build_table(200_001, t).unwrap();
    let mut prev = f64::INFINITY;
    for n in [1e3, 1e4, 1e5] {
        let r = diagonal_main(n, t, w2, &tab).unwrap();
        assert!(r.hypothesis_ok);
        assert!(r.rel_err < prev, "N={n}: {r:?}");
        prev = r.rel_err;
        assert!(r.refined_rel_err < 1e-3);
    }
    assert!(prev <= 0.5);
    // at T = 0 the main term has a pole: only positivity
    let d = build_table(20_001, 0.0).unwrap();
    assert!(diagonal_lhs(1e4, w2, &d).unwrap() > 0.0);
    assert!(diagonal_main(1e4, 0.0, w2, &d).is_err());
    let direct = GaussLegendre::new(16).integrate(0.5, 2.0, 64, w2);
    assert!((mellin_w(w2, Complex64::new(1.0, 0.0)).re - direct).abs() < 1e-14);
}

#[test]
fn shifted_sum_reindexing_is_exact() {
    let tab = build_table(30_000, 57.0).unwrap();
    let w = ShiftWeight::new(1000.0, 2000.0);
    for m in [1i64, 2, 7, -3, 12] {
        let a = shifted_brute(m, &w, &tab).unwrap();
        let b = shifted_brute(-m, &w.shifted(m), &tab).unwrap();
        assert_eq!(a.to_bits(), b.to_bits(), "m={m}");
    }
    assert!(shifted_sum(0, 57.0, &w, 1.0, &tab).is_err());
}

#[test]
fn shifted_sum_main_term() {
    let t = 100.0;
    let tab = build_table(30_000, t).unwrap();
    let mut prev = f64::INFINITY;
    for y in [1e3, 1e4] {
        let mut errs = Vec::new();
        for c in [1.0, 1.07, 1.15, 1.23, 1.32] {
            let w = ShiftWeight::new(c * y, 2.0 * c * y);
            let r = shifted_sum(1, t, &w, 1.0, &tab).unwrap();
            assert!(r.regime_ok);
            assert!(r.err <= 10.0 * r.envelope);
            errs.push(r.err / r.main.abs());
        }
        errs.sort_by(f64::total_cmp);
        assert!(errs[2] < prev);
        prev = errs[2];
    }
    // negative shift: σ_{-1}(-m) = σ_{-1}(m) and the same main-term shape
    let w = ShiftWeight::new(5000.0, 10000.0);
    let r = shifted_sum(-2, t, &w, 1.0, &tab).unwrap();
    assert!(r.err <= 10.0 * r.envelope);
    assert_eq!(sigma_minus1(-2).unwrap(), 1.5);
}

#[test]
fn mt_od_symmetry_and_trivial_bound() {
    for t in [1e3, 1e4] {
        let z = zeta(Complex64::new(1.0, 2.0 * t)).unwrap().norm_sqr();
        for d in [16.0, 64.0] {
            let b = DyadicBlock::new(d, t).unwrap();
            for x in [0.0, 0.3, 0.5] {
                let r = mt_od(&b, x, None).unwrap();
                assert!(r.imag.abs() <= 1e-10 * (1.0 + r.value.abs()));
                assert!(r.value.abs() <= 10.0 * z * b.n, "T={t} Δ={d} x={x}: {r:?}");
                if x == 0.0 {
                    let s = mt_od_symmetrized(&b, 0.0, r.h_max).unwrap();
                    assert!((s - r.value).abs() <= 1e-12 * r.value.abs().max(1.0));
                }
            }
        }
    }
}

/// `Q(x,H)` by Poisson summation over `b` for each `a`:
/// `H^{-1} Σ_a a^{-1} [ (H/a) Σ_ν w₁(H(x - ν/a)) - ŵ₁(0) ]`.
fn q_poisson(x: f64, h: f64, k: &Kernel) -> f64 {
    let a_max = (k.xi_tail * h).ceil() as i64 + 2;
    let mut total = 0.0;
    for a in 1..=a_max {
        let af = a as f64;
        let (lo, hi) = k.support;
        // ν with H(x - ν/a) in [lo, hi]
        let nu_hi = ((x - lo / h) * af).floor() as i64;
        let nu_lo = ((x - hi / h) * af).ceil() as i64;
        let mut s = 0.0;
        for nu in nu_lo..=nu_hi {
            s += k.w(h * (x - nu as f64 / af));
        }
        total += ((h / af) * s - k.mass()) / af;
    }
    total / h
}

#[test]
fn q_matches_poisson_form() {
    let k = Kernel::get(W1Shape::Bump);
    for h in [4.0, 32.0, 256.0] {
        for x in [0.0, 0.5, 0.1234, 0.77] {
            let direct = q_sum(x, h, k).unwrap();
            let pois = q_poisson(x, h, k);
            assert!((direct - pois).abs() < 1e-9, "H={h} x={x}: {direct} vs {pois}");
        }
    }
}

#[test]
fn q_symmetries() {
    let k = Kernel::get(W1Shape::Bump);
    let x = 300_001.0 / (1u64 << 20) as f64;
    for h in [1.0, 16.0, 1024.0] {
        assert_eq!(q_sum(x, h, k).unwrap().to_bits(), q_sum(x + 1.0, h, k).unwrap().to_bits());
        assert_eq!(q_sum(0.5, h, k).unwrap().to_bits(), q_sum(-0.5, h, k).unwrap().to_bits());
        assert!((q_sum(0.3, h, k).unwrap() - q_sum(1.3, h, k).unwrap()).abs() < 1e-12);
    }
    let rows = q_dyadic_table(&[0.1234, 0.5], 12, k).unwrap();
    for (row, x) in rows.iter().zip([0.1234, 0.5]) {
        for kk in [0u32, 5, 12] {
            let d = q_sum(x, (1u64 << kk) as f64, k).unwrap();
            assert!((row[kk as usize] - d).abs() < 1e-13, "k={kk}");
        }
        assert!((dyadic_total(row, 12) - q_dyadic_scan(x, 4096.0, k).unwrap()).abs() < 1e-13);
    }
    assert!(q_dyadic_table(&[0.1], 31, k).is_err());
}

#[test]
fn sieve_product_bound() {
    let r = sieve_product(100.0, 1e5).unwrap();
    assert_eq!(r.primes, 9592);
    assert!(r.value > 0.0 && r.value <= 10.0 * r.bound_shape, "{r:?}");
    assert!(sieve_product(100.0, 50.0).is_err());
}

#[test]
fn polynomial_inequality() {
    assert_eq!(poly_margin(0.0), 8.0 / 18.0);
    assert_eq!(poly_margin(2.0), 0.0);
    assert_eq!(poly_margin(1.0), 0.0);
    let r = poly_ineq_check(100_000, 9);
    assert!(r.holds && r.equality_at_2);
}

proptest! {
    #[test]
    fn polynomial_factorization(t in 0.0f64..=2.0) {
        let f = -(t - 1.0) * (t - 1.0) * (t - 2.0) * (t + 4.0) / 18.0;
        prop_assert!((poly_margin(t) - f).abs() < 1e-14);
        prop_assert!(poly_margin(t) >= -1e-15);
    }
}
