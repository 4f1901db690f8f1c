use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

// B_{2k} / (2k)! for k = 1..8
const BERN: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
];

/// Extra terms added to the Euler-Maclaurin cut-off.
pub const DEFAULT_MARGIN: usize = 10;

/// Cut-off `N` for the Euler-Maclaurin sum at `s`.
///
/// The remainder after eight correction terms is about
/// `(|s + 16| / (2πN))^17`, so `N` grows with `|s|` rather than `|Im s| / 2π`.
pub fn zeta_cutoff(s: Complex64, margin: usize) -> usize {
    let r = (s + 16.0).norm() / (2.0 * PI * 0.1);
    r.ceil() as usize + margin
}

/// Riemann zeta via Euler-Maclaurin with eight Bernoulli corrections.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    if s.re == 1.0 && s.im == 0.0 {
        return Err(Error::Pole("zeta at s = 1".into()));
    }
    zeta_em(s, zeta_cutoff(s, DEFAULT_MARGIN))
}

/// Euler-Maclaurin evaluation with an explicit cut-off `n`.
pub fn zeta_em(s: Complex64, n: usize) -> Result<Complex64> {
    if s.re == 1.0 && s.im == 0.0 {
        return Err(Error::Pole("zeta at s = 1".into()));
    }
    let n = n.max(2);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..n {
        acc += (-s * (k as f64).ln()).exp();
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_s = (-s * ln_n).exp();
    acc += n_s * nf / (s - 1.0) + 0.5 * n_s;
    // correction terms: B_{2k}/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
    let mut rising = s;
    let mut pw = n_s / nf;
    for (k, b) in BERN.iter().enumerate() {
        acc += *b * rising * pw;
        let j = (2 * k + 1) as f64;
        rising *= (s + j) * (s + j + 1.0);
        pw /= nf * nf;
    }
    Ok(acc)
}
