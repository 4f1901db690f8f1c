//! Order-fixed reductions and order-preserving parallel maps.
//!
//! Every floating-point reduction in the crate goes through these helpers so
//! results do not depend on the size of the rayon pool.

use num_complex::Complex64;
use rayon::prelude::*;

const LEAF: usize = 16;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        s
    } else {
        let m = xs.len() / 2;
        pairwise_sum(&xs[..m]) + pairwise_sum(&xs[m..])
    }
}

pub fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        let mut s = Complex64::new(0.0, 0.0);
        for &x in xs {
            s += x;
        }
        s
    } else {
        let m = xs.len() / 2;
        pairwise_sum_c(&xs[..m]) + pairwise_sum_c(&xs[m..])
    }
}

/// `f(0), ..., f(n-1)` computed on the current rayon pool, in index order.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Split `0..n` into contiguous ranges of length `chunk`, the last possibly shorter.
pub fn ranges(n: usize, chunk: usize) -> Vec<std::ops::Range<usize>> {
    let chunk = chunk.max(1);
    (0..n.div_ceil(chunk))
        .map(|i| i * chunk..((i + 1) * chunk).min(n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
    }

    #[test]
    fn pool_size_does_not_change_bits() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let run = |w: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build().unwrap();
            pool.install(|| pairwise_sum(&par_map(10_000, f)))
        };
        let a = run(1);
        assert_eq!(a.to_bits(), run(4).to_bits());
        assert_eq!(a.to_bits(), run(16).to_bits());
    }

    #[test]
    fn ranges_cover() {
        let r = ranges(10, 4);
        assert_eq!(r, vec![0..4, 4..8, 8..10]);
    }
}
