//! Quadrature rules: Gauss-Legendre (plain and composite) and tanh-sinh.

use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule on `[-1, 1]` via Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        if n == 1 {
            return GaussLegendre { nodes: vec![0.0], weights: vec![2.0] };
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights of the composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * h;
            for (z, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(c + 0.5 * h * z);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let (xs, ws) = self.composite(a, b, panels);
        let vals: Vec<f64> = xs.iter().zip(&ws).map(|(&x, &w)| w * f(x)).collect();
        crate::reduce::pairwise_sum(&vals)
    }
}

/// Tanh-sinh rule on `[a, b]` for a complex integrand.
///
/// The step is halved until two successive levels agree to `tol` in absolute
/// value, or, from step 1/8 on, to `sqrt(tol)/10`: convergence is quadratic per
/// halving, so the finer level is then already well inside `tol`. Returns the
/// estimate and the last level difference.
pub fn tanh_sinh<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, tol: f64) -> (Complex64, f64) {
    let d = 0.5 * (b - a);
    if d == 0.0 {
        return (Complex64::new(0.0, 0.0), 0.0);
    }
    let table = ts_table();
    // (offset from the nearer endpoint in units of d, weight)
    let mut eval = |s: f64, w: f64, right: bool| -> Complex64 {
        let x = if right { b - d * s } else { a + d * s };
        f(x) * (d * w)
    };
    let mut h = TS_H0;
    let mut sum = Complex64::new(0.0, 0.0);
    for &(s, w, centre) in &table[0] {
        if centre {
            sum += eval(1.0, w, false);
        } else {
            sum += eval(s, w, true) + eval(s, w, false);
        }
    }
    let mut est = sum * h;
    let mut diff = f64::INFINITY;
    let early = 0.1 * tol.sqrt();
    for (level, nodes) in table.iter().enumerate().skip(1) {
        h *= 0.5;
        for &(s, w, _) in nodes {
            sum += eval(s, w, true) + eval(s, w, false);
        }
        let next = sum * h;
        diff = (next - est).norm();
        est = next;
        if diff <= tol || (level >= 2 && diff <= early) {
            break;
        }
    }
    (est, diff)
}

const TS_H0: f64 = 0.5;
const TS_TMAX: f64 = 3.6;
const TS_LEVELS: usize = 10;

type TsLevel = Vec<(f64, f64, bool)>;

/// Tanh-sinh abscissae by level: level 0 holds `t = k h0`, later levels the
/// new odd multiples of the halved step. Entries are `(1 - |x|, weight, is_centre)`.
fn ts_table() -> &'static [TsLevel] {
    static TABLE: std::sync::OnceLock<Vec<TsLevel>> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let node = |t: f64| {
            let u = 0.5 * PI * t.sinh();
            let ch = u.cosh();
            let w = 0.5 * PI * t.cosh() / (ch * ch);
            (1.0 / (u.exp() * ch), w)
        };
        let mut levels = Vec::with_capacity(TS_LEVELS);
        let mut first = vec![(1.0, 0.5 * PI, true)];
        let mut k = 1;
        while k as f64 * TS_H0 <= TS_TMAX {
            let (s, w) = node(k as f64 * TS_H0);
            first.push((s, w, false));
            k += 1;
        }
        levels.push(first);
        let mut h = TS_H0;
        for _ in 1..TS_LEVELS {
            h *= 0.5;
            let mut lv = Vec::new();
            let mut k = 1;
            while k as f64 * h <= TS_TMAX {
                let (s, w) = node(k as f64 * h);
                lv.push((s, w, false));
                k += 2;
            }
            levels.push(lv);
        }
        levels
    })
}

/// Trapezoid rule on `[a, b]` for an integrand negligible with all its
/// derivatives at both ends, where it converges geometrically.
///
/// Starts with `n0` intervals and halves the step until two levels agree to
/// `sqrt(tol)/10`; returns the estimate and the last level difference.
pub fn trapezoid_decayed<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, n0: usize, tol: f64) -> (Complex64, f64) {
    let mut n = n0.max(2);
    let mut h = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for k in 1..n {
        sum += f(a + k as f64 * h);
    }
    let mut est = sum * h;
    let mut diff = f64::INFINITY;
    let accept = 0.1 * tol.sqrt();
    for _ in 0..12 {
        for k in 0..n {
            sum += f(a + (k as f64 + 0.5) * h);
        }
        n *= 2;
        h *= 0.5;
        let next = sum * h;
        diff = (next - est).norm();
        est = next;
        if diff <= accept {
            break;
        }
    }
    (est, diff)
}
