//! Divisor-type coefficients: `τ_{iT}(n) = Σ_{ab=n} (a/b)^{iT}`, `σ_{-1}(h)`,
//! sieved tables and `Z(s) = Σ τ_{iT}(n)² n^{-s}`.

use crate::special::zeta;
use crate::{Error, Result};
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

/// Largest table the sieve will allocate.
pub const TABLE_CAP: usize = 100_000_000;

const MAGIC: &[u8; 8] = b"EISLTAU\0";
const VERSION: u32 = 1;

/// Real values `τ_{iT}(n)` for `1 <= n <= N`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorTable {
    pub t: f64,
    pub n: usize,
    /// `values[n]` for `n` in `1..=N`; `values[0]` is unused and zero.
    pub values: Vec<f64>,
}

impl DivisorTable {
    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }

    pub fn require(&self, n: usize) -> Result<()> {
        if n > self.n {
            Err(Error::TableTooSmall { need: n, have: self.n })
        } else {
            Ok(())
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.t.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.n);
        for v in &self.values[1..] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Invalid("not a divisor table dump".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(Error::Invalid(format!("unsupported table version {version}")));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let t = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        if n > TABLE_CAP {
            return Err(Error::Capacity(format!("table of {n} entries")));
        }
        let mut raw = vec![0u8; 8 * n];
        r.read_exact(&mut raw)?;
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        values.extend(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())));
        Ok(DivisorTable { t, n, values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }

    /// Load a cached table of at least `n` entries for this `t` from `dir`, or
    /// build and store one.
    pub fn cached(dir: &Path, n: usize, t: f64) -> Result<Self> {
        let path = cache_path(dir, n, t);
        if let Ok(tab) = Self::load(&path) {
            if tab.t.to_bits() == t.to_bits() && tab.n == n {
                return Ok(tab);
            }
        }
        let tab = build_table(n, t)?;
        std::fs::create_dir_all(dir)?;
        tab.save(&path)?;
        Ok(tab)
    }
}

fn cache_path(dir: &Path, n: usize, t: f64) -> PathBuf {
    dir.join(format!("tau_{:016x}_{n}.bin", t.to_bits()))
}

/// `τ_{iT}(n)` by direct divisor enumeration.
pub fn tau_it(n: u64, t: f64) -> f64 {
    assert!(n >= 1, "tau_it needs n >= 1");
    let mut acc = 0.0;
    let mut a = 1u64;
    while a * a <= n {
        if n % a == 0 {
            let b = n / a;
            if a == b {
                acc += 1.0;
            } else {
                acc += 2.0 * (t * (a as f64).ln() - t * (b as f64).ln()).cos();
            }
        }
        a += 1;
    }
    acc
}

/// Sieve `τ_{iT}(n)` for `n <= N` in `O(N log N)` using
/// `cos(T ln a - T ln b) = cos(T ln a) cos(T ln b) + sin(T ln a) sin(T ln b)`.
pub fn build_table(n: usize, t: f64) -> Result<DivisorTable> {
    if n == 0 {
        return Err(Error::Invalid("table size must be positive".into()));
    }
    if n > TABLE_CAP {
        return Err(Error::Capacity(format!("table of {n} entries exceeds {TABLE_CAP}")));
    }
    let mut cs = Vec::with_capacity(n + 1);
    cs.push((0.0, 0.0));
    for k in 1..=n {
        let (s, c) = (t * (k as f64).ln()).sin_cos();
        cs.push((c, s));
    }
    let mut values = vec![0.0; n + 1];
    for a in 1..=n {
        let (ca, sa) = cs[a];
        let mut m = a;
        for &(cb, sb) in &cs[1..=n / a] {
            values[m] += ca * cb + sa * sb;
            m += a;
        }
    }
    Ok(DivisorTable { t, n, values })
}

/// Number of divisors.
pub fn divisor_count(n: u64) -> u64 {
    let mut c = 0;
    let mut a = 1u64;
    while a * a <= n {
        if n % a == 0 {
            c += if a * a == n { 1 } else { 2 };
        }
        a += 1;
    }
    c
}

/// `σ(n) = Σ_{d|n} d`.
pub fn sigma1(n: u64) -> u64 {
    let mut s = 0;
    let mut a = 1u64;
    while a * a <= n {
        if n % a == 0 {
            let b = n / a;
            s += if a == b { a } else { a + b };
        }
        a += 1;
    }
    s
}

/// `σ_{-1}(h) = Σ_{d | |h|} 1/d = σ(|h|)/|h|`.
pub fn sigma_minus1(h: i64) -> Result<f64> {
    if h == 0 {
        return Err(Error::Invalid("sigma_minus1(0) is undefined".into()));
    }
    let m = h.unsigned_abs();
    Ok(sigma1(m) as f64 / m as f64)
}

/// `σ(h)` for `h` in `[lo, hi)`, `lo >= 1`, by a segmented divisor-pair sieve.
pub fn sigma1_segment(lo: u64, hi: u64) -> Vec<u64> {
    assert!(lo >= 1 && hi >= lo);
    let len = (hi - lo) as usize;
    let mut out = vec![0u64; len];
    let mut d = 1u64;
    while d * d < hi {
        // multiples h = d*k with k >= d, h in [lo, hi)
        let k0 = lo.div_ceil(d).max(d);
        let mut h = d * k0;
        let mut k = k0;
        while h < hi {
            out[(h - lo) as usize] += if k == d { d } else { d + k };
            h += d;
            k += 1;
        }
        d += 1;
    }
    out
}

/// Primes `<= x`.
pub fn primes_up_to(x: usize) -> Vec<usize> {
    if x < 2 {
        return Vec::new();
    }
    let mut comp = vec![false; x + 1];
    let mut ps = Vec::new();
    for i in 2..=x {
        if !comp[i] {
            ps.push(i);
            let mut j = i * i;
            while j <= x {
                comp[j] = true;
                j += i;
            }
        }
    }
    ps
}

/// `ζ(s-2iT) ζ(s+2iT) ζ(s)² / ζ(2s)`.
pub fn z_formula(s: Complex64, t: f64) -> Result<Complex64> {
    let i2t = Complex64::new(0.0, 2.0 * t);
    let z0 = zeta(s)?;
    Ok(zeta(s - i2t)? * zeta(s + i2t)? * z0 * z0 / zeta(2.0 * s)?)
}

/// Partial sum `Σ_{n<=N} τ_{iT}(n)² n^{-s}`; needs `Re s > 1`.
pub fn z_series(s: Complex64, t: f64, n: usize) -> Result<Complex64> {
    if s.re <= 1.0 {
        return Err(Error::Domain(format!("z_series diverges at Re s = {}", s.re)));
    }
    let tab = build_table(n, t)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..=n {
        let v = tab.values[k];
        acc += v * v * (-s * (k as f64).ln()).exp();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_trivial_values() {
        assert_eq!(tau_it(1, 3.7), 1.0);
        assert_eq!(tau_it(12, 0.0), 6.0);
        for p in [2u64, 3, 5, 7, 97] {
            let want = 2.0 * (3.3 * (p as f64).ln()).cos();
            assert!((tau_it(p, 3.3) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn table_matches_direct() {
        let tab = build_table(100, 7.0).unwrap();
        assert_eq!(tab.get(1), 1.0);
        for n in 1..=100u64 {
            assert!((tab.get(n as usize) - tau_it(n, 7.0)).abs() < 1e-12, "n={n}");
        }
        assert!((tab.get(72) - tab.get(8) * tab.get(9)).abs() < 1e-12);
    }

    #[test]
    fn table_bounded_by_divisor_count() {
        let tab = build_table(2000, 41.0).unwrap();
        let t0 = build_table(2000, 0.0).unwrap();
        for n in 1..=2000 {
            let d = divisor_count(n as u64) as f64;
            assert!(tab.get(n).abs() <= d + 1e-12);
            assert_eq!(t0.get(n), d);
        }
    }

    #[test]
    fn sigma_minus1_values() {
        assert_eq!(sigma_minus1(1).unwrap(), 1.0);
        assert_eq!(sigma_minus1(6).unwrap(), 2.0);
        assert_eq!(sigma_minus1(-4).unwrap(), 1.75);
        assert!(sigma_minus1(0).is_err());
    }

    #[test]
    fn segmented_sigma_matches_direct() {
        for (lo, hi) in [(1u64, 500u64), (997, 2048), (1_000_000, 1_000_300)] {
            let seg = sigma1_segment(lo, hi);
            for h in lo..hi {
                assert_eq!(seg[(h - lo) as usize], sigma1(h), "h={h}");
            }
        }
    }

    #[test]
    fn primes_small() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(100_000).len(), 9592);
    }

    #[test]
    fn dump_roundtrip() {
        let tab = build_table(500, 12.5).unwrap();
        let mut buf = Vec::new();
        tab.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 8 + 8 + 8 * 500);
        assert_eq!(&buf[12..20], &12.5f64.to_le_bytes());
        assert_eq!(&buf[20..28], &500u64.to_le_bytes());
        let back = DivisorTable::read_from(&buf[..]).unwrap();
        assert_eq!(back, tab);
        buf[0] = b'X';
        assert!(DivisorTable::read_from(&buf[..]).is_err());
    }

    #[test]
    fn capacity_and_domain_errors() {
        assert!(matches!(build_table(TABLE_CAP + 1, 1.0), Err(Error::Capacity(_))));
        assert!(z_series(Complex64::new(1.0, 0.0), 1.0, 10).is_err());
    }

    #[test]
    fn z_at_t0_is_zeta_ratio() {
        let pi4 = std::f64::consts::PI.powi(4);
        let z = z_formula(Complex64::new(2.0, 0.0), 0.0).unwrap();
        assert!((z.re - 5.0 * pi4 / 72.0).abs() < 1e-12);
        let s = Complex64::new(2.5, 1.5);
        let a = z_formula(s.conj(), 3.0).unwrap();
        let b = z_formula(s, 3.0).unwrap();
        assert!((a - b.conj()).norm() < 1e-13 * b.norm());
    }
}
