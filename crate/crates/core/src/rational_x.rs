//! Dirichlet characters, Gauss sums and the expansion of additive twists
//! `e(an/q)` into multiplicative characters.

use crate::arith_coeffs::DivisorTable;
use crate::error::{Error, Result};
use crate::reduce::pairwise_sum_c;
use crate::sums_lab::{i_delta_coeffs, DyadicBlock, IDeltaRecord};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const MAX_MODULUS: u64 = 1_000_000;
/// Largest `φ(q)·q` for which `chars()` materializes all value vectors.
pub const MAX_MATERIALIZED: u64 = 50_000_000;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(q: u64) -> u64 {
    factorize(q).iter().fold(q, |acc, &(p, _)| acc / p * (p - 1))
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let ells: Vec<u64> = factorize(p - 1).iter().map(|&(l, _)| l).collect();
    (2..p).find(|&g| ells.iter().all(|&l| pow_mod(g, (p - 1) / l, p) != 1)).unwrap()
}

/// `e(num/den)`, exact at multiples of a quarter turn.
pub fn unit(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if (4 * num) % den == 0 {
        return match 4 * num / den {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let (s, c) = (2.0 * PI * num as f64 / den as f64).sin_cos();
    Complex64::new(c, s)
}

/// Cyclic factor of `(Z/p^k)^*`: discrete log of each residue mod `p^k`.
#[derive(Clone, Debug)]
struct Component {
    modulus: u64,
    order: u64,
    /// `u32::MAX` marks non-units
    log: Vec<u32>,
}

#[derive(Clone, Debug)]
struct PrimePart {
    p: u64,
    k: u32,
    /// indices into `components`
    comps: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub q: u64,
    pub phi: u64,
    /// generator exponents, one entry per cyclic factor
    pub labels: Vec<Vec<u64>>,
    components: Vec<Component>,
    parts: Vec<PrimePart>,
    lcm: u64,
}

fn cyclic_odd(p: u64, k: u32) -> Component {
    let m = p.pow(k);
    let mut g = primitive_root(p);
    if k >= 2 && pow_mod(g, p - 1, p * p) == 1 {
        g += p;
    }
    let order = m / p * (p - 1);
    let mut log = vec![u32::MAX; m as usize];
    let mut x = 1;
    for j in 0..order {
        log[x as usize] = j as u32;
        x = x * g % m;
    }
    Component { modulus: m, order, log }
}

fn two_power(k: u32) -> Vec<Component> {
    let m = 1u64 << k;
    if k == 1 {
        return Vec::new();
    }
    let mut sign = vec![u32::MAX; m as usize];
    for r in (1..m).step_by(2) {
        sign[r as usize] = if r % 4 == 1 { 0 } else { 1 };
    }
    let sign = Component { modulus: m, order: 2, log: sign };
    if k == 2 {
        return vec![sign];
    }
    let order = m / 4;
    let mut log = vec![u32::MAX; m as usize];
    let mut x = 1;
    for j in 0..order {
        log[x as usize] = j as u32;
        log[(m - x) as usize] = j as u32;
        x = x * 5 % m;
    }
    vec![sign, Component { modulus: m, order, log }]
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// All Dirichlet characters mod `q`, labelled by exponent tuples on the
/// cyclic factors of `(Z/q)^*`. Index 0 is the principal character.
pub fn characters(q: u64) -> Result<CharacterTable> {
    if q == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    if q > MAX_MODULUS {
        return Err(Error::Capacity(format!("modulus {q} exceeds {MAX_MODULUS}")));
    }
    let mut components = Vec::new();
    let mut parts = Vec::new();
    for (p, k) in factorize(q) {
        let new = if p == 2 { two_power(k) } else { vec![cyclic_odd(p, k)] };
        let comps = (components.len()..components.len() + new.len()).collect();
        components.extend(new);
        parts.push(PrimePart { p, k, comps });
    }
    let orders: Vec<u64> = components.iter().map(|c| c.order).collect();
    let phi = orders.iter().product::<u64>();
    let mut labels = Vec::with_capacity(phi as usize);
    for i in 0..phi {
        let mut rest = i;
        let mut lab = vec![0; orders.len()];
        for c in (0..orders.len()).rev() {
            lab[c] = rest % orders[c];
            rest /= orders[c];
        }
        labels.push(lab);
    }
    let lcm = orders.iter().fold(1, |a, &o| lcm(a, o));
    Ok(CharacterTable { q, phi, labels, components, parts, lcm })
}

impl CharacterTable {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Orders of the cyclic factors.
    pub fn orders(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.order).collect()
    }

    fn index_of(&self, lab: &[u64]) -> usize {
        lab.iter().zip(&self.components).fold(0, |acc, (&l, c)| acc * c.order as usize + l as usize)
    }

    /// `χ_i(n)`
    pub fn chi(&self, i: usize, n: i64) -> Complex64 {
        let r = n.rem_euclid(self.q as i64) as u64;
        if gcd(r, self.q) != 1 {
            return Complex64::new(0.0, 0.0);
        }
        let mut num = 0u64;
        for (c, &l) in self.components.iter().zip(&self.labels[i]) {
            let e = c.log[(r % c.modulus) as usize] as u64;
            num = (num + (l * e % c.order) * (self.lcm / c.order)) % self.lcm;
        }
        unit(num, self.lcm)
    }

    /// Value vector `(χ_i(0), …, χ_i(q-1))`.
    pub fn values(&self, i: usize) -> Vec<Complex64> {
        (0..self.q as i64).map(|n| self.chi(i, n)).collect()
    }

    /// All value vectors.
    pub fn chars(&self) -> Result<Vec<Vec<Complex64>>> {
        if self.phi.saturating_mul(self.q) > MAX_MATERIALIZED {
            return Err(Error::Capacity(format!("{} characters of length {}", self.phi, self.q)));
        }
        Ok((0..self.len()).map(|i| self.values(i)).collect())
    }

    /// Index of the complex conjugate character.
    pub fn conj_index(&self, i: usize) -> usize {
        let lab: Vec<u64> =
            self.labels[i].iter().zip(&self.components).map(|(&l, c)| (c.order - l) % c.order).collect();
        self.index_of(&lab)
    }

    /// Conductor of `χ_i`.
    pub fn conductor(&self, i: usize) -> u64 {
        let lab = &self.labels[i];
        let mut f = 1;
        for part in &self.parts {
            let ls: Vec<(u64, u64)> =
                part.comps.iter().map(|&c| (lab[c], self.components[c].order)).collect();
            let e = if part.p == 2 {
                match ls.as_slice() {
                    [] => 0,
                    [(s, _)] => 2 * (*s != 0) as u32,
                    [(s, _), (0, _)] => 2 * (*s != 0) as u32,
                    [_, (j, o)] => (o / gcd(*j, *o)).trailing_zeros() + 2,
                    _ => unreachable!(),
                }
            } else {
                let (j, o) = ls[0];
                if j == 0 {
                    0
                } else {
                    let mut ord = o / gcd(j, o);
                    let mut v = 0;
                    while ord % part.p == 0 {
                        ord /= part.p;
                        v += 1;
                    }
                    v + 1
                }
            };
            debug_assert!(e <= part.k);
            f *= part.p.pow(e);
        }
        f
    }

    pub fn is_primitive(&self, i: usize) -> bool {
        self.conductor(i) == self.q
    }
}

/// `τ(χ_i) = Σ_{n mod q} χ_i(n) e(n/q)`
pub fn gauss_sum(table: &CharacterTable, i: usize) -> Complex64 {
    let q = table.q;
    let terms: Vec<Complex64> = (0..q).map(|n| table.chi(i, n as i64) * unit(n, q)).collect();
    pairwise_sum_c(&terms)
}

fn check_coprime(a: i64, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    let r = a.rem_euclid(q as i64) as u64;
    if gcd(r, q) != 1 {
        return Err(Error::Domain(format!("gcd({a}, {q}) != 1")));
    }
    Ok(r)
}

fn divisors(q: u64) -> Vec<u64> {
    (1..=q).filter(|d| q % d == 0).collect()
}

/// Per divisor `d | q`: the characters mod `q/d` and their weights
/// `τ(χ̄) χ(a) / φ(q/d)`.
struct Expansion {
    parts: Vec<(u64, CharacterTable, Vec<Complex64>)>,
}

impl Expansion {
    fn new(a: u64, q: u64) -> Result<Self> {
        let mut parts = Vec::new();
        for d in divisors(q) {
            let t = characters(q / d)?;
            let phi = t.phi as f64;
            let wts = (0..t.len()).map(|i| gauss_sum(&t, t.conj_index(i)) * t.chi(i, a as i64) / phi).collect();
            parts.push((d, t, wts));
        }
        Ok(Expansion { parts })
    }

    /// `e(an/q)` rebuilt from the characters at `d = gcd(n, q)`.
    fn twist(&self, n: u64) -> Complex64 {
        let g = gcd(n, self.parts[0].1.q);
        let (d, t, wts) = self.parts.iter().find(|(d, _, _)| *d == g).unwrap();
        let m = (n / d) as i64;
        let terms: Vec<Complex64> = wts.iter().enumerate().map(|(i, w)| w * t.chi(i, m)).collect();
        pairwise_sum_c(&terms)
    }
}

/// Both sides of the expansion of `Σ_n c_n e(an/q)` (with `c[0] = c_1`).
pub fn change_of_basis_sides(c: &[Complex64], a: i64, q: u64) -> Result<(Complex64, Complex64)> {
    let r = check_coprime(a, q)?;
    let lhs: Vec<Complex64> =
        c.iter().enumerate().map(|(i, cn)| cn * unit((i as u64 + 1) % q * r % q, q)).collect();
    let ex = Expansion::new(r, q)?;
    let mut rhs = Vec::new();
    for (d, t, wts) in &ex.parts {
        for (i, w) in wts.iter().enumerate() {
            let inner: Vec<Complex64> = (1..=c.len() as u64 / d)
                .map(|m| c[(d * m - 1) as usize] * t.chi(i, m as i64))
                .collect();
            rhs.push(w * pairwise_sum_c(&inner));
        }
    }
    Ok((pairwise_sum_c(&lhs), pairwise_sum_c(&rhs)))
}

/// `|Σ c_n e(an/q) - Σ_{d|q} φ(q/d)^{-1} Σ_χ τ(χ̄) χ(a) Σ_n c_{dn} χ(n)|`
pub fn change_of_basis_check(c: &[Complex64], a: i64, q: u64) -> Result<f64> {
    let (l, r) = change_of_basis_sides(c, a, q)?;
    Ok((l - r).norm())
}

/// `I(Δ,T,a/q,N)` with `e(an/q)` in every coefficient rebuilt from
/// characters mod divisors of `q`.
pub fn i_delta_rational(block: &DyadicBlock, a: i64, q: u64, table: &DivisorTable) -> Result<IDeltaRecord> {
    let r = check_coprime(a, q)?;
    let ex = Expansion::new(r, q)?;
    let twists: Vec<Complex64> = (0..q).map(|n| ex.twist(n)).collect();
    let b = block.twisted_coefficients(table, |n| twists[(n as u64 % q) as usize])?;
    Ok(i_delta_coeffs(block, &b))
}
