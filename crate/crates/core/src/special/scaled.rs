use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A complex number stored as `mantissa * exp(log_scale)`.
///
/// Normalized values have `|mantissa|` in `[1, e)`, or are the canonical zero
/// `(0, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex { mantissa: Complex64::new(0.0, 0.0), log_scale: 0.0 };
    pub const ONE: ScaledComplex = ScaledComplex { mantissa: Complex64::new(1.0, 0.0), log_scale: 0.0 };

    pub fn new(mantissa: Complex64, log_scale: f64) -> Self {
        ScaledComplex { mantissa, log_scale }.normalize()
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0.0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), 0.0)
    }

    /// `exp(z)` without forming it.
    pub fn from_log(z: Complex64) -> Self {
        let k = z.re.floor();
        ScaledComplex { mantissa: Complex64::from_polar((z.re - k).exp(), z.im), log_scale: k }.normalize()
    }

    pub fn normalize(self) -> Self {
        let a = self.mantissa.norm();
        if a == 0.0 {
            return Self::ZERO;
        }
        if !a.is_finite() || !self.log_scale.is_finite() {
            return self;
        }
        let k = a.ln().floor();
        let mut m = self.mantissa * (-k).exp();
        let mut ls = self.log_scale + k;
        // ln/exp rounding can leave |m| a hair outside [1, e)
        let am = m.norm();
        if am < 1.0 {
            m *= std::f64::consts::E;
            ls -= 1.0;
        } else if am >= std::f64::consts::E {
            m /= std::f64::consts::E;
            ls += 1.0;
        }
        ScaledComplex { mantissa: m, log_scale: ls }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    /// The plain complex value; overflows to infinity or underflows to zero
    /// when not representable.
    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return self.mantissa;
        }
        let e = self.log_scale;
        if e > 700.0 || e < -700.0 {
            // split to avoid exp overflow when the mantissa can absorb it
            let h = 0.5 * e;
            self.mantissa * h.exp() * h.exp()
        } else {
            self.mantissa * e.exp()
        }
    }

    pub fn re(self) -> f64 {
        self.to_complex().re
    }

    /// `ln |value|`.
    pub fn ln_abs(self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }

    /// Natural log of the value, principal branch of the mantissa argument.
    pub fn ln(self) -> Complex64 {
        self.mantissa.ln() + self.log_scale
    }

    pub fn abs(self) -> ScaledComplex {
        ScaledComplex { mantissa: Complex64::new(self.mantissa.norm(), 0.0), log_scale: self.log_scale }.normalize()
    }

    pub fn norm_sqr(self) -> ScaledComplex {
        ScaledComplex { mantissa: Complex64::new(self.mantissa.norm_sqr(), 0.0), log_scale: 2.0 * self.log_scale }
            .normalize()
    }

    pub fn conj(self) -> Self {
        ScaledComplex { mantissa: self.mantissa.conj(), log_scale: self.log_scale }
    }

    pub fn inv(self) -> Self {
        ScaledComplex { mantissa: self.mantissa.inv(), log_scale: -self.log_scale }.normalize()
    }

    /// Multiply by `exp(c)` for real `c`.
    pub fn scale_exp(self, c: f64) -> Self {
        if self.is_zero() {
            return self;
        }
        ScaledComplex { mantissa: self.mantissa, log_scale: self.log_scale + c }
    }

    pub fn scale(self, c: Complex64) -> Self {
        ScaledComplex { mantissa: self.mantissa * c, log_scale: self.log_scale }.normalize()
    }

    /// Relative distance `|a - b| / |b|`, computed in scaled form.
    pub fn rel_diff(self, other: ScaledComplex) -> f64 {
        let d = self - other;
        if other.is_zero() {
            return d.to_complex().norm();
        }
        (d / other).to_complex().norm()
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;
    fn mul(self, rhs: Self) -> Self {
        ScaledComplex { mantissa: self.mantissa * rhs.mantissa, log_scale: self.log_scale + rhs.log_scale }.normalize()
    }
}

impl Div for ScaledComplex {
    type Output = ScaledComplex;
    fn div(self, rhs: Self) -> Self {
        ScaledComplex { mantissa: self.mantissa / rhs.mantissa, log_scale: self.log_scale - rhs.log_scale }.normalize()
    }
}

impl Add for ScaledComplex {
    type Output = ScaledComplex;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.log_scale >= rhs.log_scale { (self, rhs) } else { (rhs, self) };
        let m = hi.mantissa + lo.mantissa * (lo.log_scale - hi.log_scale).exp();
        ScaledComplex { mantissa: m, log_scale: hi.log_scale }.normalize()
    }
}

impl Neg for ScaledComplex {
    type Output = ScaledComplex;
    fn neg(self) -> Self {
        ScaledComplex { mantissa: -self.mantissa, log_scale: self.log_scale }
    }
}

impl Sub for ScaledComplex {
    type Output = ScaledComplex;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}
