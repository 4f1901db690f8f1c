use crate::{Error, Result};
use num_complex::Complex64;

// Lanczos coefficients for g = 607/128, 14 terms.
const G_HALF: f64 = 5.242_187_5;
const C0: f64 = 0.999_999_999_999_997_1;
const COF: [f64; 14] = [
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Shift cap for the recurrence used left of `Re s = 1/2`.
const MAX_SHIFT: f64 = 1.0e5;

fn lanczos(z: Complex64) -> Complex64 {
    let t = z + G_HALF;
    let mut ser = Complex64::new(C0, 0.0);
    let mut y = z;
    for c in COF {
        y += 1.0;
        ser += c / y;
    }
    (z + 0.5) * t.ln() - t + (ser * SQRT_2PI / z).ln()
}

/// `ln Γ(s)`, continued analytically off the negative real axis.
///
/// Uses the Lanczos form for `Re s >= 1/2`; to the left the argument is pushed
/// right by the recurrence `ln Γ(s) = ln Γ(s + n) - Σ ln(s + k)`, which keeps
/// the branch continuous in each half-plane.
pub fn log_gamma(s: Complex64) -> Result<Complex64> {
    if s.im == 0.0 && s.re <= 0.0 && s.re.fract() == 0.0 {
        return Err(Error::Pole(format!("Gamma at {}", s.re)));
    }
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::Domain(format!("log_gamma({s})")));
    }
    if s.re >= 0.5 {
        return Ok(lanczos(s));
    }
    let n = (0.5 - s.re).ceil();
    if n > MAX_SHIFT {
        return Err(Error::Domain(format!("log_gamma: Re s = {} too negative", s.re)));
    }
    let n = n as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        acc += (s + k as f64).ln();
    }
    Ok(lanczos(s + n as f64) - acc)
}
