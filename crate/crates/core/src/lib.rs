//! Numerical laboratory for the real-analytic Eisenstein series
//! `E(z, 1/2 + iT)` of `SL2(Z)` restricted to vertical geodesic segments.

pub mod arith_coeffs;
pub mod eisenstein;
pub mod error;
pub mod mellin_side;
pub mod quad;
pub mod rational_x;
pub mod reduce;
pub mod restriction;
pub mod special;
pub mod sums_lab;

pub use error::{Error, Result};
pub use num_complex::Complex64;
