//! Separated radial equations of the massive spin-3/2 (Rarita–Schwinger) field
//! in static de Sitter coordinates.
//!
//! The crate builds the constant matrix algebra, the spherical tetrad geometry,
//! the half-integer Wigner functions, the 16-component spherical-wave ansatz,
//! the radial coefficient matrices with their constraint rows, and an adaptive
//! integrator with Frobenius endpoint analysis.

pub mod adjudication;
pub mod algebra;
pub mod ansatz;
pub mod error;
pub mod geometry;
pub mod halfint;
pub mod matrix;
pub mod profile;
pub mod radial;
pub mod report;
pub mod solver;
pub mod wigner;

pub use error::{Error, Result};
pub use halfint::{HalfInt, Parity};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use report::{Check, CheckReport};

/// Imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Shorthand for a real number as a complex value.
#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
