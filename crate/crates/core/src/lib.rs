//! Homotopy transfer of A-infinity structures on finite-dimensional
//! dg-algebras, and the explicit triple products on elliptic curves
//! (holomorphic series, Fukaya series, and the homotopy between them),
//! together with the quadrature pipeline used to check them.
//!
//! The crate is split into four areas:
//!
//! - [`ainf`]: graded linear algebra, dg-algebras, Hodge data, the
//!   transfer recursion and residual checkers for the A-infinity identities.
//! - [`theta`]: theta functions with rational characteristics.
//! - [`elliptic`]: closed-form series for triple products of line bundles
//!   on `C / (Z + Z tau)`.
//! - [`oracle`]: a grid/FFT pipeline that recomputes the same products by
//!   brute force.

pub mod ainf;
pub mod elliptic;
pub mod linalg;
pub mod oracle;
pub mod theta;

pub use num_complex::Complex64 as C64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);
