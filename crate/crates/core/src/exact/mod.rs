//! The ring tower: every algebraic structure the solvers compute in.
//!
//! From the bottom up:
//!
//! - [`GaussianRational`]: the base field ℚ(i): complex numbers with exact
//!   rational real and imaginary parts.
//! - [`MatC`]: dense matrices over ℚ(i); houses the Laurent coefficients Vₖ,
//!   the Taylor coefficients aⱼ of θ, and every block matrix.
//! - [`MatPolyX`]: polynomials in x with matrix coefficients; houses θ(x)
//!   and polynomial potentials.
//! - [`MatLaurent`]: truncated Laurent series Σ_{k≥−1} Vₖ xᵏ; houses the
//!   solution stream of V″ = V′V.
//! - [`ScalarPolyZ`] / [`MatPolyZ`]: polynomials in the spectral variable z
//!   with scalar and matrix coefficients.
//! - [`RatMatZ`]: matrix-valued rational functions of z: a matrix-polynomial
//!   numerator over a monic scalar-polynomial denominator; houses the
//!   coefficients b_j(z) of the spectral operator.
//! - [`resolvent_solve`]: the division-free linear solver producing
//!   (A + zI)⁻¹·rhs exactly over ℚ(i)(z).
//!
//! No floating-point number appears anywhere in this module.

mod laurent;
mod matrix;
mod polyx;
mod polyz;
mod ratmat;
mod resolvent;
mod scalar;

pub use laurent::MatLaurent;
pub use matrix::MatC;
pub use polyx::MatPolyX;
pub use polyz::{MatPolyZ, ScalarPolyZ};
pub use ratmat::RatMatZ;
pub use resolvent::{char_adjugate, resolvent_solve};
pub use scalar::{parse_rational, rational_to_string, GaussianRational};

/// Arbitrary-precision rational, re-exported for signatures that need exact
/// real quantities (norms, bounds).
pub use num::BigRational;
