//! Exact arithmetic for the matrix autonomous equation V″(x) = V′(x)V(x) and
//! for the bispectral algebra of the Schrödinger operator L = −∂ₓ² + V′(x).
//!
//! The crate is organized as a tower:
//!
//! - [`exact`]: the ring tower: Gaussian rationals, dense matrices over them,
//!   matrix polynomials in x, truncated matrix Laurent series, scalar and
//!   matrix polynomials in z, matrix rational functions in z, and a
//!   division-free resolvent solver for (A + zI)c = rhs.
//! - [`autonomous`]: the Laurent-coefficient recursion solving V″ = V′V:
//!   residue normalization, the Tₖ operators and their blockwise inverses,
//!   convergence bounds, equivariance checks, and polynomial solutions built
//!   from nilpotent seeds.
//! - [`bispectral`]: the Pₖ family, the A₁/A₂ block matrices, the membership
//!   decision for the algebra 𝔸 of matrix polynomials θ admitting a spectral
//!   operator B with ψB = θψ, and the synthesis of that B.
//! - [`verify`]: independent oracles: a closed-form scalar series, the closed
//!   forms of the residue-only potential −2I/x, and a direct symbolic
//!   expansion of ψB − θψ. None of them reuse the solver code paths.
//! - [`fixtures`]: a small self-verifying corpus of worked examples shared by
//!   the test suite and the command-line tool.
//!
//! All arithmetic is exact: the base field is ℚ(i) and no floating-point
//! value ever enters a computation. Every value is immutable after
//! construction and safe to share between threads; the [`exec`] module
//! provides the data-parallel sweep primitive used by the batch entry points.

pub mod autonomous;
pub mod bispectral;
mod error;
pub mod exact;
pub mod exec;
pub mod fixtures;
pub mod verify;

pub use error::{Error, Result};
