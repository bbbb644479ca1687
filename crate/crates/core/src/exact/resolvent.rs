//! Exact resolvent (zI + A)⁻¹ via the Faddeev–LeVerrier recursion.
//!
//! For a square matrix A over ℚ(i), the resolvent is the matrix rational
//! function
//!
//! ```text
//! (zI + A)⁻¹ = adj(zI + A) / det(zI + A),
//! ```
//!
//! and both the adjugate (a matrix polynomial in z) and the monic
//! determinant are produced exactly by a single trace recursion, with no
//! factorization or root finding. The recursion runs on M = −A:
//!
//! ```text
//! B₀ = I,   c_{n−k−1} = −tr(M·B_k)/(k + 1),   B_{k+1} = M·B_k + c_{n−k−1}·I,
//! ```
//!
//! giving det(zI + A) = zⁿ + c_{n−1}z^{n−1} + ⋯ + c₀ and
//! adj(zI + A) = Σ_{k=0}^{n−1} z^{n−1−k}·B_k, with the closure B_n = 0
//! serving as a built-in consistency check.

use super::matrix::MatC;
use super::polyz::{MatPolyZ, ScalarPolyZ};
use super::ratmat::RatMatZ;
use super::scalar::GaussianRational;

/// Adjugate and determinant of zI + A.
///
/// Returns `(adj, det)` where `adj[j]` is the coefficient of zʲ in
/// adj(zI + A) for j = 0..n−1 and `det` is the monic characteristic
/// polynomial det(zI + A) of degree n = dim(A).
///
/// # Panics
///
/// Panics if `a` is not square, or if the recursion's closure identity
/// B_n = 0 fails (which would indicate an internal arithmetic error).
#[must_use]
pub fn char_adjugate(a: &MatC) -> (Vec<MatC>, ScalarPolyZ) {
    assert!(a.is_square(), "resolvent requires a square matrix");
    let n = a.rows();
    if n == 0 {
        return (Vec::new(), ScalarPolyZ::one());
    }
    let m = a.neg();
    let mut det_coeffs = vec![GaussianRational::zero(); n + 1];
    det_coeffs[n] = GaussianRational::one();

    // adj[j] holds the coefficient of z^j; the recursion produces B_k,
    // which multiplies z^{n-1-k}.
    let mut adj = vec![MatC::zero(n, n); n];
    let mut b = MatC::identity(n);
    for k in 0..n {
        let mb = m.mul(&b);
        let c = mb
            .trace()
            .neg()
            .mul(&GaussianRational::from_ratio(1, k as i64 + 1));
        adj[n - 1 - k] = b;
        det_coeffs[n - 1 - k] = c.clone();
        b = mb.add(&MatC::scalar(n, &c));
    }
    assert!(b.is_zero(), "Faddeev-LeVerrier closure B_n = 0 must hold");
    (adj, ScalarPolyZ::from_coeffs(det_coeffs))
}

/// Solves (zI + A)·X = RHS exactly for a block right-hand side.
///
/// `a` is n×n and `rhs_blocks` is a vertical stack of N×N blocks with
/// (number of blocks)·N = n. Returns the corresponding blocks of the
/// solution X = adj(zI + A)·RHS / det(zI + A), each reduced to the normal
/// form of [`RatMatZ`] (so blocks annihilated by the adjugate come back as
/// exact zeros with denominator 1).
///
/// # Panics
///
/// Panics if `a` is not square, the blocks are not square of a common
/// dimension, or the block count does not tile the rows of `a`.
#[must_use]
pub fn resolvent_solve(a: &MatC, rhs_blocks: &[MatC]) -> Vec<RatMatZ> {
    assert!(a.is_square(), "resolvent requires a square matrix");
    assert!(!rhs_blocks.is_empty(), "at least one right-hand side block");
    let block_dim = rhs_blocks[0].rows();
    assert!(
        rhs_blocks
            .iter()
            .all(|b| b.rows() == block_dim && b.cols() == block_dim),
        "right-hand side blocks must be square of a common dimension"
    );
    let n = a.rows();
    assert_eq!(
        rhs_blocks.len() * block_dim,
        n,
        "blocks must tile the rows of the matrix"
    );

    let mut stacked = MatC::zero(n, block_dim);
    for (i, blk) in rhs_blocks.iter().enumerate() {
        stacked.set_block(i * block_dim, 0, blk);
    }

    let (adj, det) = char_adjugate(a);
    // prods[j] = (coefficient of z^j in the adjugate) · RHS, an n×N matrix.
    let prods: Vec<MatC> = adj.iter().map(|coeff| coeff.mul(&stacked)).collect();

    (0..rhs_blocks.len())
        .map(|r| {
            let numerator_coeffs = prods
                .iter()
                .map(|p| p.block(r * block_dim, 0, block_dim, block_dim))
                .collect();
            RatMatZ::new(
                MatPolyZ::from_coeffs(block_dim, numerator_coeffs),
                det.clone(),
            )
        })
        .collect()
}

// ============================================================
// Tests
// ============================================================
