//! Matrix polynomials in the physical variable x.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::MatC;
use super::scalar::GaussianRational;
use crate::{Error, Result};

/// A polynomial Σ aₖ xᵏ with square [`MatC`] coefficients of uniform
/// dimension.
///
/// The coefficient list is always trimmed: the leading coefficient is nonzero
/// unless the polynomial is zero, and the zero polynomial stores no
/// coefficients at all. Its degree is therefore the distinguished sentinel
/// [`None`], never an integer that could collide with the Laurent index −1.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "MatPolyXSerde", into = "MatPolyXSerde")]
pub struct MatPolyX {
    dim: usize,
    coeffs: Vec<MatC>,
}

/// JSON shadow: `{"dim": N, "coeffs": [MatC, …]}` with index = degree.
#[derive(Serialize, Deserialize)]
struct MatPolyXSerde {
    dim: usize,
    coeffs: Vec<MatC>,
}

impl TryFrom<MatPolyXSerde> for MatPolyX {
    type Error = Error;
    fn try_from(s: MatPolyXSerde) -> Result<Self> {
        for c in &s.coeffs {
            if c.rows() != s.dim || c.cols() != s.dim {
                return Err(Error::DimensionMismatch(format!(
                    "polynomial of dimension {} has a {}x{} coefficient",
                    s.dim,
                    c.rows(),
                    c.cols()
                )));
            }
        }
        Ok(Self::from_coeffs(s.dim, s.coeffs))
    }
}

impl From<MatPolyX> for MatPolyXSerde {
    fn from(p: MatPolyX) -> Self {
        MatPolyXSerde {
            dim: p.dim,
            coeffs: p.coeffs,
        }
    }
}

impl MatPolyX {
    /// The zero polynomial of dimension `dim`.
    #[must_use]
    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: Vec::new() }
    }

    /// Builds from a coefficient list (index = degree), trimming trailing
    /// zero coefficients.
    ///
    /// # Panics
    ///
    /// Panics if some coefficient is not square of dimension `dim`.
    #[must_use]
    pub fn from_coeffs(dim: usize, mut coeffs: Vec<MatC>) -> Self {
        assert!(
            coeffs.iter().all(|c| c.rows() == dim && c.cols() == dim),
            "all coefficients must be square of the declared dimension"
        );
        while coeffs.last().is_some_and(MatC::is_zero) {
            coeffs.pop();
        }
        Self { dim, coeffs }
    }

    /// The constant polynomial with value `a`.
    ///
    /// # Panics
    ///
    /// Panics if `a` is not square.
    #[must_use]
    pub fn constant(a: MatC) -> Self {
        assert!(a.is_square(), "constant coefficient must be square");
        let dim = a.rows();
        Self::from_coeffs(dim, vec![a])
    }

    /// The monomial a·x^deg.
    ///
    /// # Panics
    ///
    /// Panics if `a` is not square.
    #[must_use]
    pub fn monomial(a: MatC, deg: usize) -> Self {
        assert!(a.is_square(), "monomial coefficient must be square");
        let dim = a.rows();
        let mut coeffs = vec![MatC::zero(dim, dim); deg];
        coeffs.push(a);
        Self::from_coeffs(dim, coeffs)
    }

    /// Matrix dimension N of the coefficients.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Degree, or [`None`] for the zero polynomial.
    #[must_use]
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// True iff this is the zero polynomial.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The coefficient of xᵏ (zero beyond the degree).
    #[must_use]
    pub fn coeff(&self, k: usize) -> MatC {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| MatC::zero(self.dim, self.dim))
    }

    /// Borrowed coefficient of xᵏ, if stored.
    #[must_use]
    pub fn coeff_ref(&self, k: usize) -> Option<&MatC> {
        self.coeffs.get(k)
    }

    /// Exact sum.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch.
    #[must_use]
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "polynomial sum requires equal dimensions");
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k).add(&other.coeff(k))).collect();
        Self::from_coeffs(self.dim, coeffs)
    }

    /// Exact difference.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch.
    #[must_use]
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Additive inverse.
    #[must_use]
    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(MatC::neg).collect(),
        }
    }

    /// Exact (noncommutative) product.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch.
    #[must_use]
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "polynomial product requires equal dimensions");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.dim);
        }
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![MatC::zero(self.dim, self.dim); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Self::from_coeffs(self.dim, coeffs)
    }

    /// Scalar multiple c·p(x).
    #[must_use]
    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::from_coeffs(self.dim, self.coeffs.iter().map(|m| m.scale(c)).collect())
    }

    /// Commutator [p, q] = pq − qp.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch.
    #[must_use]
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Formal derivative d/dx.
    #[must_use]
    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| a.scale(&GaussianRational::from_integer(k as i64)))
            .collect();
        Self::from_coeffs(self.dim, coeffs)
    }

    /// Nonnegative power by repeated multiplication.
    #[must_use]
    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(MatC::identity(self.dim));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl fmt::Display for MatPolyX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return writeln!(f, "0");
        }
        for (k, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            writeln!(f, "x^{k} ·")?;
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

// ============================================================
// Tests
// ============================================================

#[cfg(test)]
mod tests {
    use super::*;

    fn v1() -> MatC {
        MatC::from_i64_rows(&[&[0, 1], &[0, 0]])
    }

    fn v0() -> MatC {
        MatC::from_i64_rows(&[&[2, 3], &[0, 0]])
    }

    #[test]
    fn test_derivative() {
        let p = MatPolyX::from_coeffs(2, vec![v0(), v1()]);
        assert_eq!(
            p.derivative(),
            MatPolyX::constant(v1()),
            "d/dx (V₀ + V₁x) = V₁"
        );
        assert!(
            MatPolyX::constant(v0()).derivative().is_zero(),
            "derivative of a constant is zero"
        );
    }

    #[test]
    fn test_self_commutator_vanishes() {
        let p = MatPolyX::from_coeffs(2, vec![v0(), v1()]);
        assert!(p.commutator(&p).is_zero(), "[p, p] = 0");
    }

    #[test]
    fn test_monomial_product() {
        // V₀·(V₁x) = V₀V₁·x, and with these values V₀V₁ = [[0,2],[0,0]].
        let p = MatPolyX::constant(v0());
        let q = MatPolyX::monomial(v1(), 1);
        let prod = p.mul(&q);
        assert_eq!(prod.degree(), Some(1));
        assert_eq!(prod.coeff(1), MatC::from_i64_rows(&[&[0, 2], &[0, 0]]));
        assert!(prod.coeff(0).is_zero());
        // The reversed order annihilates: V₁V₀ = 0, so the product trims
        // to the zero polynomial.
        assert_eq!(q.mul(&p).degree(), None, "products re-trim on cancellation");
    }

    #[test]
    fn test_zero_degree_sentinel() {
        let z = MatPolyX::zero(2);
        assert_eq!(z.degree(), None, "zero polynomial has the sentinel degree");
        let cancel = MatPolyX::monomial(v1(), 2).sub(&MatPolyX::monomial(v1(), 2));
        assert_eq!(cancel.degree(), None, "cancellation must re-trim to the sentinel");
    }

    #[test]
    fn test_json_round_trip() {
        let p = MatPolyX::from_coeffs(2, vec![v0(), v1()]);
        let text = serde_json::to_string(&p).expect("serialize");
        let back: MatPolyX = serde_json::from_str(&text).expect("deserialize");
        assert_eq!(back, p, "round trip must be exact");
    }
}
