//! Matrix rational functions of z with a common scalar denominator.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::MatC;
use super::polyz::{MatPolyZ, ScalarPolyZ};
use super::scalar::GaussianRational;
use crate::{Error, Result};

/// A matrix rational function num(z)/den(z) with a matrix polynomial
/// numerator and a scalar polynomial denominator.
///
/// Normal form maintained by every constructor and operation:
/// the denominator is monic, and gcd(den, content(num)) = 1 where
/// content(num) is the monic gcd of the numerator's entries. The zero
/// function is 0/1. Coefficients of the operators produced by synthesis
/// live here; for those, every entry has numerator degree at most the
/// denominator degree, so the value at z → ∞ is finite.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "RatMatZSerde", into = "RatMatZSerde")]
pub struct RatMatZ {
    num: MatPolyZ,
    den: ScalarPolyZ,
}

/// JSON shadow: `{"num": MatPolyZ, "den": ScalarPolyZ}`.
#[derive(Serialize, Deserialize)]
struct RatMatZSerde {
    num: MatPolyZ,
    den: ScalarPolyZ,
}

impl TryFrom<RatMatZSerde> for RatMatZ {
    type Error = Error;
    fn try_from(s: RatMatZSerde) -> Result<Self> {
        if s.den.is_zero() {
            return Err(Error::Parse("rational matrix with zero denominator".into()));
        }
        Ok(Self::new(s.num, s.den))
    }
}

impl From<RatMatZ> for RatMatZSerde {
    fn from(r: RatMatZ) -> Self {
        RatMatZSerde { num: r.num, den: r.den }
    }
}

impl RatMatZ {
    /// Builds num/den and reduces to normal form.
    ///
    /// # Panics
    ///
    /// Panics if `den` is the zero polynomial.
    #[must_use]
    pub fn new(num: MatPolyZ, den: ScalarPolyZ) -> Self {
        assert!(!den.is_zero(), "denominator must be nonzero");
        if num.is_zero() {
            return Self {
                num,
                den: ScalarPolyZ::one(),
            };
        }
        // Make the denominator monic, folding its leading coefficient into
        // the numerator.
        let lead = den.leading().expect("nonzero denominator").clone();
        let den = den.make_monic();
        let num = if lead.is_one() {
            num
        } else {
            let inv = lead.inv().expect("leading coefficient is nonzero");
            num.mul_scalar_poly(&ScalarPolyZ::constant(inv))
        };
        // Cancel the common polynomial factor.
        let g = num.content().gcd(&den);
        if g.is_one() {
            Self { num, den }
        } else {
            Self {
                num: num.exact_div_scalar(&g),
                den: den.exact_div(&g),
            }
        }
    }

    /// The zero function of dimension `dim`.
    #[must_use]
    pub fn zero(dim: usize) -> Self {
        Self {
            num: MatPolyZ::zero(dim),
            den: ScalarPolyZ::one(),
        }
    }

    /// A constant matrix as a rational function.
    #[must_use]
    pub fn from_const(a: MatC) -> Self {
        Self::new(MatPolyZ::constant(a), ScalarPolyZ::one())
    }

    /// A matrix polynomial as a rational function.
    #[must_use]
    pub fn from_poly(p: MatPolyZ) -> Self {
        Self::new(p, ScalarPolyZ::one())
    }

    /// Numerator in normal form.
    #[must_use]
    pub fn num(&self) -> &MatPolyZ {
        &self.num
    }

    /// Denominator in normal form (monic).
    #[must_use]
    pub fn den(&self) -> &ScalarPolyZ {
        &self.den
    }

    /// Matrix dimension N.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.num.dim()
    }

    /// True iff this is the zero function.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Exact sum over the common denominator.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch.
    #[must_use]
    pub fn add(&self, other: &Self) -> Self {
        let num = self
            .num
            .mul_scalar_poly(&other.den)
            .add(&other.num.mul_scalar_poly(&self.den));
        Self::new(num, self.den.mul(&other.den))
    }

    /// Exact difference.
    #[must_use]
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Additive inverse.
    #[must_use]
    pub fn neg(&self) -> Self {
        Self {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    /// Exact (noncommutative) product.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch.
    #[must_use]
    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    /// Scalar multiple.
    #[must_use]
    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim());
        }
        Self::new(
            self.num.mul_scalar_poly(&ScalarPolyZ::constant(c.clone())),
            self.den.clone(),
        )
    }

    /// Left product by a constant matrix.
    #[must_use]
    pub fn lmul_mat(&self, a: &MatC) -> Self {
        Self::new(self.num.lmul_mat(a), self.den.clone())
    }

    /// Right product by a constant matrix.
    #[must_use]
    pub fn rmul_mat(&self, a: &MatC) -> Self {
        Self::new(self.num.rmul_mat(a), self.den.clone())
    }

    /// Product with a scalar polynomial.
    #[must_use]
    pub fn mul_scalar_poly(&self, s: &ScalarPolyZ) -> Self {
        if s.is_zero() {
            return Self::zero(self.dim());
        }
        Self::new(self.num.mul_scalar_poly(s), self.den.clone())
    }

    /// Value of the function as z → ∞.
    ///
    /// [`Some`] value iff every entry has numerator degree at most the
    /// denominator degree: the matrix of leading coefficients at matching
    /// degree (zero rows/columns where the numerator degree is strictly
    /// smaller). [`None`] if the function grows.
    #[must_use]
    pub fn limit_at_infinity(&self) -> Option<MatC> {
        let d = self.den.degree().expect("denominator is nonzero");
        match self.num.degree() {
            None => Some(MatC::zero(self.dim(), self.dim())),
            Some(n) if n < d => Some(MatC::zero(self.dim(), self.dim())),
            Some(n) if n == d => Some(self.num.coeff(d)),
            Some(_) => None,
        }
    }
}

impl fmt::Display for RatMatZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dim = self.dim();
        for r in 0..dim {
            write!(f, "[ ")?;
            for c in 0..dim {
                if c > 0 {
                    write!(f, ", ")?;
                }
                let e = self.num.entry(r, c);
                if e.is_zero() {
                    write!(f, "0")?;
                } else if self.den.is_one() {
                    write!(f, "{e}")?;
                } else {
                    write!(f, "({e}) / ({})", self.den)?;
                }
            }
            writeln!(f, " ]")?;
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

    fn zpow(k: usize) -> ScalarPolyZ {
        let mut coeffs = vec![GaussianRational::zero(); k + 1];
        coeffs[k] = GaussianRational::one();
        ScalarPolyZ::from_coeffs(coeffs)
    }

    #[test]
    fn test_normal_form() {
        // (2z·I) / (2z²) must reduce to I / z with a monic denominator.
        let num = MatPolyZ::from_coeffs(2, vec![MatC::zero(2, 2), MatC::identity(2).scale(&GaussianRational::from_integer(2))]);
        let den = zpow(2).scale(&GaussianRational::from_integer(2));
        let r = RatMatZ::new(num, den);
        assert_eq!(*r.den(), zpow(1), "denominator must reduce to monic z");
        assert_eq!(r.num().coeff(0), MatC::identity(2), "numerator must reduce to I");
    }

    #[test]
    fn test_add_cancels() {
        // I/z − I/z = 0 with denominator 1.
        let r = RatMatZ::new(MatPolyZ::constant(MatC::identity(2)), zpow(1));
        let s = r.sub(&r);
        assert!(s.is_zero());
        assert!(s.den().is_one(), "zero must renormalize to 0/1");
    }

    #[test]
    fn test_limit_at_infinity() {
        // (A z + B) / z → A.
        let a = MatC::from_i64_rows(&[&[1, 2], &[3, 4]]);
        let b = MatC::from_i64_rows(&[&[5, 0], &[0, 0]]);
        let num = MatPolyZ::from_coeffs(2, vec![b, a.clone()]);
        let r = RatMatZ::new(num, zpow(1));
        assert_eq!(r.limit_at_infinity(), Some(a), "leading coefficients at equal degree");
        // B / z → 0.
        let s = RatMatZ::new(MatPolyZ::constant(MatC::identity(2)), zpow(1));
        assert_eq!(s.limit_at_infinity(), Some(MatC::zero(2, 2)));
        // (A z²) / z grows.
        let grow = RatMatZ::new(
            MatPolyZ::from_coeffs(2, vec![MatC::zero(2, 2), MatC::zero(2, 2), MatC::identity(2)]),
            zpow(1),
        );
        assert_eq!(grow.limit_at_infinity(), None);
    }

    #[test]
    fn test_product_reduces() {
        // (I/z) · (zI/1) = I.
        let a = RatMatZ::new(MatPolyZ::constant(MatC::identity(2)), zpow(1));
        let b = RatMatZ::from_poly(MatPolyZ::from_coeffs(2, vec![MatC::zero(2, 2), MatC::identity(2)]));
        let prod = a.mul(&b);
        assert!(prod.den().is_one());
        assert_eq!(prod.num().coeff(0), MatC::identity(2));
        assert_eq!(prod.num().degree(), Some(0));
    }

    #[test]
    fn test_json_round_trip() {
        let r = RatMatZ::new(MatPolyZ::constant(MatC::identity(2)), zpow(1));
        let text = serde_json::to_string(&r).expect("serialize");
        let back: RatMatZ = serde_json::from_str(&text).expect("deserialize");
        assert_eq!(back, r);
    }
}
