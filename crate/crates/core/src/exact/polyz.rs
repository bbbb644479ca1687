//! Scalar and matrix polynomials in the spectral variable z.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::MatC;
use super::scalar::GaussianRational;
use crate::{Error, Result};

/// A polynomial in z with [`GaussianRational`] coefficients.
///
/// Trimmed representation: the leading coefficient is nonzero unless the
/// polynomial is zero, and the zero polynomial stores no coefficients.
/// These arise as denominators of resolvent entries, i.e. det(A + zI).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "ScalarPolyZSerde", into = "ScalarPolyZSerde")]
pub struct ScalarPolyZ {
    coeffs: Vec<GaussianRational>,
}

/// JSON shadow: `{"coeffs": [GaussianRational, …]}` with index = degree.
#[derive(Serialize, Deserialize)]
struct ScalarPolyZSerde {
    coeffs: Vec<GaussianRational>,
}

impl TryFrom<ScalarPolyZSerde> for ScalarPolyZ {
    type Error = Error;
    fn try_from(s: ScalarPolyZSerde) -> Result<Self> {
        Ok(Self::from_coeffs(s.coeffs))
    }
}

impl From<ScalarPolyZ> for ScalarPolyZSerde {
    fn from(p: ScalarPolyZ) -> Self {
        ScalarPolyZSerde { coeffs: p.coeffs }
    }
}

impl ScalarPolyZ {
    /// The zero polynomial.
    #[must_use]
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// The constant polynomial 1.
    #[must_use]
    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    /// The monomial z.
    #[must_use]
    pub fn z() -> Self {
        Self::from_coeffs(vec![GaussianRational::zero(), GaussianRational::one()])
    }

    /// A constant polynomial.
    #[must_use]
    pub fn constant(c: GaussianRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// Builds from a coefficient list (index = degree), trimming trailing
    /// zeros.
    #[must_use]
    pub fn from_coeffs(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(GaussianRational::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
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

    /// True iff this is the constant polynomial 1.
    #[must_use]
    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// The coefficient of zᵏ (zero beyond the degree).
    #[must_use]
    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussianRational::zero)
    }

    /// Leading coefficient, if the polynomial is nonzero.
    #[must_use]
    pub fn leading(&self) -> Option<&GaussianRational> {
        self.coeffs.last()
    }

    /// True iff nonzero with leading coefficient 1.
    #[must_use]
    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(GaussianRational::is_one)
    }

    /// Exact sum.
    #[must_use]
    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..len).map(|k| self.coeff(k).add(&other.coeff(k))).collect())
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
            coeffs: self.coeffs.iter().map(GaussianRational::neg).collect(),
        }
    }

    /// Exact product.
    #[must_use]
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![GaussianRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Self::from_coeffs(coeffs)
    }

    /// Scalar multiple.
    #[must_use]
    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    /// Euclidean division: (quotient, remainder) with
    /// `self = q·divisor + r` and deg r < deg divisor.
    ///
    /// # Panics
    ///
    /// Panics if `divisor` is zero.
    #[must_use]
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let d_deg = divisor.degree().expect("nonzero divisor");
        let d_lead_inv = divisor
            .leading()
            .expect("nonzero divisor")
            .inv()
            .expect("leading coefficient is nonzero");
        let mut rem = self.clone();
        let mut quot = vec![GaussianRational::zero(); self.coeffs.len().saturating_sub(d_deg)];
        while let Some(r_deg) = rem.degree() {
            if r_deg < d_deg {
                break;
            }
            let factor = rem.leading().expect("nonzero remainder").mul(&d_lead_inv);
            let shift = r_deg - d_deg;
            quot[shift] = factor.clone();
            let mut sub = vec![GaussianRational::zero(); shift];
            sub.extend(divisor.coeffs.iter().map(|c| c.mul(&factor)));
            rem = rem.sub(&Self::from_coeffs(sub));
        }
        (Self::from_coeffs(quot), rem)
    }

    /// Exact quotient; the division must leave no remainder.
    ///
    /// # Panics
    ///
    /// Panics if the division is inexact or the divisor is zero.
    #[must_use]
    pub fn exact_div(&self, divisor: &Self) -> Self {
        let (q, r) = self.div_rem(divisor);
        assert!(r.is_zero(), "exact_div requires an exact division");
        q
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
    ///
    /// gcd(0, 0) = 0; otherwise the result is monic.
    #[must_use]
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.make_monic()
    }

    /// Scales a nonzero polynomial to have leading coefficient 1; leaves the
    /// zero polynomial unchanged.
    #[must_use]
    pub fn make_monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(lead) => {
                let inv = lead.inv().expect("leading coefficient is nonzero");
                self.scale(&inv)
            }
        }
    }
}

impl fmt::Display for ScalarPolyZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        Ok(())
    }
}

/// A polynomial in z with square [`MatC`] coefficients, mirroring
/// [`super::MatPolyX`] in layout and JSON encoding.
///
/// Houses numerators of matrix rational functions of z.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "MatPolyZSerde", into = "MatPolyZSerde")]
pub struct MatPolyZ {
    dim: usize,
    coeffs: Vec<MatC>,
}

/// JSON shadow: `{"dim": N, "coeffs": [MatC, …]}` with index = degree.
#[derive(Serialize, Deserialize)]
struct MatPolyZSerde {
    dim: usize,
    coeffs: Vec<MatC>,
}

impl TryFrom<MatPolyZSerde> for MatPolyZ {
    type Error = Error;
    fn try_from(s: MatPolyZSerde) -> Result<Self> {
        for c in &s.coeffs {
            if c.rows() != s.dim || c.cols() != s.dim {
                return Err(Error::DimensionMismatch(format!(
                    "z-polynomial of dimension {} has a {}x{} coefficient",
                    s.dim,
                    c.rows(),
                    c.cols()
                )));
            }
        }
        Ok(Self::from_coeffs(s.dim, s.coeffs))
    }
}

impl From<MatPolyZ> for MatPolyZSerde {
    fn from(p: MatPolyZ) -> Self {
        MatPolyZSerde {
            dim: p.dim,
            coeffs: p.coeffs,
        }
    }
}

impl MatPolyZ {
    /// The zero polynomial of dimension `dim`.
    #[must_use]
    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: Vec::new() }
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

    /// The coefficient of zᵏ (zero beyond the degree).
    #[must_use]
    pub fn coeff(&self, k: usize) -> MatC {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| MatC::zero(self.dim, self.dim))
    }

    /// Exact sum.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch.
    #[must_use]
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "z-polynomial sum requires equal dimensions");
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k).add(&other.coeff(k))).collect();
        Self::from_coeffs(self.dim, coeffs)
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
            dim: self.dim,
            coeffs: self.coeffs.iter().map(MatC::neg).collect(),
        }
    }

    /// Exact (noncommutative) product of matrix polynomials.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch.
    #[must_use]
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "z-polynomial product requires equal dimensions");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.dim);
        }
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![MatC::zero(self.dim, self.dim); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Self::from_coeffs(self.dim, coeffs)
    }

    /// Product with a scalar polynomial in z.
    #[must_use]
    pub fn mul_scalar_poly(&self, s: &ScalarPolyZ) -> Self {
        if self.is_zero() || s.is_zero() {
            return Self::zero(self.dim);
        }
        let s_deg = s.degree().expect("nonzero scalar polynomial");
        let len = self.coeffs.len() + s_deg;
        let mut coeffs = vec![MatC::zero(self.dim, self.dim); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            for k in 0..=s_deg {
                let c = s.coeff(k);
                if c.is_zero() {
                    continue;
                }
                coeffs[i + k] = coeffs[i + k].add(&a.scale(&c));
            }
        }
        Self::from_coeffs(self.dim, coeffs)
    }

    /// Left product by a constant matrix.
    #[must_use]
    pub fn lmul_mat(&self, a: &MatC) -> Self {
        Self::from_coeffs(self.dim, self.coeffs.iter().map(|c| a.mul(c)).collect())
    }

    /// Right product by a constant matrix.
    #[must_use]
    pub fn rmul_mat(&self, a: &MatC) -> Self {
        Self::from_coeffs(self.dim, self.coeffs.iter().map(|c| c.mul(a)).collect())
    }

    /// The (r, c) entry as a scalar polynomial in z.
    #[must_use]
    pub fn entry(&self, r: usize, c: usize) -> ScalarPolyZ {
        ScalarPolyZ::from_coeffs(self.coeffs.iter().map(|m| m.get(r, c).clone()).collect())
    }

    /// Monic gcd of all entry polynomials (the content up to scale).
    ///
    /// Zero polynomial for the zero matrix polynomial.
    #[must_use]
    pub fn content(&self) -> ScalarPolyZ {
        let mut g = ScalarPolyZ::zero();
        for r in 0..self.dim {
            for c in 0..self.dim {
                g = g.gcd(&self.entry(r, c));
                if g.is_one() {
                    return g;
                }
            }
        }
        g
    }

    /// Divides every entry exactly by a scalar polynomial.
    ///
    /// # Panics
    ///
    /// Panics if some entry is not divisible.
    #[must_use]
    pub fn exact_div_scalar(&self, d: &ScalarPolyZ) -> Self {
        let mut out_entries: Vec<Vec<ScalarPolyZ>> = Vec::with_capacity(self.dim);
        for r in 0..self.dim {
            let mut row = Vec::with_capacity(self.dim);
            for c in 0..self.dim {
                row.push(self.entry(r, c).exact_div(d));
            }
            out_entries.push(row);
        }
        Self::from_entries(&out_entries)
    }

    /// Builds from a full square grid of scalar entry polynomials.
    ///
    /// # Panics
    ///
    /// Panics if the grid is ragged.
    #[must_use]
    pub fn from_entries(entries: &[Vec<ScalarPolyZ>]) -> Self {
        let dim = entries.len();
        assert!(entries.iter().all(|row| row.len() == dim), "entry grid must be square");
        let deg = entries
            .iter()
            .flatten()
            .filter_map(ScalarPolyZ::degree)
            .max();
        let Some(deg) = deg else {
            return Self::zero(dim);
        };
        let coeffs = (0..=deg)
            .map(|k| MatC::from_fn(dim, dim, |r, c| entries[r][c].coeff(k)))
            .collect();
        Self::from_coeffs(dim, coeffs)
    }
}

// ============================================================
// Tests
// ============================================================

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[i64]) -> ScalarPolyZ {
        ScalarPolyZ::from_coeffs(
            coeffs.iter().map(|&c| GaussianRational::from_integer(c)).collect(),
        )
    }

    #[test]
    fn test_div_rem() {
        // z² + 3z + 2 = (z + 1)(z + 2)
        let prod = p(&[2, 3, 1]);
        let (q, r) = prod.div_rem(&p(&[1, 1]));
        assert_eq!(q, p(&[2, 1]), "quotient must be z + 2");
        assert!(r.is_zero(), "division must be exact here");
        let (q2, r2) = p(&[1, 0, 1]).div_rem(&p(&[1, 1]));
        assert_eq!(
            q2.mul(&p(&[1, 1])).add(&r2),
            p(&[1, 0, 1]),
            "q·d + r must reconstruct the dividend"
        );
    }

    #[test]
    fn test_gcd_is_monic() {
        let a = p(&[2, 3, 1]).scale(&GaussianRational::from_integer(4)); // 4(z+1)(z+2)
        let b = p(&[1, 1]).scale(&GaussianRational::from_integer(-3)); // -3(z+1)
        assert_eq!(a.gcd(&b), p(&[1, 1]), "gcd must be the monic z + 1");
        assert!(p(&[]).gcd(&p(&[])).is_zero(), "gcd(0,0) = 0");
    }

    #[test]
    fn test_mat_poly_entry_and_content() {
        let z = ScalarPolyZ::z();
        let m = MatPolyZ::from_entries(&[
            vec![z.mul(&z), z.clone()],
            vec![ScalarPolyZ::zero(), z.scale(&GaussianRational::from_integer(5))],
        ]);
        assert_eq!(m.entry(0, 0), z.mul(&z), "entry extraction must match");
        assert_eq!(m.content(), z, "content is the monic gcd of the entries");
        let reduced = m.exact_div_scalar(&z);
        assert_eq!(reduced.entry(0, 0), z, "z²/z = z");
    }

    #[test]
    fn test_json_round_trip() {
        let m = MatPolyZ::from_coeffs(
            2,
            vec![MatC::identity(2), MatC::from_i64_rows(&[&[0, 1], &[0, 0]])],
        );
        let text = serde_json::to_string(&m).expect("serialize");
        let back: MatPolyZ = serde_json::from_str(&text).expect("deserialize");
        assert_eq!(back, m, "round trip must be exact");
    }
}
