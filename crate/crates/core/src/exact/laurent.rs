//! Truncated matrix Laurent series in x with a simple pole at the origin.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::MatC;
use crate::{Error, Result};

/// A truncated matrix Laurent series
/// V(x) = V₋₁/x + V₀ + V₁x + ⋯ + V_K x^K.
///
/// `residue` is the coefficient of 1/x; `coeffs[k]` is the coefficient of
/// xᵏ for k = 0..=K. Unlike the polynomial types, the coefficient list is
/// kept at its stored length (no trimming): the truncation order K is part
/// of the data and records how far a solution was computed.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "MatLaurentSerde", into = "MatLaurentSerde")]
pub struct MatLaurent {
    dim: usize,
    residue: MatC,
    coeffs: Vec<MatC>,
}

/// JSON shadow: `{"dim": N, "residue": MatC, "coeffs": [MatC, …]}`.
#[derive(Serialize, Deserialize)]
struct MatLaurentSerde {
    dim: usize,
    residue: MatC,
    coeffs: Vec<MatC>,
}

impl TryFrom<MatLaurentSerde> for MatLaurent {
    type Error = Error;
    fn try_from(s: MatLaurentSerde) -> Result<Self> {
        let check = |m: &MatC, what: &str| -> Result<()> {
            if m.rows() != s.dim || m.cols() != s.dim {
                return Err(Error::DimensionMismatch(format!(
                    "Laurent series of dimension {} has a {}x{} {what}",
                    s.dim,
                    m.rows(),
                    m.cols()
                )));
            }
            Ok(())
        };
        check(&s.residue, "residue")?;
        for c in &s.coeffs {
            check(c, "coefficient")?;
        }
        Ok(Self {
            dim: s.dim,
            residue: s.residue,
            coeffs: s.coeffs,
        })
    }
}

impl From<MatLaurent> for MatLaurentSerde {
    fn from(v: MatLaurent) -> Self {
        MatLaurentSerde {
            dim: v.dim,
            residue: v.residue,
            coeffs: v.coeffs,
        }
    }
}

impl MatLaurent {
    /// Assembles a series from its residue and nonnegative-order
    /// coefficients.
    ///
    /// # Panics
    ///
    /// Panics if any matrix is not square of the residue's dimension.
    #[must_use]
    pub fn new(residue: MatC, coeffs: Vec<MatC>) -> Self {
        assert!(residue.is_square(), "residue must be square");
        let dim = residue.rows();
        assert!(
            coeffs.iter().all(|c| c.rows() == dim && c.cols() == dim),
            "all coefficients must be square of the residue's dimension"
        );
        Self { dim, residue, coeffs }
    }

    /// Matrix dimension N.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The coefficient of 1/x.
    #[must_use]
    pub fn residue(&self) -> &MatC {
        &self.residue
    }

    /// Highest stored power K (the series runs k = −1..=K).
    ///
    /// A series with no nonnegative coefficients reports −1.
    #[must_use]
    pub fn truncation_order(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    /// The coefficient of xᵏ for any integer k.
    ///
    /// Returns the residue at k = −1 and a zero matrix outside the stored
    /// range (including all k < −1).
    #[must_use]
    pub fn coeff(&self, k: i64) -> MatC {
        if k == -1 {
            return self.residue.clone();
        }
        usize::try_from(k)
            .ok()
            .and_then(|k| self.coeffs.get(k).cloned())
            .unwrap_or_else(|| MatC::zero(self.dim, self.dim))
    }

    /// Borrowed view of a stored coefficient (k = −1 gives the residue).
    #[must_use]
    pub fn coeff_ref(&self, k: i64) -> Option<&MatC> {
        if k == -1 {
            return Some(&self.residue);
        }
        usize::try_from(k).ok().and_then(|k| self.coeffs.get(k))
    }

    /// The slice of nonnegative-order coefficients.
    #[must_use]
    pub fn coeffs(&self) -> &[MatC] {
        &self.coeffs
    }

    /// Copy truncated to a smaller order K (larger K keeps everything).
    #[must_use]
    pub fn truncated(&self, k: i64) -> Self {
        let keep = usize::try_from(k + 1).unwrap_or(0).min(self.coeffs.len());
        Self {
            dim: self.dim,
            residue: self.residue.clone(),
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }
}

impl fmt::Display for MatLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "coefficient of 1/x:")?;
        write!(f, "{}", self.residue)?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            writeln!(f, "coefficient of x^{k}:")?;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

// ============================================================
// Tests
// ============================================================
