//! Dense matrices over ℚ(i) with exact linear algebra.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::BigRational;
use serde::{Deserialize, Serialize};

use super::scalar::GaussianRational;
use crate::{Error, Result};

/// A dense row-major matrix of [`GaussianRational`] entries.
///
/// Equality is entrywise exact equality. All operations are pure; the type is
/// immutable in spirit (mutating constructors exist only for assembly).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "MatCSerde", into = "MatCSerde")]
pub struct MatC {
    rows: usize,
    cols: usize,
    entries: Vec<GaussianRational>,
}

/// JSON shadow: `{"rows": r, "cols": c, "entries": [[…], …]}` with entries
/// nested by row.
#[derive(Serialize, Deserialize)]
struct MatCSerde {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<GaussianRational>>,
}

impl TryFrom<MatCSerde> for MatC {
    type Error = Error;
    fn try_from(s: MatCSerde) -> Result<Self> {
        if s.entries.len() != s.rows || s.entries.iter().any(|row| row.len() != s.cols) {
            return Err(Error::DimensionMismatch(format!(
                "matrix declared {}x{} but entry rows do not match",
                s.rows, s.cols
            )));
        }
        Ok(MatC {
            rows: s.rows,
            cols: s.cols,
            entries: s.entries.into_iter().flatten().collect(),
        })
    }
}

impl From<MatC> for MatCSerde {
    fn from(m: MatC) -> Self {
        let rows = m
            .entries
            .chunks(m.cols.max(1))
            .map(|chunk| chunk.to_vec())
            .take(m.rows)
            .collect();
        MatCSerde {
            rows: m.rows,
            cols: m.cols,
            entries: rows,
        }
    }
}

impl MatC {
    /// The zero matrix of the given shape.
    #[must_use]
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![GaussianRational::zero(); rows * cols],
        }
    }

    /// The identity matrix of dimension n.
    #[must_use]
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for k in 0..n {
            m.set(k, k, GaussianRational::one());
        }
        m
    }

    /// A scalar multiple c·Iₙ.
    #[must_use]
    pub fn scalar(n: usize, c: &GaussianRational) -> Self {
        let mut m = Self::zero(n, n);
        for k in 0..n {
            m.set(k, k, c.clone());
        }
        m
    }

    /// The matrix unit e_{rc} of shape `rows`×`cols` (0-based indices).
    ///
    /// # Panics
    ///
    /// Panics if the index is out of range.
    #[must_use]
    pub fn unit(rows: usize, cols: usize, r: usize, c: usize) -> Self {
        let mut m = Self::zero(rows, cols);
        m.set(r, c, GaussianRational::one());
        m
    }

    /// Builds a matrix from nested rows.
    ///
    /// # Panics
    ///
    /// Panics if the rows are ragged or empty rows are mixed with nonempty.
    #[must_use]
    pub fn from_rows(rows: Vec<Vec<GaussianRational>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == n_cols),
            "all rows must have equal length"
        );
        Self {
            rows: n_rows,
            cols: n_cols,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    /// Builds a matrix of small integers, for fixtures and tests.
    #[must_use]
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| GaussianRational::from_integer(v)).collect())
                .collect(),
        )
    }

    /// Builds by evaluating `f(r, c)` at every position.
    #[must_use]
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> GaussianRational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    /// Number of rows.
    #[must_use]
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    #[must_use]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// True iff the matrix is square.
    #[must_use]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entry at (r, c), 0-based.
    ///
    /// # Panics
    ///
    /// Panics if the index is out of range.
    #[must_use]
    pub fn get(&self, r: usize, c: usize) -> &GaussianRational {
        assert!(r < self.rows && c < self.cols, "index out of range");
        &self.entries[r * self.cols + c]
    }

    /// Overwrites the entry at (r, c), 0-based.
    ///
    /// # Panics
    ///
    /// Panics if the index is out of range.
    pub fn set(&mut self, r: usize, c: usize, v: GaussianRational) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.entries[r * self.cols + c] = v;
    }

    /// True iff every entry is 0.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(GaussianRational::is_zero)
    }

    /// Position of the first nonzero entry in row-major order, if any.
    #[must_use]
    pub fn first_nonzero(&self) -> Option<(usize, usize)> {
        self.entries
            .iter()
            .position(|e| !e.is_zero())
            .map(|k| (k / self.cols, k % self.cols))
    }

    /// Exact sum.
    ///
    /// # Panics
    ///
    /// Panics on shape mismatch.
    #[must_use]
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "matrix addition requires equal shapes"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    /// Exact difference.
    ///
    /// # Panics
    ///
    /// Panics on shape mismatch.
    #[must_use]
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "matrix subtraction requires equal shapes"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    /// Exact product.
    ///
    /// # Panics
    ///
    /// Panics if inner dimensions disagree.
    #[must_use]
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matrix product requires inner dimensions to agree"
        );
        let mut out = Self::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(r, c).add(&a.mul(b));
                    out.set(r, c, cur);
                }
            }
        }
        out
    }

    /// Entrywise scalar multiple.
    #[must_use]
    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.mul(c)).collect(),
        }
    }

    /// Additive inverse.
    #[must_use]
    pub fn neg(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(GaussianRational::neg).collect(),
        }
    }

    /// Commutator [A, B] = AB − BA.
    ///
    /// # Panics
    ///
    /// Panics unless both matrices are square of equal dimension.
    #[must_use]
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Trace of a square matrix.
    ///
    /// # Panics
    ///
    /// Panics if the matrix is not square.
    #[must_use]
    pub fn trace(&self) -> GaussianRational {
        assert!(self.is_square(), "trace requires a square matrix");
        let mut t = GaussianRational::zero();
        for k in 0..self.rows {
            t = &t + self.get(k, k);
        }
        t
    }

    /// Σ |entry|², the squared Frobenius norm, as an exact rational.
    #[must_use]
    pub fn frobenius_norm_sq(&self) -> BigRational {
        self.entries
            .iter()
            .map(GaussianRational::norm_sqr)
            .fold(BigRational::from_integer(0.into()), |acc, n| acc + n)
    }

    /// Copies the `rows`×`cols` submatrix with top-left corner (r0, c0).
    ///
    /// # Panics
    ///
    /// Panics if the block exceeds the matrix.
    #[must_use]
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "block exceeds matrix bounds"
        );
        Self::from_fn(rows, cols, |r, c| self.get(r0 + r, c0 + c).clone())
    }

    /// Overwrites the block with top-left corner (r0, c0) by `b`.
    ///
    /// # Panics
    ///
    /// Panics if the block exceeds the matrix.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(
            r0 + b.rows <= self.rows && c0 + b.cols <= self.cols,
            "block exceeds matrix bounds"
        );
        for r in 0..b.rows {
            for c in 0..b.cols {
                self.set(r0 + r, c0 + c, b.get(r, c).clone());
            }
        }
    }

    /// Reduced row echelon form together with the pivot column of every
    /// pivot row, computed by exact Gauss–Jordan elimination.
    #[must_use]
    fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            for c in 0..m.cols {
                let a = m.get(row, c).clone();
                let b = m.get(p, c).clone();
                m.set(row, c, b);
                m.set(p, c, a);
            }
            let inv = m.get(row, col).inv().expect("pivot is nonzero");
            for c in 0..m.cols {
                let v = m.get(row, c).mul(&inv);
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r != row && !m.get(r, col).is_zero() {
                    let factor = m.get(r, col).clone();
                    for c in 0..m.cols {
                        let v = m.get(r, c).sub(&(&factor * m.get(row, c)));
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    /// Rank over ℚ(i).
    #[must_use]
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of the right kernel {v : Av = 0}, one column vector per basis
    /// element, in the canonical free-variable order.
    #[must_use]
    pub fn kernel_basis(&self) -> Vec<MatC> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        let mut pivot_cols = vec![None; self.cols];
        for (row, col) in pivots.iter().copied().enumerate() {
            pivot_cols[col] = Some(row);
        }
        for free in 0..self.cols {
            if pivot_cols[free].is_some() {
                continue;
            }
            let mut v = MatC::zero(self.cols, 1);
            v.set(free, 0, GaussianRational::one());
            for (col, &maybe_row) in pivot_cols.iter().enumerate() {
                if let Some(row) = maybe_row {
                    v.set(col, 0, r.get(row, free).neg());
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Exact inverse of a square matrix, if it is invertible.
    #[must_use]
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse requires a square matrix");
        let n = self.rows;
        let mut aug = Self::zero(n, 2 * n);
        aug.set_block(0, 0, self);
        aug.set_block(0, n, &Self::identity(n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots.iter().take(n).copied().ne(0..n) {
            return None;
        }
        Some(r.block(0, n, n, n))
    }

    /// A particular solution X of AX = B, if the system is consistent.
    ///
    /// Free variables are set to 0. Returns `None` when some column of `B`
    /// lies outside the column space of `A`.
    ///
    /// # Panics
    ///
    /// Panics if row counts disagree.
    #[must_use]
    pub fn solve_matrix(&self, b: &Self) -> Option<Self> {
        assert_eq!(self.rows, b.rows, "solve requires equal row counts");
        let mut aug = Self::zero(self.rows, self.cols + b.cols);
        aug.set_block(0, 0, self);
        aug.set_block(0, self.cols, b);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None; // a pivot in the rhs columns: inconsistent system
        }
        let mut x = Self::zero(self.cols, b.cols);
        for (row, &col) in pivots.iter().enumerate() {
            for c in 0..b.cols {
                x.set(col, c, r.get(row, self.cols + c).clone());
            }
        }
        Some(x)
    }

    /// Horizontal concatenation of column blocks.
    ///
    /// # Panics
    ///
    /// Panics if row counts disagree or the list is empty.
    #[must_use]
    pub fn hcat(blocks: &[&MatC]) -> Self {
        assert!(!blocks.is_empty(), "hcat of nothing");
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows), "hcat requires equal row counts");
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zero(rows, cols);
        let mut c0 = 0;
        for b in blocks {
            out.set_block(0, c0, b);
            c0 += b.cols;
        }
        out
    }
}

impl Add for &MatC {
    type Output = MatC;
    fn add(self, rhs: Self) -> MatC {
        MatC::add(self, rhs)
    }
}

impl Sub for &MatC {
    type Output = MatC;
    fn sub(self, rhs: Self) -> MatC {
        MatC::sub(self, rhs)
    }
}

impl Mul for &MatC {
    type Output = MatC;
    fn mul(self, rhs: Self) -> MatC {
        MatC::mul(self, rhs)
    }
}

impl Neg for &MatC {
    type Output = MatC;
    fn neg(self) -> MatC {
        MatC::neg(self)
    }
}

impl fmt::Display for MatC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

// ============================================================
// Tests
// ============================================================
