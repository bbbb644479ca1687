//! The base field ℚ(i): Gaussian rationals with exact arithmetic.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// An exact complex scalar a + b·i with arbitrary-precision rational a, b.
///
/// Both components are always stored fully reduced with positive
/// denominators (guaranteed by the underlying [`BigRational`]); arithmetic is
/// exact and no rounding ever occurs.
///
/// # Example
///
/// ```
/// use bispectral_core::exact::GaussianRational;
///
/// let z = GaussianRational::from_ratio(1, 2).add(&GaussianRational::i());
/// let w = z.mul(&z.conj());
/// assert_eq!(w, GaussianRational::from_ratio(5, 4), "|1/2 + i|² = 5/4");
/// ```
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GaussianRational {
    re: BigRational,
    im: BigRational,
}

impl GaussianRational {
    /// Builds a + b·i from rational parts.
    #[must_use]
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    /// The additive identity 0.
    #[must_use]
    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    /// The multiplicative identity 1.
    #[must_use]
    pub fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }

    /// The imaginary unit i.
    #[must_use]
    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    /// The rational integer n.
    #[must_use]
    pub fn from_integer(n: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    /// The real rational p/q.
    ///
    /// # Panics
    ///
    /// Panics if `q == 0`.
    #[must_use]
    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "denominator must be nonzero");
        Self::new(
            BigRational::new(BigInt::from(p), BigInt::from(q)),
            BigRational::zero(),
        )
    }

    /// A purely real value.
    #[must_use]
    pub fn from_rational(re: BigRational) -> Self {
        Self::new(re, BigRational::zero())
    }

    /// Real part.
    #[must_use]
    pub fn re(&self) -> &BigRational {
        &self.re
    }

    /// Imaginary part.
    #[must_use]
    pub fn im(&self) -> &BigRational {
        &self.im
    }

    /// True iff the value is 0.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// True iff the value is 1.
    #[must_use]
    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// True iff the imaginary part is 0.
    #[must_use]
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Exact sum.
    #[must_use]
    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.re + &other.re, &self.im + &other.im)
    }

    /// Exact difference.
    #[must_use]
    pub fn sub(&self, other: &Self) -> Self {
        Self::new(&self.re - &other.re, &self.im - &other.im)
    }

    /// Exact product (a+bi)(c+di) = (ac−bd) + (ad+bc)i.
    #[must_use]
    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    /// Additive inverse.
    #[must_use]
    pub fn neg(&self) -> Self {
        Self::new(-self.re.clone(), -self.im.clone())
    }

    /// Complex conjugate a − b·i.
    #[must_use]
    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// |a + bi|² = a² + b², an exact nonnegative rational.
    #[must_use]
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse.
    ///
    /// # Errors
    ///
    /// [`Error::DivisionByZero`] if the value is 0.
    pub fn inv(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    /// Exact quotient.
    ///
    /// # Errors
    ///
    /// [`Error::DivisionByZero`] if `other` is 0.
    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// Nonnegative integer power by repeated multiplication.
    #[must_use]
    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Parses a Gaussian rational from component strings, each either `p/q`
    /// or a bare integer `p`.
    ///
    /// # Errors
    ///
    /// [`Error::Parse`] if either component is not a valid rational.
    pub fn parse_parts(re: &str, im: &str) -> Result<Self> {
        Ok(Self::new(parse_rational(re)?, parse_rational(im)?))
    }
}

// Operator impls are provided for references only. Owned-receiver impls
// would shadow the inherent `&self` methods during method resolution, so
// the operator spelling is `&a + &b` and the method spelling `a.add(&b)`.
impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: Self) -> GaussianRational {
        GaussianRational::add(self, rhs)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: Self) -> GaussianRational {
        GaussianRational::sub(self, rhs)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: Self) -> GaussianRational {
        GaussianRational::mul(self, rhs)
    }
}

impl Div for &GaussianRational {
    type Output = GaussianRational;
    /// # Panics
    ///
    /// Panics on division by zero; use [`GaussianRational::div`] to handle it.
    fn div(self, rhs: Self) -> GaussianRational {
        GaussianRational::div(self, rhs).expect("division by zero")
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::neg(self)
    }
}

/// Formats a rational as the canonical `p/q` string (always slashed, reduced,
/// positive denominator).
#[must_use]
pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p` into an exact rational.
///
/// # Errors
///
/// [`Error::Parse`] on malformed input or a zero denominator.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    BigRational::from_str(s).map_err(|e| Error::Parse(format!("invalid rational {s:?}: {e}")))
}

fn fmt_real(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    /// Human-readable form: `0`, `3/2`, `i`, `-2i`, `1/2 - 3i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_real(&self.re, f);
        }
        let write_im = |f: &mut fmt::Formatter<'_>, im: &BigRational| -> fmt::Result {
            let unit = im.abs();
            if !unit.is_one() {
                fmt_real(&unit, f)?;
            }
            write!(f, "i")
        };
        if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-")?;
            }
            return write_im(f, &self.im);
        }
        fmt_real(&self.re, f)?;
        write!(f, "{}", if self.im.is_negative() { " - " } else { " + " })?;
        write_im(f, &self.im)
    }
}

impl Serialize for GaussianRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("GaussianRational", 2)?;
        st.serialize_field("re", &rational_to_string(&self.re))?;
        st.serialize_field("im", &rational_to_string(&self.im))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Parts {
            re: String,
            im: String,
        }
        let parts = Parts::deserialize(deserializer)?;
        GaussianRational::parse_parts(&parts.re, &parts.im).map_err(D::Error::custom)
    }
}

// ============================================================
// Tests
// ============================================================
