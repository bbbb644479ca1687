//! Solver and verifiers for the matrix autonomous equation V″(x) = V′(x)V(x).
//!
//! Solutions are matrix Laurent series with a simple pole at the origin,
//!
//! ```text
//! V(x) = V₋₁/x + V₀ + V₁x + V₂x² + ⋯,
//! ```
//!
//! whose coefficients satisfy, order by order,
//!
//! ```text
//! k(k−1)·V_k = Σ_{j=−1}^{k} j·V_j·V_{k−1−j}.
//! ```
//!
//! The orders k = −1, 0, 1 constrain the data: V₋₁(V₋₁ + 2I) = 0,
//! V₋₁V₀ = 0, and [V₋₁, V₁] = 0. Order k = 2 determines V₂ up to a free
//! block, and every higher coefficient is produced by inverting the linear
//! operator
//!
//! ```text
//! T_k(a) = k(k−1)a + V₋₁a − k·a·V₋₁,
//! ```
//!
//! which is blockwise diagonal once V₋₁ is put in the canonical form
//! diag(−2I_m, 0). All arithmetic is exact over ℚ(i).

use num::{BigInt, BigRational, One, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::exact::{rational_to_string, GaussianRational, MatC, MatLaurent, MatPolyX};
use crate::{exec, Error, Result};

// ============================================================
// Residue normalization
// ============================================================

/// A residue matrix brought to the canonical form diag(−2I_m, 0_{N−m}).
///
/// `similarity` S satisfies S⁻¹·V₋₁·S = `canonical`; its first `m` columns
/// span the eigenspace for −2 and the rest span the kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueForm {
    m: usize,
    similarity: MatC,
    similarity_inv: MatC,
    canonical: MatC,
}

impl ResidueForm {
    /// Dimension of the −2 eigenspace.
    #[must_use]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Matrix dimension N.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.canonical.rows()
    }

    /// The change-of-basis matrix S.
    #[must_use]
    pub fn similarity(&self) -> &MatC {
        &self.similarity
    }

    /// S⁻¹.
    #[must_use]
    pub fn similarity_inv(&self) -> &MatC {
        &self.similarity_inv
    }

    /// diag(−2I_m, 0).
    #[must_use]
    pub fn canonical(&self) -> &MatC {
        &self.canonical
    }

    /// Conjugates a matrix into the canonical basis: S⁻¹·X·S.
    #[must_use]
    pub fn to_canonical(&self, x: &MatC) -> MatC {
        self.similarity_inv.mul(x).mul(&self.similarity)
    }

    /// Conjugates a canonical-basis matrix back: S·X·S⁻¹.
    #[must_use]
    pub fn from_canonical(&self, x: &MatC) -> MatC {
        self.similarity.mul(x).mul(&self.similarity_inv)
    }
}

/// Verifies the quadratic relation V₋₁(V₋₁ + 2I) = 0 and produces the
/// similarity to diag(−2I_m, 0_{N−m}).
///
/// The relation forces V₋₁ to be diagonalizable with eigenvalues in
/// {−2, 0}, so the similarity is assembled from exact kernel bases of
/// (V₋₁ + 2I) and of V₋₁.
///
/// # Errors
///
/// [`Error::QuadraticRelationViolated`] if the relation fails, i.e. the
/// input cannot be the residue of any solution.
pub fn normalize_residue(vm1: &MatC) -> Result<ResidueForm> {
    assert!(vm1.is_square(), "residue must be square");
    let n = vm1.rows();
    let shifted = vm1.add(&MatC::identity(n).scale(&GaussianRational::from_integer(2)));
    if !vm1.mul(&shifted).is_zero() {
        return Err(Error::QuadraticRelationViolated);
    }
    let eig_m2 = shifted.kernel_basis();
    let eig_0 = vm1.kernel_basis();
    let m = eig_m2.len();
    assert_eq!(
        m + eig_0.len(),
        n,
        "the quadratic relation forces the eigenspaces to fill the space"
    );
    let cols: Vec<&MatC> = eig_m2.iter().chain(eig_0.iter()).collect();
    let similarity = if cols.is_empty() {
        MatC::identity(0)
    } else {
        MatC::hcat(&cols)
    };
    let similarity_inv = similarity
        .inverse()
        .expect("union of bases of complementary eigenspaces is invertible");
    let mut canonical = MatC::zero(n, n);
    for i in 0..m {
        canonical.set(i, i, GaussianRational::from_integer(-2));
    }
    Ok(ResidueForm {
        m,
        similarity,
        similarity_inv,
        canonical,
    })
}

// ============================================================
// The T_k operator
// ============================================================

/// T_k(a) = k(k−1)a + V₋₁·a − k·a·V₋₁, for any residue matrix.
#[must_use]
pub fn tk_apply(k: i64, a: &MatC, vm1: &MatC) -> MatC {
    let kk = GaussianRational::from_integer(k * (k - 1));
    a.scale(&kk)
        .add(&vm1.mul(a))
        .sub(&a.mul(vm1).scale(&GaussianRational::from_integer(k)))
}

/// Block factor of T_k on the (r, c) entry in the canonical basis with
/// splitting at `m`.
fn tk_factor(k: i64, r: usize, c: usize, m: usize) -> i64 {
    match (r < m, c < m) {
        (true, true) => (k - 1) * (k + 2),
        (true, false) => (k - 2) * (k + 1),
        (false, true) => k * (k + 1),
        (false, false) => k * (k - 1),
    }
}

/// Inverts T_k in the canonical basis: blockwise division by
/// (k−1)(k+2), (k−2)(k+1), k(k+1), k(k−1).
///
/// # Errors
///
/// [`Error::KNotInvertible`] for k < 3, where one of the block factors
/// vanishes (the k = 2 case is handled by [`solve_v2`] instead).
pub fn tk_inverse(k: i64, b: &MatC, m: usize) -> Result<MatC> {
    if k < 3 {
        return Err(Error::KNotInvertible(k));
    }
    Ok(MatC::from_fn(b.rows(), b.cols(), |r, c| {
        b.get(r, c)
            .mul(&GaussianRational::from_ratio(1, tk_factor(k, r, c, m)))
    }))
}

/// The squared operator-norm bound for T_k⁻¹:
/// (4(k²−3) / ((k−2)(k−1)(k+1)(k+2)))².
///
/// # Panics
///
/// Panics for k < 3.
#[must_use]
pub fn tk_inverse_bound_sq(k: i64) -> BigRational {
    assert!(k >= 3, "the bound is stated for k >= 3");
    let num = BigInt::from(4) * BigInt::from(k * k - 3);
    let den = BigInt::from(k - 2) * BigInt::from(k - 1) * BigInt::from(k + 1) * BigInt::from(k + 2);
    let c = BigRational::new(num, den);
    &c * &c
}

/// Verifies ‖T_k⁻¹(a)‖² ≤ bound²·‖a‖² exactly on every sample, for every
/// block splitting 0 ≤ m ≤ N.
///
/// # Panics
///
/// Panics for k < 3.
#[must_use]
pub fn tk_inverse_norm_bound_check(k: i64, samples: &[MatC]) -> bool {
    let bound_sq = tk_inverse_bound_sq(k);
    samples.iter().all(|a| {
        let a_norm = a.frobenius_norm_sq();
        (0..=a.rows()).all(|m| {
            let inv = tk_inverse(k, a, m).expect("k >= 3");
            inv.frobenius_norm_sq() <= &bound_sq * &a_norm
        })
    })
}

// ============================================================
// Seed data
// ============================================================

/// Validated initial data for the coefficient recursion: the residue in
/// canonical form together with V₀, V₁ and the free block of V₂.
///
/// Constraints enforced at construction (the orders k = −1, 0, 1 of the
/// equation): V₋₁(V₋₁+2I) = 0, V₋₁V₀ = 0, V₋₁V₁ = 0, and [V₋₁, V₁] = 0.
/// In the canonical basis the first two force the top m rows of V₀ and V₁
/// to vanish and the commutator forces the bottom-left block of V₁ to
/// vanish; for m = N they force V₀ = V₁ = 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SeedDataSerde", into = "SeedDataSerde")]
pub struct SeedData {
    form: ResidueForm,
    raw_residue: MatC,
    /// V₀ in the canonical basis.
    v0: MatC,
    /// V₁ in the canonical basis.
    v1: MatC,
    /// Free (1,2) block of V₂, size m×(N−m), canonical splitting.
    v212: MatC,
    /// Truncation order carried by the seed file, if any.
    file_k: Option<i64>,
}

/// JSON shadow: `{"residue": MatC, "V0": MatC, "V1": MatC,
/// "V212": MatC|null, "K": int|null}`. The residue, V0 and V1 are given in
/// the original (raw) basis; V212 is given in the canonical splitting
/// since the free block only exists there.
#[derive(Serialize, Deserialize)]
struct SeedDataSerde {
    residue: MatC,
    #[serde(rename = "V0")]
    v0: MatC,
    #[serde(rename = "V1")]
    v1: MatC,
    #[serde(rename = "V212", default)]
    v212: Option<MatC>,
    #[serde(rename = "K", default)]
    k: Option<i64>,
}

impl TryFrom<SeedDataSerde> for SeedData {
    type Error = Error;
    fn try_from(s: SeedDataSerde) -> Result<Self> {
        SeedData::new(s.residue, s.v0, s.v1, s.v212, s.k)
    }
}

impl From<SeedData> for SeedDataSerde {
    fn from(s: SeedData) -> Self {
        let v212 = if s.v212.rows() * s.v212.cols() == 0 {
            None
        } else {
            Some(s.v212.clone())
        };
        SeedDataSerde {
            residue: s.raw_residue.clone(),
            v0: s.form.from_canonical(&s.v0),
            v1: s.form.from_canonical(&s.v1),
            v212,
            k: s.file_k,
        }
    }
}

impl SeedData {
    /// Validates and stores seed data.
    ///
    /// `residue`, `v0`, `v1` are given in the original basis; `v212` (the
    /// free block of V₂) in the canonical splitting, defaulting to zero.
    /// `file_k` is an optional truncation order carried along for CLI
    /// defaulting.
    ///
    /// # Errors
    ///
    /// [`Error::DimensionMismatch`] on shape violations,
    /// [`Error::QuadraticRelationViolated`] if the residue fails its
    /// quadratic relation, and [`Error::SeedInconsistent`] if V₀ or V₁
    /// violate the order-0/order-1 constraints.
    pub fn new(
        residue: MatC,
        v0: MatC,
        v1: MatC,
        v212: Option<MatC>,
        file_k: Option<i64>,
    ) -> Result<Self> {
        let n = residue.rows();
        for (mat, name) in [(&residue, "residue"), (&v0, "V0"), (&v1, "V1")] {
            if mat.rows() != n || mat.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} must be {n}x{n}, got {}x{}",
                    mat.rows(),
                    mat.cols()
                )));
            }
        }
        let form = normalize_residue(&residue)?;
        let m = form.m();
        if !residue.mul(&v0).is_zero() {
            return Err(Error::SeedInconsistent(
                "order 0 of the equation requires V_{-1}·V_0 = 0".into(),
            ));
        }
        if !residue.mul(&v1).is_zero() {
            return Err(Error::SeedInconsistent(
                "the seed requires V_{-1}·V_1 = 0".into(),
            ));
        }
        if !residue.commutator(&v1).is_zero() {
            return Err(Error::SeedInconsistent(
                "order 1 of the equation requires [V_{-1}, V_1] = 0".into(),
            ));
        }
        let v212 = match v212 {
            None => MatC::zero(m, n - m),
            Some(b) => {
                if b.rows() != m || b.cols() != n - m {
                    return Err(Error::DimensionMismatch(format!(
                        "V212 must be {m}x{}, got {}x{}",
                        n - m,
                        b.rows(),
                        b.cols()
                    )));
                }
                b
            }
        };
        let v0c = form.to_canonical(&v0);
        let v1c = form.to_canonical(&v1);
        Ok(SeedData {
            form,
            raw_residue: residue,
            v0: v0c,
            v1: v1c,
            v212,
            file_k,
        })
    }

    /// Matrix dimension N.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    /// Dimension of the −2 eigenspace of the residue.
    #[must_use]
    pub fn m(&self) -> usize {
        self.form.m()
    }

    /// The residue normal form and similarity.
    #[must_use]
    pub fn form(&self) -> &ResidueForm {
        &self.form
    }

    /// The residue in the original basis.
    #[must_use]
    pub fn raw_residue(&self) -> &MatC {
        &self.raw_residue
    }

    /// V₀ in the canonical basis.
    #[must_use]
    pub fn v0_canonical(&self) -> &MatC {
        &self.v0
    }

    /// V₁ in the canonical basis.
    #[must_use]
    pub fn v1_canonical(&self) -> &MatC {
        &self.v1
    }

    /// The free block of V₂ (canonical splitting, m×(N−m)).
    #[must_use]
    pub fn v212(&self) -> &MatC {
        &self.v212
    }

    /// Truncation order carried by the seed file, if any.
    #[must_use]
    pub fn file_k(&self) -> Option<i64> {
        self.file_k
    }

    /// Solves the recursion through order `k_max` and conjugates the
    /// result back to the original basis.
    ///
    /// # Panics
    ///
    /// Panics if `k_max` < 3.
    #[must_use]
    pub fn solve(&self, k_max: i64) -> MatLaurent {
        let canonical = recurse_coefficients(self, k_max);
        let coeffs = canonical
            .coeffs()
            .iter()
            .map(|c| self.form.from_canonical(c))
            .collect();
        MatLaurent::new(self.raw_residue.clone(), coeffs)
    }
}

// ============================================================
// The recursion
// ============================================================

/// Splits a canonical-basis matrix at `m`, returning
/// (top-left, top-right, bottom-left, bottom-right).
fn split_blocks(a: &MatC, m: usize) -> (MatC, MatC, MatC, MatC) {
    let n = a.rows();
    (
        a.block(0, 0, m, m),
        a.block(0, m, m, n - m),
        a.block(m, 0, n - m, m),
        a.block(m, m, n - m, n - m),
    )
}

/// V₂ from the order-2 equation T₂(V₂) = V₁V₀.
///
/// T₂ annihilates the (1,2) block, which is therefore free and taken from
/// the seed; the rest is determined: in canonical blocks
/// V₂ = ((V₁V₀)₁₁/4, V₂₁₂; (V₁V₀)₂₁/6, (V₁V₀)₂₂/2). Under the seed
/// constraints (V₁V₀)₁₁ = 0 and the bottom row reduces to the displayed
/// V₁₂₂V₀₂₁/6 and V₁₂₂V₀₂₂/2. When m = 0 the whole matrix is the
/// (2,2) block and V₂ = ½V₁V₀.
#[must_use]
pub fn solve_v2(seed: &SeedData) -> MatC {
    let n = seed.dim();
    let m = seed.m();
    let p = seed.v1_canonical().mul(seed.v0_canonical());
    let (p11, p12, p21, p22) = split_blocks(&p, m);
    assert!(
        p12.is_zero(),
        "the seed constraints force the (1,2) block of V_1 V_0 to vanish"
    );
    let mut v2 = MatC::zero(n, n);
    v2.set_block(0, 0, &p11.scale(&GaussianRational::from_ratio(1, 4)));
    v2.set_block(0, m, seed.v212());
    v2.set_block(m, 0, &p21.scale(&GaussianRational::from_ratio(1, 6)));
    v2.set_block(m, m, &p22.scale(&GaussianRational::from_ratio(1, 2)));
    v2
}

/// The convolution Σ_{j=1}^{k−1} j·V_j·V_{k−1−j} feeding order k ≥ 3.
fn recursion_rhs(coeffs: &[MatC], k: usize, dim: usize) -> MatC {
    let mut rhs = MatC::zero(dim, dim);
    for j in 1..k {
        let prod = coeffs[j].mul(&coeffs[k - 1 - j]);
        rhs = rhs.add(&prod.scale(&GaussianRational::from_integer(j as i64)));
    }
    rhs
}

/// Runs the coefficient recursion through order `k_max` in the canonical
/// basis: orders 0 and 1 from the seed, order 2 from [`solve_v2`], and
/// V_k = T_k⁻¹(Σ_{j=1}^{k−1} j·V_j·V_{k−1−j}) for k ≥ 3.
///
/// The result is the unique truncated solution with this seed data; it
/// satisfies [`check_autonomous`] through its truncation order.
///
/// # Panics
///
/// Panics if `k_max` < 3.
#[must_use]
pub fn recurse_coefficients(seed: &SeedData, k_max: i64) -> MatLaurent {
    assert!(k_max >= 3, "the recursion is stated for k_max >= 3");
    let n = seed.dim();
    let m = seed.m();
    let mut coeffs = Vec::with_capacity(k_max as usize + 1);
    coeffs.push(seed.v0_canonical().clone());
    coeffs.push(seed.v1_canonical().clone());
    coeffs.push(solve_v2(seed));
    for k in 3..=(k_max as usize) {
        let rhs = recursion_rhs(&coeffs, k, n);
        let vk = tk_inverse(k as i64, &rhs, m).expect("k >= 3");
        coeffs.push(vk);
    }
    MatLaurent::new(seed.form().canonical().clone(), coeffs)
}

/// Solves the recursion for many seeds, in parallel when the `parallel`
/// feature is active.
#[must_use]
pub fn recurse_batch(seeds: Vec<SeedData>, k_max: i64) -> Vec<MatLaurent> {
    exec::sweep(seeds, move |s| s.solve(k_max))
}

// ============================================================
// Verification
// ============================================================

/// The order-k defect k(k−1)V_k − Σ_{j=−1}^{k} j·V_j·V_{k−1−j}, reading
/// coefficients beyond the stored range as zero.
fn autonomous_defect(v: &MatLaurent, k: i64) -> MatC {
    let n = v.dim();
    let mut defect = v.coeff(k).scale(&GaussianRational::from_integer(k * (k - 1)));
    let mut j = -1;
    while j <= k {
        if j != 0 {
            let prod = v.coeff(j).mul(&v.coeff(k - 1 - j));
            defect = defect.sub(&prod.scale(&GaussianRational::from_integer(j)));
        }
        j += 1;
    }
    debug_assert_eq!(defect.rows(), n);
    defect
}

/// Verifies the coefficient identity k(k−1)V_k = Σ j·V_j·V_{k−1−j} for
/// −1 ≤ k ≤ `upto_k`, clamped to the stored truncation order (a truncated
/// series is a jet; orders beyond it are not determined by it).
///
/// # Errors
///
/// [`Error::PotentialNotAutonomous`] locating the first failing order and
/// the first nonzero entry of its defect.
pub fn check_autonomous(v: &MatLaurent, upto_k: i64) -> Result<()> {
    let upto = upto_k.min(v.truncation_order());
    check_orders(v, upto)
}

fn check_orders(v: &MatLaurent, upto: i64) -> Result<()> {
    for k in -1..=upto {
        let defect = autonomous_defect(v, k);
        if let Some((row, col)) = defect.first_nonzero() {
            return Err(Error::PotentialNotAutonomous { order: k, row, col });
        }
    }
    Ok(())
}

/// Verifies that residue/x + poly solves the equation exactly (at every
/// order, not merely through a truncation: all orders above
/// 2·deg(poly) + 1 vanish identically).
///
/// # Errors
///
/// [`Error::PotentialNotAutonomous`] as in [`check_autonomous`].
pub fn check_autonomous_exact(residue: &MatC, poly: &MatPolyX) -> Result<()> {
    let deg = poly.degree().unwrap_or(0) as i64;
    let v = MatLaurent::new(residue.clone(), poly_coeff_list(poly));
    check_orders(&v, 2 * deg + 1)
}

/// Verifies that a polynomial (no pole) solves the equation exactly.
///
/// # Errors
///
/// [`Error::PotentialNotAutonomous`] as in [`check_autonomous`].
pub fn check_autonomous_poly(poly: &MatPolyX) -> Result<()> {
    check_autonomous_exact(&MatC::zero(poly.dim(), poly.dim()), poly)
}

fn poly_coeff_list(poly: &MatPolyX) -> Vec<MatC> {
    match poly.degree() {
        None => Vec::new(),
        Some(d) => (0..=d).map(|k| poly.coeff(k)).collect(),
    }
}

// ============================================================
// Polynomial solutions from nilpotent seeds
// ============================================================

/// Least ν ≥ 1 with a^ν = 0, or [`None`] if `a` is not nilpotent.
fn nilpotency_index(a: &MatC) -> Option<usize> {
    let n = a.rows();
    // a is nilpotent iff a^e = 0 for the first power e ≥ N reached by
    // repeated squaring (Cayley-Hamilton bounds the index by N).
    let mut p = a.clone();
    let mut e = 1;
    while e < n {
        p = p.mul(&p);
        e *= 2;
    }
    if !p.is_zero() {
        return None;
    }
    let mut power = MatC::identity(n);
    for nu in 1..=n {
        power = power.mul(a);
        if power.is_zero() {
            return Some(nu);
        }
    }
    unreachable!("a nilpotent matrix has index at most its dimension")
}

/// Builds the polynomial solution with seed (V₀ = 0, V₁ = `v1`, no pole).
///
/// Nilpotency of V₁ (index ν) forces the recursion to terminate: with
/// V₀ = 0 every V_k is a rational combination of ν-fold and longer
/// products of V₁ beyond order 2ν−3, so the solution is the polynomial
/// collecting orders up to max(2ν−3, 3). The result is verified exactly
/// before being returned.
///
/// # Errors
///
/// [`Error::NotNilpotent`] if V₁^N ≠ 0; [`Error::HypothesisViolated`] if
/// the required order exceeds `max_order`;
/// [`Error::PotentialNotAutonomous`] if the exactness check fails (which
/// would falsify the termination argument).
pub fn build_polynomial_solution(v1: &MatC, max_order: i64) -> Result<MatPolyX> {
    assert!(v1.is_square(), "V1 must be square");
    let n = v1.rows();
    let nu = nilpotency_index(v1).ok_or(Error::NotNilpotent)? as i64;
    let k_target = (2 * nu - 3).max(3);
    if k_target > max_order {
        return Err(Error::HypothesisViolated(format!(
            "polynomial solution needs order {k_target}, exceeding the cap {max_order}"
        )));
    }
    let seed = SeedData::new(
        MatC::zero(n, n),
        MatC::zero(n, n),
        v1.clone(),
        None,
        None,
    )?;
    let series = recurse_coefficients(&seed, k_target);
    let poly = MatPolyX::from_coeffs(n, series.coeffs().to_vec());
    check_autonomous_poly(&poly)?;
    Ok(poly)
}

// ============================================================
// Equivariance and quasihomogeneity
// ============================================================

/// Checks the equivariance theorem: for admissible block-diagonal A, the
/// seed (AV₀, A²V₁, A₁₁³V₂₁₂) produces V_k′ = A^{k+1}V_k = V_k·A^{k+1}
/// for every k ≤ `k_max`. Both equalities are recomputed exactly.
///
/// `a` is given in the original basis.
///
/// # Errors
///
/// [`Error::HypothesisViolated`] naming the first failed precondition:
/// [A, V₋₁] = 0; A₂₂V_{j,21} = V_{j,21}A₁₁ for j = 0, 1, 2;
/// A₁₁V₂₁₂ = V₂₁₂A₂₂; [A₂₂, V₀₂₂] = [A₂₂, V₁₂₂] = 0.
pub fn equivariance_check(seed: &SeedData, a: &MatC, k_max: i64) -> Result<bool> {
    let m = seed.m();
    if !a.commutator(seed.raw_residue()).is_zero() {
        return Err(Error::HypothesisViolated(
            "A must commute with the residue (block-diagonal in the canonical basis)".into(),
        ));
    }
    let ac = seed.form().to_canonical(a);
    let (a11, _, _, a22) = split_blocks(&ac, m);
    let v2 = solve_v2(seed);
    for (j, vj) in [(0, seed.v0_canonical()), (1, seed.v1_canonical()), (2, &v2)] {
        let vj21 = vj.block(m, 0, seed.dim() - m, m);
        if a22.mul(&vj21) != vj21.mul(&a11) {
            return Err(Error::HypothesisViolated(format!(
                "A22·V_{j},21 = V_{j},21·A11 must hold"
            )));
        }
    }
    if a11.mul(seed.v212()) != seed.v212().mul(&a22) {
        return Err(Error::HypothesisViolated(
            "A11·V212 = V212·A22 must hold".into(),
        ));
    }
    for (name, vj) in [("V0", seed.v0_canonical()), ("V1", seed.v1_canonical())] {
        let vj22 = vj.block(m, m, seed.dim() - m, seed.dim() - m);
        if !a22.commutator(&vj22).is_zero() {
            return Err(Error::HypothesisViolated(format!(
                "A22 must commute with the (2,2) block of {name}"
            )));
        }
    }

    let transformed = SeedData::new(
        seed.raw_residue().clone(),
        seed.form().from_canonical(&ac.mul(seed.v0_canonical())),
        seed.form().from_canonical(&ac.mul(&ac).mul(seed.v1_canonical())),
        Some(a11.mul(&a11).mul(&a11).mul(seed.v212())),
        None,
    )?;

    let base = recurse_coefficients(seed, k_max);
    let moved = recurse_coefficients(&transformed, k_max);
    let mut a_power = ac.clone();
    for k in 0..=k_max {
        let expected = moved.coeff(k);
        if expected != a_power.mul(&base.coeff(k)) || expected != base.coeff(k).mul(&a_power) {
            return Ok(false);
        }
        a_power = a_power.mul(&ac);
    }
    Ok(true)
}

/// Checks quasihomogeneity of type (1, 2, 3): the seed
/// (λV₀, λ²V₁, λ³V₂₁₂) produces V_k′ = λ^{k+1}·V_k for k ≤ `k_max`.
///
/// # Errors
///
/// Propagates seed construction errors (none arise for valid seeds).
pub fn quasihomogeneity_check(
    seed: &SeedData,
    lambda: &GaussianRational,
    k_max: i64,
) -> Result<bool> {
    let l2 = lambda.mul(lambda);
    let l3 = l2.mul(lambda);
    let scaled = SeedData::new(
        seed.raw_residue().clone(),
        seed.form().from_canonical(&seed.v0_canonical().scale(lambda)),
        seed.form().from_canonical(&seed.v1_canonical().scale(&l2)),
        Some(seed.v212().scale(&l3)),
        None,
    )?;
    let base = recurse_coefficients(seed, k_max);
    let moved = recurse_coefficients(&scaled, k_max);
    let mut l_power = lambda.clone();
    for k in 0..=k_max {
        if moved.coeff(k) != base.coeff(k).scale(&l_power) {
            return Ok(false);
        }
        l_power = l_power.mul(lambda);
    }
    Ok(true)
}

// ============================================================
// Norm bounds and evaluation
// ============================================================

fn ratio_pow(base: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc = &acc * base;
    }
    acc
}

/// 1/4^e as an exact rational.
fn quarter_pow(e: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(4).pow(e))
}

/// Checks the convergence bound ‖V_k‖² ≤ 4^{−(k+2)} for 3 ≤ k ≤ `k_max`,
/// under the hypotheses ‖V₀‖² ≤ 1/16, ‖V₁‖² ≤ 1/64, ‖V₂‖² ≤ 1/256
/// (all Frobenius norms squared, in the canonical basis).
///
/// Returns `Ok(None)` when the bound holds throughout and `Ok(Some(k))`
/// with the first violating order otherwise.
///
/// # Errors
///
/// [`Error::HypothesisViolated`] if the seed norms exceed the thresholds.
pub fn norm_bound_check(seed: &SeedData, k_max: i64) -> Result<Option<i64>> {
    let series = recurse_coefficients(seed, k_max.max(3));
    for (k, threshold_pow) in [(0, 2u32), (1, 3), (2, 4)] {
        if series.coeff(k).frobenius_norm_sq() > quarter_pow(threshold_pow) {
            return Err(Error::HypothesisViolated(format!(
                "the squared norm of V_{k} must be at most 1/4^{threshold_pow}"
            )));
        }
    }
    for k in 3..=k_max {
        if series.coeff(k).frobenius_norm_sq() > quarter_pow(k as u32 + 2) {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// A partial-sum evaluation together with a rigorous tail estimate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesEval {
    /// Σ_{k=−1}^{K} V_k·xᵏ.
    pub value: MatC,
    /// Rational upper bound for Σ_{k>K} 2^{−(k+2)}|x|ᵏ when available:
    /// requires the stored coefficients to satisfy the convergence
    /// hypotheses and |x| ≤ 1. Exactly zero when V₀ = V₁ = V₂ = 0 (the
    /// unique such solution has no tail at all).
    pub tail_bound: Option<BigRational>,
}

impl Serialize for SeriesEval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("SeriesEval", 2)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field(
            "tail_bound",
            &self.tail_bound.as_ref().map(|t| rational_to_string(t)),
        )?;
        st.end()
    }
}

/// A rational r ≥ √s obtained from Newton iteration started above the
/// root (s > 0).
fn sqrt_upper_bound(s: &BigRational) -> BigRational {
    let one = BigRational::one();
    let two = &one + &one;
    let mut r = (s + &one) / &two;
    for _ in 0..8 {
        r = (&r + &(s / &r)) / &two;
    }
    r
}

/// Evaluates the partial sum V₋₁/x + Σ_{k=0}^{K} V_k·xᵏ at a point,
/// K = min(`k_max`, stored order), with a tail estimate when the
/// convergence hypotheses hold: Σ_{k>K} 2^{−(k+2)}|x|ᵏ ≤
/// 2^{−(K+2)}·r^{K+1}/(1 − r/2) for a rational r ≥ |x| ≤ 1.
///
/// # Errors
///
/// [`Error::EvalAtPole`] if x = 0.
pub fn eval_series(v: &MatLaurent, x: &GaussianRational, k_max: i64) -> Result<SeriesEval> {
    if x.is_zero() {
        return Err(Error::EvalAtPole);
    }
    let k_eff = k_max.min(v.truncation_order());
    let x_inv = x.inv().expect("x is nonzero");
    let mut value = v.residue().scale(&x_inv);
    let mut x_power = GaussianRational::one();
    for k in 0..=k_eff {
        value = value.add(&v.coeff(k).scale(&x_power));
        x_power = x_power.mul(x);
    }

    let tail_bound = compute_tail_bound(v, x, k_eff);
    Ok(SeriesEval { value, tail_bound })
}

fn compute_tail_bound(v: &MatLaurent, x: &GaussianRational, k_eff: i64) -> Option<BigRational> {
    if v.truncation_order() < 2 || k_eff < 2 {
        return None;
    }
    let x_sq = x.norm_sqr();
    if x_sq > BigRational::one() {
        return None;
    }
    let hypotheses = v.coeff(0).frobenius_norm_sq() <= quarter_pow(2)
        && v.coeff(1).frobenius_norm_sq() <= quarter_pow(3)
        && v.coeff(2).frobenius_norm_sq() <= quarter_pow(4)
        && (3..=k_eff).all(|k| v.coeff(k).frobenius_norm_sq() <= quarter_pow(k as u32 + 2));
    if !hypotheses {
        return None;
    }
    if v.coeff(0).is_zero() && v.coeff(1).is_zero() && v.coeff(2).is_zero() {
        // The recursion gives V_k = 0 for every k >= 0 from this seed, so
        // the series terminates at the residue term.
        return Some(BigRational::zero());
    }
    let r = sqrt_upper_bound(&x_sq);
    let one = BigRational::one();
    let two = &one + &one;
    let half_pow = BigRational::new(BigInt::one(), BigInt::from(2).pow(k_eff as u32 + 2));
    let numerator = &half_pow * &ratio_pow(&r, k_eff as u32 + 1);
    Some(&numerator / &(&one - &(&r / &two)))
}

// ============================================================
// Tests
// ============================================================

#[cfg(test)]
mod tests {
    use super::*;

    fn seed_m0(v0: MatC, v1: MatC) -> SeedData {
        let n = v0.rows();
        SeedData::new(MatC::zero(n, n), v0, v1, None, None).expect("valid m=0 seed")
    }

    fn scalar_seed(v1: i64) -> SeedData {
        seed_m0(MatC::zero(1, 1), MatC::from_i64_rows(&[&[v1]]))
    }

    #[test]
    fn test_normalize_residue_cases() {
        let zero = normalize_residue(&MatC::zero(3, 3)).expect("zero residue");
        assert_eq!(zero.m(), 0);
        assert_eq!(*zero.similarity(), MatC::identity(3));

        let full = normalize_residue(&MatC::identity(2).scale(&GaussianRational::from_integer(-2)))
            .expect("-2I residue");
        assert_eq!(full.m(), 2);
        assert_eq!(*full.similarity(), MatC::identity(2));

        let swapped = normalize_residue(&MatC::from_i64_rows(&[&[0, 0], &[0, -2]]))
            .expect("diag(0,-2) residue");
        assert_eq!(swapped.m(), 1);
        assert_eq!(
            *swapped.similarity(),
            MatC::from_i64_rows(&[&[0, 1], &[1, 0]]),
            "similarity must be the coordinate swap"
        );
        assert_eq!(
            swapped.to_canonical(&MatC::from_i64_rows(&[&[0, 0], &[0, -2]])),
            *swapped.canonical()
        );

        assert!(matches!(
            normalize_residue(&MatC::identity(2)),
            Err(Error::QuadraticRelationViolated)
        ));
    }

    #[test]
    fn test_tk_apply_examples() {
        let a = MatC::from_i64_rows(&[&[1, 2], &[3, 4]]);
        assert_eq!(tk_apply(2, &a, &MatC::zero(2, 2)), a.scale(&GaussianRational::from_integer(2)));
        let m2 = MatC::identity(2).scale(&GaussianRational::from_integer(-2));
        assert_eq!(
            tk_apply(3, &a, &m2),
            a.scale(&GaussianRational::from_integer(10)),
            "k=3 with residue -2I scales by (k-1)(k+2) = 10"
        );
        let vm1 = MatC::from_i64_rows(&[&[-2, 0], &[0, 0]]);
        assert_eq!(tk_apply(0, &a, &vm1), vm1.mul(&a), "k=0 collapses to V_{{-1}}a");
    }

    #[test]
    fn test_tk_inverse_round_trip() {
        let b = MatC::from_i64_rows(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        assert_eq!(
            tk_inverse(3, &b, 0).expect("k=3"),
            b.scale(&GaussianRational::from_ratio(1, 6)),
            "m=0 puts everything in the k(k-1) block"
        );
        assert_eq!(
            tk_inverse(3, &b, 3).expect("k=3"),
            b.scale(&GaussianRational::from_ratio(1, 10)),
            "m=N puts everything in the (k-1)(k+2) block"
        );
        let mut canonical = MatC::zero(3, 3);
        canonical.set(0, 0, GaussianRational::from_integer(-2));
        let a = tk_inverse(5, &b, 1).expect("k=5");
        assert_eq!(tk_apply(5, &a, &canonical), b, "T_k(T_k^{{-1}}(b)) = b");
        assert!(matches!(tk_inverse(2, &b, 1), Err(Error::KNotInvertible(2))));
    }

    #[test]
    fn test_tk_inverse_bound() {
        // k=3: bound = 4·6/(1·2·4·5) = 3/5, squared 9/25.
        assert_eq!(
            tk_inverse_bound_sq(3),
            BigRational::new(BigInt::from(9), BigInt::from(25))
        );
        let samples = vec![
            MatC::zero(2, 2),
            MatC::from_i64_rows(&[&[1, -3], &[2, 5]]),
            MatC::from_i64_rows(&[&[0, 1], &[1, 0]]),
        ];
        for k in 3..=7 {
            assert!(tk_inverse_norm_bound_check(k, &samples), "bound must hold at k={k}");
        }
    }

    #[test]
    fn test_seed_validation() {
        // V_{-1}V_0 != 0 must be rejected.
        let res = MatC::from_i64_rows(&[&[-2, 0], &[0, 0]]);
        let bad_v0 = MatC::from_i64_rows(&[&[1, 0], &[0, 0]]);
        assert!(matches!(
            SeedData::new(res.clone(), bad_v0, MatC::zero(2, 2), None, None),
            Err(Error::SeedInconsistent(_))
        ));
        // V_1 with a nonzero bottom-left block violates [V_{-1}, V_1] = 0.
        let bad_v1 = MatC::from_i64_rows(&[&[0, 0], &[1, 0]]);
        assert!(matches!(
            SeedData::new(res.clone(), MatC::zero(2, 2), bad_v1, None, None),
            Err(Error::SeedInconsistent(_))
        ));
        // A valid seed with 0 < m < N carries a free V212 block.
        let v0 = MatC::from_i64_rows(&[&[0, 0], &[3, 5]]);
        let v1 = MatC::from_i64_rows(&[&[0, 0], &[0, 7]]);
        let seed = SeedData::new(res, v0, v1, Some(MatC::from_i64_rows(&[&[9]])), None)
            .expect("valid seed");
        assert_eq!(seed.m(), 1);
        assert_eq!(*seed.v212(), MatC::from_i64_rows(&[&[9]]));
    }

    #[test]
    fn test_solve_v2_m0() {
        // m=0, V1=[[0,1],[0,0]], V0=[[0,0],[a,b]] -> V2 = ½[[a,b],[0,0]].
        let v1 = MatC::from_i64_rows(&[&[0, 1], &[0, 0]]);
        let v0 = MatC::from_i64_rows(&[&[0, 0], &[3, 5]]);
        let seed = seed_m0(v0, v1);
        assert_eq!(
            solve_v2(&seed),
            MatC::from_i64_rows(&[&[3, 5], &[0, 0]]).scale(&GaussianRational::from_ratio(1, 2))
        );
    }

    #[test]
    fn test_recursion_m_full() {
        // m=N seed: V(x) = -2I/x exactly, every polynomial coefficient zero.
        let res = MatC::identity(2).scale(&GaussianRational::from_integer(-2));
        let seed = SeedData::new(res, MatC::zero(2, 2), MatC::zero(2, 2), None, None)
            .expect("m=N seed");
        let series = seed.solve(8);
        for k in 0..=8 {
            assert!(series.coeff(k).is_zero(), "V_{k} must vanish");
        }
        check_autonomous(&series, 8).expect("exact solution");
    }

    #[test]
    fn test_scalar_recursion_values() {
        // Scalar seed v1=1: V_2 = V_4 = 0, V_3 = 1/6, V_5 = 1/30.
        let series = recurse_coefficients(&scalar_seed(1), 6);
        let at = |k: i64| series.coeff(k).get(0, 0).clone();
        assert!(at(2).is_zero());
        assert!(at(4).is_zero());
        assert_eq!(at(3), GaussianRational::from_ratio(1, 6));
        assert_eq!(at(5), GaussianRational::from_ratio(1, 30));
        check_autonomous(&series, 6).expect("solver output is autonomous");
    }

    #[test]
    fn test_check_autonomous_rejects() {
        // V = V_1·x with V_1² ≠ 0 as a *jet*: orders beyond the stored
        // truncation are not determined by it, so the clamped check passes...
        let v = MatLaurent::new(MatC::zero(2, 2), vec![MatC::zero(2, 2), MatC::identity(2)]);
        check_autonomous(&v, 8).expect("a jet is only checked through its stored order");
        // ...but as an exact polynomial the order-3 defect -V_1² appears.
        let poly = MatPolyX::from_coeffs(2, vec![MatC::zero(2, 2), MatC::identity(2)]);
        match check_autonomous_poly(&poly) {
            Err(Error::PotentialNotAutonomous { order, row, col }) => {
                assert_eq!((order, row, col), (3, 0, 0));
            }
            other => panic!("expected a located defect, got {other:?}"),
        }
        // Constants solve the equation (V'' = 0 = V'V).
        let constant = MatPolyX::constant(MatC::from_i64_rows(&[&[1, 2], &[3, 4]]));
        check_autonomous_poly(&constant).expect("constants are solutions");
    }

    #[test]
    fn test_build_polynomial_solution() {
        // Index-2 nilpotent: V(x) = V_1·x exactly.
        let v1 = MatC::from_i64_rows(&[&[0, 1], &[0, 0]]);
        let poly = build_polynomial_solution(&v1, 32).expect("nilpotent seed");
        assert_eq!(poly.degree(), Some(1));
        assert_eq!(poly.coeff(1), v1);
        assert!(poly.coeff(0).is_zero());

        // Index-3 nilpotent (single Jordan block): V_1·x + V_1²·x³/6.
        let j3 = MatC::from_i64_rows(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        let poly3 = build_polynomial_solution(&j3, 32).expect("nilpotent seed");
        assert_eq!(poly3.degree(), Some(3));
        assert_eq!(poly3.coeff(1), j3);
        assert!(poly3.coeff(2).is_zero());
        assert_eq!(
            poly3.coeff(3),
            j3.mul(&j3).scale(&GaussianRational::from_ratio(1, 6))
        );

        // Zero seed: the zero polynomial.
        let zero = build_polynomial_solution(&MatC::zero(2, 2), 32).expect("zero seed");
        assert!(zero.is_zero());

        // Non-nilpotent rejection.
        assert!(matches!(
            build_polynomial_solution(&MatC::identity(2), 32),
            Err(Error::NotNilpotent)
        ));
    }

    #[test]
    fn test_quasihomogeneity_scalar() {
        // λ=2 on the scalar seed: V_3 scales by 2⁴ = 16.
        let seed = scalar_seed(1);
        for lam in [
            GaussianRational::from_integer(2),
            GaussianRational::from_ratio(-1, 3),
            GaussianRational::i(),
            GaussianRational::zero(),
        ] {
            assert!(
                quasihomogeneity_check(&seed, &lam, 8).expect("valid scaled seed"),
                "quasihomogeneity must hold for λ = {lam}"
            );
        }
    }

    #[test]
    fn test_equivariance_diagonal() {
        // m=0, N=2, commuting diagonal A.
        let v0 = MatC::from_i64_rows(&[&[2, 0], &[0, 3]]);
        let v1 = MatC::from_i64_rows(&[&[5, 0], &[0, 7]]);
        let seed = seed_m0(v0, v1);
        let a = MatC::from_i64_rows(&[&[2, 0], &[0, 3]]);
        assert!(equivariance_check(&seed, &a, 8).expect("admissible A"));

        // A failing the commutation hypothesis is rejected, not run.
        let seed2 = seed_m0(
            MatC::from_i64_rows(&[&[0, 0], &[1, 0]]),
            MatC::from_i64_rows(&[&[0, 1], &[0, 0]]),
        );
        let off = MatC::from_i64_rows(&[&[1, 0], &[0, 2]]);
        assert!(matches!(
            equivariance_check(&seed2, &off, 4),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn test_norm_bound_scalar() {
        // v0 = 1/4, v1 = 1/8 sits exactly on the hypothesis boundary.
        let seed = SeedData::new(
            MatC::zero(1, 1),
            MatC::from_fn(1, 1, |_, _| GaussianRational::from_ratio(1, 4)),
            MatC::from_fn(1, 1, |_, _| GaussianRational::from_ratio(1, 8)),
            None,
            None,
        )
        .expect("valid scalar seed");
        assert_eq!(norm_bound_check(&seed, 12).expect("hypotheses hold"), None);

        // v0 = 1 violates the hypotheses.
        let loud = scalar_seed(1);
        assert!(matches!(
            norm_bound_check(&loud, 5),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn test_eval_series() {
        // V = -2I/x at x = 1/2 -> -4I with exact tail 0.
        let res = MatC::identity(2).scale(&GaussianRational::from_integer(-2));
        let seed = SeedData::new(res, MatC::zero(2, 2), MatC::zero(2, 2), None, None)
            .expect("m=N seed");
        let series = seed.solve(6);
        let eval = eval_series(&series, &GaussianRational::from_ratio(1, 2), 6)
            .expect("x away from the pole");
        assert_eq!(
            eval.value,
            MatC::identity(2).scale(&GaussianRational::from_integer(-4))
        );
        assert_eq!(eval.tail_bound, Some(BigRational::zero()));

        assert!(matches!(
            eval_series(&series, &GaussianRational::zero(), 6),
            Err(Error::EvalAtPole)
        ));
    }

    #[test]
    fn test_eval_tail_bound_is_rigorous() {
        // Scalar seed v1 = -1/8: |V_k| ≤ 2^{-(k+2)} holds, so the bound
        // must cover the true remainder: check against a longer partial sum.
        let seed = SeedData::new(
            MatC::zero(1, 1),
            MatC::zero(1, 1),
            MatC::from_fn(1, 1, |_, _| GaussianRational::from_ratio(-1, 8)),
            None,
            None,
        )
        .expect("valid scalar seed");
        let series = seed.solve(24);
        let x = GaussianRational::from_ratio(1, 2);
        let short = eval_series(&series, &x, 8).expect("evaluable");
        let long = eval_series(&series, &x, 24).expect("evaluable");
        let bound = short.tail_bound.expect("hypotheses hold");
        let diff = long.value.sub(&short.value).frobenius_norm_sq();
        assert!(
            diff <= &bound * &bound,
            "squared distance to a longer partial sum must sit under the squared tail bound"
        );
    }

    #[test]
    fn test_seed_json_round_trip() {
        let res = MatC::from_i64_rows(&[&[0, 0], &[0, -2]]);
        let v0 = MatC::from_i64_rows(&[&[1, 0], &[0, 0]]);
        let v1 = MatC::zero(2, 2);
        let seed = SeedData::new(res.clone(), v0.clone(), v1, Some(MatC::from_i64_rows(&[&[4]])), Some(10))
            .expect("valid seed");
        let text = serde_json::to_string(&seed).expect("serialize");
        assert!(text.contains("\"V212\""), "schema field names must be emitted");
        let back: SeedData = serde_json::from_str(&text).expect("deserialize");
        assert_eq!(back.raw_residue(), &res);
        assert_eq!(back.file_k(), Some(10));
        assert_eq!(back.v212(), seed.v212());
        assert_eq!(back.v0_canonical(), seed.v0_canonical());

        let bad = r#"{"residue":{"rows":1,"cols":1,"entries":[[{"re":"1","im":"0"}]]},"V0":{"rows":1,"cols":1,"entries":[[{"re":"0","im":"0"}]]},"V1":{"rows":1,"cols":1,"entries":[[{"re":"0","im":"0"}]]}}"#;
        assert!(
            serde_json::from_str::<SeedData>(bad).is_err(),
            "a residue violating the quadratic relation must be rejected at parse time"
        );
    }
}
