//! Independent oracles that never share code paths with the solvers.
//!
//! Each oracle rebuilds its target from a different starting point, a
//! classical closed-form series, the worked special case V = −2I/x, or a
//! direct symbolic expansion of the defining identity, using nothing from
//! the rest of the crate beyond the exact ring tower. A solver bug
//! therefore cannot cancel against an oracle bug, and every oracle is
//! exercised with negative controls proving it can fail.

use serde::Serialize;

use crate::bispectral::{build_a1, membership, synthesize_b, DiffOpZ, Potential};
use crate::exact::{GaussianRational, MatC, MatPolyX, MatPolyZ, RatMatZ, ScalarPolyZ};

// ============================================================
// Oracle reports
// ============================================================

/// A located disagreement between an oracle and the module under test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    /// Where the first disagreement sits (human-readable coordinates).
    pub location: String,
    /// What the oracle predicts there.
    pub expected: String,
    /// What the module computed.
    pub got: String,
}

/// Outcome of one oracle run. `passed` holds exactly when there is no
/// discrepancy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    /// Which oracle ran.
    pub name: String,
    /// Whether every compared value agreed.
    pub passed: bool,
    /// The first disagreement, in a fixed deterministic scan order.
    #[serde(rename = "discrepancy")]
    pub first_discrepancy: Option<Discrepancy>,
}

impl OracleReport {
    /// A passing report.
    #[must_use]
    pub fn pass(name: impl Into<String>) -> Self {
        OracleReport {
            name: name.into(),
            passed: true,
            first_discrepancy: None,
        }
    }

    /// A failing report with its located first discrepancy.
    #[must_use]
    pub fn fail(
        name: impl Into<String>,
        location: impl Into<String>,
        expected: impl Into<String>,
        got: impl Into<String>,
    ) -> Self {
        OracleReport {
            name: name.into(),
            passed: false,
            first_discrepancy: Some(Discrepancy {
                location: location.into(),
                expected: expected.into(),
                got: got.into(),
            }),
        }
    }
}

// ============================================================
// Scalar closed-form oracle
// ============================================================

/// Taylor coefficients (orders 0..=K) of the scalar solution
/// V(x) = −2λ·tanh(λx) with λ² = −v1/2.
///
/// The tanh coefficients come from the classical recurrence
/// (i+1)·c_{i+1} = δ_{i,0} − Σ_{a+b=i} c_a·c_b (tanh′ = 1 − tanh²), and
/// only odd orders survive, so each output is a polynomial in v1, exact
/// rational arithmetic throughout, no solver code involved.
///
/// # Panics
///
/// Panics if K < 3.
#[must_use]
pub fn scalar_tanh_series(v1: &GaussianRational, k_max: i64) -> Vec<GaussianRational> {
    assert!(k_max >= 3, "the oracle is stated for K >= 3");
    let k_max = k_max as usize;
    // tanh(y) = Σ c_i y^i.
    let mut c = vec![GaussianRational::zero(); k_max + 2];
    for i in 0..=k_max {
        let mut rhs = if i == 0 {
            GaussianRational::one()
        } else {
            GaussianRational::zero()
        };
        for a in 0..=i {
            rhs = rhs.sub(&c[a].mul(&c[i - a]));
        }
        c[i + 1] = rhs.mul(&GaussianRational::from_ratio(1, i as i64 + 1));
    }
    // V_i = −2·c_i·λ^{i+1}; for odd i, λ^{i+1} = (−v1/2)^{(i+1)/2}.
    let lambda_sq = v1.neg().mul(&GaussianRational::from_ratio(1, 2));
    (0..=k_max)
        .map(|i| {
            if i % 2 == 0 {
                GaussianRational::zero()
            } else {
                let power = lambda_sq.pow(((i + 1) / 2) as u32);
                c[i].mul(&power).mul(&GaussianRational::from_integer(-2))
            }
        })
        .collect()
}

// ============================================================
// The V = −2I/x closed-form oracle
// ============================================================

/// n! as an i64 (sizes here stay tiny).
fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// The monomial z^e.
fn z_pow(e: usize) -> ScalarPolyZ {
    let mut coeffs = vec![GaussianRational::zero(); e + 1];
    coeffs[e] = GaussianRational::one();
    ScalarPolyZ::from_coeffs(coeffs)
}

/// A pool of assorted constant matrices for monomial coefficients,
/// deliberately non-commuting across seeds.
fn coefficient_pool(dim: usize, seed: usize) -> MatC {
    MatC::from_fn(dim, dim, |r, c| {
        GaussianRational::from_integer((seed * 5 + 2 * r + 3 * c + 1) as i64)
    })
}

/// Checks the worked special case V = −2I/x (at N = 2) against its
/// closed forms:
///
/// 1. (A₁^[m])ᵏ = Σ_{j=2}^{m+1−k} ((j+k−2)!/(j−2)!)·I·e_{j,j+k} for
///    1 ≤ k ≤ m (1-based block indices), so in particular (A₁^[m])^m = 0;
/// 2. membership verdicts equal the criterion θ′(0) = 0 on the monomial
///    basis θ = xˡ·E_{p,q}, l ≤ m+2;
/// 3. the synthesized coefficients match the displayed operator:
///    b₀ = a₀ and, for 1 ≤ k ≤ m,
///    b_k = a_k + Σ_{j=k+1}^{m} ((j−2)!·j·(−1)^{j−k}/((k−1)!))·z^{k−j}·a_j,
///    exercised on a θ with a₁ = 0 and assorted coefficients.
///
/// # Panics
///
/// Panics if m < 1.
#[must_use]
pub fn residue_case_closed_forms(m: usize) -> OracleReport {
    assert!(m >= 1, "the closed forms are stated for m >= 1");
    let name = format!("residue_case_closed_forms(m={m})");
    let dim = 2usize;
    let v = Potential::from_parts(
        MatC::identity(dim).scale(&GaussianRational::from_integer(-2)),
        MatPolyX::zero(dim),
    );

    // 1. Powers of A₁^[m].
    let a1 = build_a1(&v, m).to_flat();
    let mut power = MatC::identity(dim * (m + 1));
    for k in 1..=m {
        power = power.mul(&a1);
        let mut expected = MatC::zero(dim * (m + 1), dim * (m + 1));
        if m + 1 >= k {
            for j in 2..=(m + 1 - k) {
                let factor = factorial(j + k - 2) / factorial(j - 2);
                expected.set_block(
                    dim * (j - 1),
                    dim * (j + k - 1),
                    &MatC::identity(dim).scale(&GaussianRational::from_integer(factor)),
                );
            }
        }
        if power != expected {
            let (r, c) = power
                .sub(&expected)
                .first_nonzero()
                .expect("matrices differ");
            return OracleReport::fail(
                name,
                format!("(A1^[{m}])^{k} entry ({r},{c})"),
                expected.get(r, c).to_string(),
                power.get(r, c).to_string(),
            );
        }
    }

    // 2. Membership ⟺ θ′(0) = 0 on monomials x^l·E_{p,q}.
    for l in 0..=(m + 2) {
        for p in 0..dim {
            for q in 0..dim {
                let theta = MatPolyX::monomial(MatC::unit(dim, dim, p, q), l);
                let should_accept = l != 1;
                let cert = match membership(&theta, &v) {
                    Ok(cert) => cert,
                    Err(e) => {
                        return OracleReport::fail(
                            name,
                            format!("membership of x^{l}·E_{{{p},{q}}}"),
                            "a verdict",
                            format!("error: {e}"),
                        )
                    }
                };
                if cert.verdict() != should_accept {
                    return OracleReport::fail(
                        name,
                        format!("membership of x^{l}·E_{{{p},{q}}}"),
                        format!("{should_accept} (criterion θ'(0) = 0)"),
                        format!("{}", cert.verdict()),
                    );
                }
            }
        }
    }

    // 3. Synthesized b_j against the displayed closed form.
    let coeffs: Vec<MatC> = (0..=m)
        .map(|l| {
            if l == 1 {
                MatC::zero(dim, dim)
            } else {
                coefficient_pool(dim, l)
            }
        })
        .collect();
    let theta = MatPolyX::from_coeffs(dim, coeffs);
    // With a₁ = 0 the m = 1 instance trims to a constant; the display is
    // compared over θ's actual degree (sum terms above it vanish anyway).
    let md = theta.degree().unwrap_or(0);
    let op = match synthesize_b(&theta, &v) {
        Ok(op) => op,
        Err(e) => {
            return OracleReport::fail(name, "synthesize_b", "an operator", format!("error: {e}"))
        }
    };
    for k in 0..=md {
        let expected = if k == 0 {
            RatMatZ::from_const(theta.coeff(0))
        } else {
            // Assemble a_k + Σ_{j>k} γ_{j,k}·z^{−(j−k)}·a_j over the
            // common denominator z^{md−k}.
            let mut num_coeffs = vec![MatC::zero(dim, dim); md - k + 1];
            num_coeffs[md - k] = theta.coeff(k);
            for j in (k + 1)..=md {
                let sign = if (j - k) % 2 == 0 { 1 } else { -1 };
                let gamma = GaussianRational::from_ratio(
                    sign * factorial(j - 2) * j as i64,
                    factorial(k - 1),
                );
                num_coeffs[md - j] = theta.coeff(j).scale(&gamma);
            }
            RatMatZ::new(MatPolyZ::from_coeffs(dim, num_coeffs), z_pow(md - k))
        };
        if *op.coeff(k) != expected {
            return OracleReport::fail(
                name,
                format!("synthesized b_{k}"),
                expected.to_string(),
                op.coeff(k).to_string(),
            );
        }
    }

    OracleReport::pass(name)
}

// ============================================================
// Direct expansion of the bispectral identity
// ============================================================

/// Symbolically expands Λ(x, z) = e^{−xz}·((ψB)(x, z) − θ(x)ψ(x, z)) from
/// first principles and reports the first nonzero x-coefficient.
///
/// Using ∂ᵶʲψ = (z·xʲ + j·xʲ⁻¹ + ½V(x)·xʲ)·e^{xz}, every term of
/// (ψB) − θψ is a product xᵖ·(rational matrix in z)·e^{xz}; the oracle
/// accumulates those products per x-power p (−1 ≤ p ≤ m+n) term by term:
/// a re-derivation organized around the eigenfunction, not around the
/// coefficient families used inside the synthesis path. Coefficients of V
/// above `upto_j` are treated as absent, so truncated potentials can be
/// checked through their stored order.
#[must_use]
pub fn expand_bispectral_identity(
    theta: &MatPolyX,
    b: &DiffOpZ,
    v: &Potential,
    upto_j: i64,
) -> OracleReport {
    let name = "expand_bispectral_identity".to_string();
    let dim = v.dim();
    assert_eq!(theta.dim(), dim, "theta and V must have equal dimension");
    assert_eq!(b.dim(), dim, "B and V must have equal dimension");
    let m = b.order();
    let n = v.degree().map_or(0, |d| d as i64).min(upto_j);
    let half = GaussianRational::from_ratio(1, 2);
    let z = ScalarPolyZ::z();

    // Accumulator for the coefficient of x^p, p = −1..=(m as i64 + n).
    let p_hi = m as i64 + n;
    let mut acc: Vec<RatMatZ> = (0..(p_hi + 2)).map(|_| RatMatZ::zero(dim)).collect();
    let add_at = |acc: &mut Vec<RatMatZ>, p: i64, term: RatMatZ| {
        let idx = p + 1;
        assert!(
            (0..acc.len() as i64).contains(&idx),
            "x-power {p} outside the finite expansion window"
        );
        acc[idx as usize] = acc[idx as usize].add(&term);
    };

    // (ψB) = Σ_j (z·x^j + j·x^{j−1} + ½V(x)·x^j)·e^{xz}·b_j(z).
    for j in 0..=m {
        let bj = b.coeff(j);
        add_at(&mut acc, j as i64, bj.mul_scalar_poly(&z));
        if j >= 1 {
            add_at(
                &mut acc,
                j as i64 - 1,
                bj.scale(&GaussianRational::from_integer(j as i64)),
            );
        }
        let mut t = -1i64;
        while t <= n {
            let vt = v.coeff(t);
            if !vt.is_zero() {
                add_at(&mut acc, t + j as i64, bj.lmul_mat(&vt).scale(&half));
            }
            t += 1;
        }
    }
    // −θψ = −θ(x)·(Iz + ½V(x))·e^{xz}.
    if let Some(md) = theta.degree() {
        for s in 0..=md {
            let a_s = theta.coeff(s);
            add_at(
                &mut acc,
                s as i64,
                RatMatZ::from_const(a_s.neg()).mul_scalar_poly(&z),
            );
            let mut t = -1i64;
            while t <= n {
                let vt = v.coeff(t);
                if !vt.is_zero() {
                    add_at(
                        &mut acc,
                        s as i64 + t,
                        RatMatZ::from_const(a_s.mul(&vt).scale(&half).neg()),
                    );
                }
                t += 1;
            }
        }
    }

    for (idx, coeff) in acc.iter().enumerate() {
        if !coeff.is_zero() {
            let p = idx as i64 - 1;
            // Locate the first nonzero matrix entry of the rational
            // function for the report.
            for r in 0..dim {
                for c in 0..dim {
                    let num_entry = coeff.num().entry(r, c);
                    if !num_entry.is_zero() {
                        return OracleReport::fail(
                            name,
                            format!("coefficient of x^{p}, entry ({r},{c})"),
                            "0",
                            format!("({num_entry}) / ({})", coeff.den()),
                        );
                    }
                }
            }
        }
    }
    OracleReport::pass(name)
}

// ============================================================
// Tests
// ============================================================
