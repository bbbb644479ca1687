//! The worked example corpus: small, fully explicit potentials whose
//! every displayed coefficient, verdict, and operator is re-checked from
//! scratch on each run.
//!
//! Every fixture is self-verifying: expectations are checked, not
//! trusted. The one deliberate exception is the degree-3 example, whose
//! displayed x²/x³ coefficients conflict with the recursion for generic
//! seeds; that case runs in discrepancy-allowed mode and reports the
//! first disagreeing coefficient instead of failing the corpus (see
//! [`FixtureOutcome::acceptable`]).

use serde::Serialize;

use crate::autonomous::{check_autonomous_poly, eval_series, SeedData};
use crate::bispectral::{membership, nilpotency_conditions, synthesize_b, Potential};
use crate::error::{Error, Result};
use crate::exact::{GaussianRational, MatC, MatPolyX};
use crate::exec;
use crate::verify::{expand_bispectral_identity, residue_case_closed_forms, scalar_tanh_series, OracleReport};

/// The result of running one fixture case: its reports in a stable
/// order, plus whether failures are tolerated for this case.
#[derive(Clone, Debug, Serialize)]
pub struct FixtureOutcome {
    /// Case name (n1 | n2 | n3 | residue_full | scalar_tanh).
    pub case: String,
    /// When set, failing reports are documented findings, not errors.
    pub discrepancy_allowed: bool,
    /// Individual oracle reports, in a deterministic order.
    pub reports: Vec<OracleReport>,
}

impl FixtureOutcome {
    /// Whether this case counts as successful for exit-code purposes:
    /// either every report passed, or the case tolerates discrepancies.
    #[must_use]
    pub fn acceptable(&self) -> bool {
        self.discrepancy_allowed || self.reports.iter().all(|r| r.passed)
    }
}

/// Names of all fixture cases, in canonical run order.
#[must_use]
pub fn all_cases() -> &'static [&'static str] {
    &["n1", "n2", "n3", "residue_full", "scalar_tanh"]
}

/// Runs one fixture case by name.
///
/// # Errors
///
/// `Error::Parse` for an unknown case name.
pub fn run_case(name: &str) -> Result<FixtureOutcome> {
    match name {
        "n1" => Ok(case_n1()),
        "n2" => Ok(case_n2()),
        "n3" => Ok(case_n3()),
        "residue_full" => Ok(case_residue_full()),
        "scalar_tanh" => Ok(case_scalar_tanh()),
        other => Err(Error::Parse(format!(
            "unknown fixture case {other:?}; known cases: {}",
            all_cases().join(", ")
        ))),
    }
}

/// Runs the whole corpus. Cases are independent and run concurrently;
/// the returned order matches [`all_cases`].
#[must_use]
pub fn run_all() -> Vec<FixtureOutcome> {
    exec::sweep(all_cases().to_vec(), |name| {
        run_case(name).expect("all_cases() names are valid")
    })
}

// ============================================================
// Shared pipeline pieces
// ============================================================

/// Nilpotency conditions plus exact autonomy of a claimed polynomial
/// solution, reported as one oracle.
fn report_pipeline(label: &str, v0: &MatC, v1: &MatC, n: usize, poly: &MatPolyX) -> OracleReport {
    let name = format!("{label}: nilpotency and autonomy");
    let (ok, witness) = nilpotency_conditions(v0, v1, n);
    if !ok {
        let w = witness.expect("failing monomial accompanies a false verdict");
        return OracleReport::fail(
            name,
            format!("monomial {w} (letters {})", w.letters()),
            "0",
            "nonzero matrix",
        );
    }
    match check_autonomous_poly(poly) {
        Ok(()) => OracleReport::pass(name),
        Err(Error::PotentialNotAutonomous { order, row, col }) => OracleReport::fail(
            name,
            format!("autonomy defect at x^{order}, entry ({row},{col})"),
            "0",
            "nonzero",
        ),
        Err(e) => OracleReport::fail(name, "check_autonomous_poly", "Ok", format!("error: {e}")),
    }
}

/// Membership of the potential in its own algebra.
fn report_membership_of_v(label: &str, poly: &MatPolyX) -> OracleReport {
    let name = format!("{label}: membership of V");
    let v = Potential::from_poly(poly.clone());
    match membership(poly, &v) {
        Ok(cert) if cert.verdict() => OracleReport::pass(name),
        Ok(cert) => OracleReport::fail(
            name,
            format!("failed condition {}", cert.failed_label()),
            "member",
            "non-member",
        ),
        Err(e) => OracleReport::fail(name, "membership", "a verdict", format!("error: {e}")),
    }
}

/// Synthesis of B for θ = V, verified by the sign-checked residual
/// inside `synthesize_b` and independently by the symbolic expansion.
fn report_synthesis(label: &str, theta: &MatPolyX, poly: &MatPolyX) -> OracleReport {
    let name = format!("{label}: synthesis verified (residual + expansion)");
    let v = Potential::from_poly(poly.clone());
    let op = match synthesize_b(theta, &v) {
        Ok(op) => op,
        Err(e) => {
            return OracleReport::fail(name, "synthesize_b", "an operator", format!("error: {e}"))
        }
    };
    let expand = expand_bispectral_identity(theta, &op, &v, 2 * poly.degree().unwrap_or(0) as i64 + 2);
    if expand.passed {
        OracleReport::pass(name)
    } else {
        let d = expand
            .first_discrepancy
            .expect("failing expansion carries a discrepancy");
        OracleReport::fail(name, d.location, d.expected, d.got)
    }
}

/// Compares a displayed potential against a recomputed one, scanning
/// coefficients in ascending order and entries row-major, and names the
/// first disagreeing coefficient.
fn report_display_comparison(name: String, recursion: &MatPolyX, displayed: &MatPolyX) -> OracleReport {
    let top = recursion
        .degree()
        .unwrap_or(0)
        .max(displayed.degree().unwrap_or(0));
    for k in 0..=top {
        let rec = recursion.coeff(k);
        let disp = displayed.coeff(k);
        if rec != disp {
            let (r, c) = rec.sub(&disp).first_nonzero().expect("coefficients differ");
            return OracleReport::fail(
                name,
                format!("coefficient of x^{k}, entry ({r},{c})"),
                format!("{} (recursion)", rec.get(r, c)),
                format!("{} (displayed)", disp.get(r, c)),
            );
        }
    }
    OracleReport::pass(name)
}

/// The degree-(≤3) theorem potential determined by a nilpotent seed:
/// V = V₀ + V₁x + ½V₁V₀x² + ⅙V₁²x³ (higher orders vanish under the
/// nilpotency conditions; `check_autonomous_poly` re-verifies exactness).
fn theorem_potential(v0: &MatC, v1: &MatC) -> MatPolyX {
    let half = GaussianRational::from_ratio(1, 2);
    let sixth = GaussianRational::from_ratio(1, 6);
    MatPolyX::from_coeffs(
        v0.rows(),
        vec![
            v0.clone(),
            v1.clone(),
            v1.mul(v0).scale(&half),
            v1.mul(v1).scale(&sixth),
        ],
    )
}

// ============================================================
// Cases
// ============================================================

/// Degree 1, N = 2: V₁ = E₁₂, V₀ with first row (2, 3).
fn case_n1() -> FixtureOutcome {
    let v0 = MatC::from_i64_rows(&[&[2, 3], &[0, 0]]);
    let v1 = MatC::from_i64_rows(&[&[0, 1], &[0, 0]]);
    let poly = theorem_potential(&v0, &v1);
    let reports = vec![
        report_pipeline("n1", &v0, &v1, 1, &poly),
        report_membership_of_v("n1", &poly),
        report_synthesis("n1", &poly, &poly),
    ];
    FixtureOutcome {
        case: "n1".into(),
        discrepancy_allowed: false,
        reports,
    }
}

/// Degree 2, N = 4: V₁ = 7·E₁₂, V₀ with rows (1,2,3,4) and (0,0,5,6).
/// The displayed x² coefficient has entries 35/2 and 21 in row 1.
fn case_n2() -> FixtureOutcome {
    let v0 = MatC::from_i64_rows(&[&[1, 2, 3, 4], &[0, 0, 5, 6], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
    let v1 = MatC::from_i64_rows(&[&[0, 7, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
    let poly = theorem_potential(&v0, &v1);

    // Displayed x² coefficient: ½V₁V₀ with entries (0,2) = 35/2, (0,3) = 21.
    let mut displayed_v2 = MatC::zero(4, 4);
    displayed_v2.set(0, 2, GaussianRational::from_ratio(35, 2));
    displayed_v2.set(0, 3, GaussianRational::from_integer(21));
    let displayed = MatPolyX::from_coeffs(4, vec![v0.clone(), v1.clone(), displayed_v2]);

    let reports = vec![
        report_pipeline("n2", &v0, &v1, 2, &poly),
        report_display_comparison("n2: displayed coefficients vs recursion".into(), &poly, &displayed),
        report_membership_of_v("n2", &poly),
        report_synthesis("n2", &poly, &poly),
    ];
    FixtureOutcome {
        case: "n2".into(),
        discrepancy_allowed: false,
        reports,
    }
}

/// Degree 3, N = 4, run twice.
///
/// The generic seed (V₁ entry (0,0) = 7 free) violates the nilpotency
/// conditions and produces an x² coefficient the displayed table says is
/// zero: evidence the displayed example intends extra unstated
/// constraints. The constrained seed (that entry set to 0) satisfies
/// them, reproduces the displayed x² coefficient exactly, and then
/// disagrees with the displayed x³ coefficient, whose denominator reads
/// 2 where the recursion forces 6. Both findings are reported; the case
/// is flagged discrepancy-allowed so the documented disagreement does
/// not fail the corpus.
fn case_n3() -> FixtureOutcome {
    let v0 = MatC::from_i64_rows(&[&[1, 2, 3, 4], &[0, 0, 5, 6], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
    let v1_generic =
        MatC::from_i64_rows(&[&[7, 1, 8, 9], &[0, 0, 2, 3], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
    let v1 = MatC::from_i64_rows(&[&[0, 1, 8, 9], &[0, 0, 2, 3], &[0, 0, 0, 0], &[0, 0, 0, 0]]);

    // Displayed coefficients, instantiated at these seeds:
    // x²: entries (0,2) = V₀₂₃V₁₁₂/2 = 5/2, (0,3) = V₀₂₄V₁₁₂/2 = 3;
    // x³: entries (0,2) = V₁₁₂V₁₂₃/2 = 1,   (0,3) = V₁₁₂V₁₂₄/2 = 3/2.
    let mut displayed_v2 = MatC::zero(4, 4);
    displayed_v2.set(0, 2, GaussianRational::from_ratio(5, 2));
    displayed_v2.set(0, 3, GaussianRational::from_integer(3));
    let mut displayed_v3 = MatC::zero(4, 4);
    displayed_v3.set(0, 2, GaussianRational::from_integer(1));
    displayed_v3.set(0, 3, GaussianRational::from_ratio(3, 2));

    let mut reports = Vec::new();

    // Generic run: the expected rejections must actually occur.
    {
        let name = "n3 generic seed: unstated constraints detected".to_string();
        let (ok, witness) = nilpotency_conditions(&v0, &v1_generic, 3);
        let half = GaussianRational::from_ratio(1, 2);
        let generic_v2 = v1_generic.mul(&v0).scale(&half);
        let displayed_poly = MatPolyX::from_coeffs(
            4,
            vec![
                v0.clone(),
                v1_generic.clone(),
                displayed_v2.clone(),
                displayed_v3.clone(),
            ],
        );
        let generic_poly = MatPolyX::from_coeffs(
            4,
            vec![v0.clone(), v1_generic.clone(), generic_v2, MatC::zero(4, 4)],
        );
        let comparison = report_display_comparison(name.clone(), &generic_poly, &displayed_poly);
        reports.push(if ok {
            OracleReport::fail(
                name,
                "nilpotency conditions on the generic seed",
                "a violated monomial",
                "all conditions hold",
            )
        } else {
            let w = witness.expect("failing monomial accompanies a false verdict");
            if comparison.passed {
                OracleReport::fail(
                    name,
                    "displayed x² coefficient vs generic recursion",
                    "a disagreeing entry",
                    "full agreement",
                )
            } else {
                let d = comparison
                    .first_discrepancy
                    .expect("failing comparison carries a discrepancy");
                OracleReport::pass(format!(
                    "{name} (monomial {} nonzero; first displayed/recursion \
                     disagreement at {}: {} vs {})",
                    w.letters(),
                    d.location,
                    d.got,
                    d.expected,
                ))
            }
        });
    }

    // Constrained run: recursion-exact pipeline plus the documented
    // disagreement with the displayed x³ coefficient.
    let poly = theorem_potential(&v0, &v1);
    let displayed = MatPolyX::from_coeffs(
        4,
        vec![v0.clone(), v1.clone(), displayed_v2, displayed_v3],
    );
    reports.push(report_pipeline("n3 constrained seed", &v0, &v1, 3, &poly));
    reports.push(report_membership_of_v("n3 constrained seed", &poly));
    reports.push(report_synthesis("n3 constrained seed", &poly, &poly));
    reports.push(report_display_comparison(
        "n3 constrained seed: displayed coefficients vs recursion".into(),
        &poly,
        &displayed,
    ));

    FixtureOutcome {
        case: "n3".into(),
        discrepancy_allowed: true,
        reports,
    }
}

/// The V = −2I/x closed forms, for block sizes m = 1..6.
fn case_residue_full() -> FixtureOutcome {
    let reports = exec::sweep((1..=6).collect::<Vec<_>>(), residue_case_closed_forms);
    FixtureOutcome {
        case: "residue_full".into(),
        discrepancy_allowed: false,
        reports,
    }
}

/// The scalar closed form −2λ·tanh(λx): series comparison at v₁ = 1 and
/// a rigorous evaluation check at v₁ = −1/8, x = 1/2.
fn case_scalar_tanh() -> FixtureOutcome {
    let mut reports = Vec::new();

    // Series comparison at v₁ = 1, orders 0..=24.
    {
        let name = "scalar_tanh: series match (v1 = 1, K = 24)".to_string();
        let v1 = GaussianRational::one();
        let seed = SeedData::new(
            MatC::zero(1, 1),
            MatC::zero(1, 1),
            MatC::from_fn(1, 1, |_, _| v1.clone()),
            None,
            None,
        )
        .expect("scalar seed is consistent");
        let series = seed.solve(24);
        let oracle = scalar_tanh_series(&v1, 24);
        let mut report = OracleReport::pass(name.clone());
        for (k, expected) in oracle.iter().enumerate() {
            let got = series.coeff(k as i64);
            if got.get(0, 0) != expected {
                report = OracleReport::fail(
                    name,
                    format!("coefficient of x^{k}"),
                    expected.to_string(),
                    got.get(0, 0).to_string(),
                );
                break;
            }
        }
        reports.push(report);
    }

    // Evaluation with tail bound at v₁ = −1/8, x = 1/2, K = 20: the
    // 20-term value must sit within its own tail bound of the 40-term
    // oracle partial sum (the bound covers every order above 20).
    {
        let name = "scalar_tanh: evaluation tail bound (v1 = -1/8, x = 1/2, K = 20)".to_string();
        let v1 = GaussianRational::from_ratio(-1, 8);
        let x = GaussianRational::from_ratio(1, 2);
        let seed = SeedData::new(
            MatC::zero(1, 1),
            MatC::zero(1, 1),
            MatC::from_fn(1, 1, |_, _| v1.clone()),
            None,
            None,
        )
        .expect("scalar seed is consistent");
        let series = seed.solve(20);
        let report = match eval_series(&series, &x, 20) {
            Ok(result) => match result.tail_bound.clone() {
                None => OracleReport::fail(name, "tail bound", "Some(bound)", "None"),
                Some(tail) => {
                    let oracle = scalar_tanh_series(&v1, 40);
                    let mut partial = GaussianRational::zero();
                    let mut x_pow = GaussianRational::one();
                    for coeff in &oracle {
                        partial = partial.add(&coeff.mul(&x_pow));
                        x_pow = x_pow.mul(&x);
                    }
                    let diff = result.value.get(0, 0).sub(&partial);
                    if diff.norm_sqr() <= &tail * &tail {
                        OracleReport::pass(name)
                    } else {
                        OracleReport::fail(
                            name,
                            "squared distance to the 40-term oracle partial sum",
                            format!("at most {}", &tail * &tail),
                            diff.norm_sqr().to_string(),
                        )
                    }
                }
            },
            Err(e) => OracleReport::fail(name, "eval_series", "a value", format!("error: {e}")),
        };
        reports.push(report);
    }

    FixtureOutcome {
        case: "scalar_tanh".into(),
        discrepancy_allowed: false,
        reports,
    }
}

// ============================================================
// Tests
// ============================================================
