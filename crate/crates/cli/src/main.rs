//! `bispectral`: exact solver and certificate toolkit for the matrix
//! autonomous equation V''(x) = V'(x)V(x) and the bispectral algebra of
//! the associated Schroedinger operator.
//!
//! Subcommands: `solve` runs the Laurent-coefficient recursion from a
//! seed file; `membership` decides whether a matrix polynomial theta
//! belongs to the algebra of a potential; `synthesize` produces a
//! verified spectral-side operator for a member; `fixtures` runs the
//! built-in example corpus against its own oracles.
//!
//! Exit codes: 0 success, 1 input error, 2 mathematical inconsistency
//! in the input (or a failed verification), 3 negative mathematical
//! verdict (the certificate is still written).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use bispectral_core::autonomous::{eval_series, SeedData, SeriesEval};
use bispectral_core::bispectral::{
    lambda_residual_report, membership, synthesize_b, DiffOpZ, MembershipCertificate, Potential,
};
use bispectral_core::exact::{parse_rational, GaussianRational, MatC, MatLaurent, MatPolyX};
use bispectral_core::fixtures::{run_all, run_case, FixtureOutcome};
use bispectral_core::verify::{expand_bispectral_identity, OracleReport};
use bispectral_core::Error;

// ============================================================
// Command line
// ============================================================

#[derive(Parser)]
#[command(
    name = "bispectral",
    version,
    about = "Exact solver and certificates for V'' = V'V and its bispectral algebra"
)]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    /// Pretty-printed JSON, byte-deterministic for identical inputs.
    Json,
    /// Human-readable report.
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Solve V'' = V'V from seed data by the coefficient recursion.
    Solve {
        /// Seed JSON: {"residue", "V0", "V1", "V212": matrix|null, "K": int|null}.
        #[arg(long, value_name = "PATH")]
        seed_file: PathBuf,

        /// Truncation order (highest kept power of x), at least 3.
        /// Precedence: this flag, then the seed file's "K", then 32.
        #[arg(short = 'K', long, value_name = "INT")]
        order: Option<i64>,

        /// Also evaluate the truncated series at a Gaussian rational
        /// point, written "re" or "re,im" (each part "p/q" or "p").
        #[arg(long, value_name = "POINT")]
        eval: Option<String>,
    },

    /// Decide membership of theta in the bispectral algebra of a potential.
    Membership {
        /// Matrix polynomial JSON: {"dim", "coeffs"}.
        #[arg(long, value_name = "PATH")]
        theta_file: PathBuf,

        /// Potential JSON: either a matrix polynomial {"dim", "coeffs"}
        /// or a Laurent jet {"dim", "residue", "coeffs"}.
        #[arg(long, value_name = "PATH")]
        potential_file: PathBuf,
    },

    /// Synthesize the spectral-side operator for a member theta and
    /// verify it; an operator that fails verification is never emitted.
    Synthesize {
        /// Matrix polynomial JSON: {"dim", "coeffs"}.
        #[arg(long, value_name = "PATH")]
        theta_file: PathBuf,

        /// Potential JSON, as for `membership`.
        #[arg(long, value_name = "PATH")]
        potential_file: PathBuf,

        /// Which independent verification to run on the candidate.
        #[arg(long, value_enum, default_value_t = VerifyMode::Both)]
        verify: VerifyMode,
    },

    /// Run the built-in example corpus against its oracles.
    Fixtures {
        /// One case: n1 | n2 | n3 | residue_full | scalar_tanh.
        #[arg(long, value_name = "NAME", conflicts_with = "all", required_unless_present = "all")]
        case: Option<String>,

        /// Run every case.
        #[arg(long)]
        all: bool,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum VerifyMode {
    /// Check that the Lambda residual of the identity vanishes.
    Residual,
    /// Re-expand the identity coefficient by coefficient.
    Expand,
    /// Run both checks (the default).
    Both,
}

// ============================================================
// Exit discipline
// ============================================================

const EXIT_INPUT: u8 = 1;
const EXIT_MATH: u8 = 2;
const EXIT_VERDICT: u8 = 3;

/// A terminal failure: message to stderr, no payload.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

/// Classifies a core error into the exit-code contract.
fn classify(e: &Error) -> u8 {
    match e {
        Error::DimensionMismatch(_) | Error::Parse(_) => EXIT_INPUT,
        Error::NotAMember(_) => EXIT_VERDICT,
        _ => EXIT_MATH,
    }
}

fn core_failure(e: &Error) -> Failure {
    Failure { code: classify(e), message: e.to_string() }
}

// ============================================================
// Input plumbing
// ============================================================

/// Mirror of the seed file schema. Deserializing this never validates
/// the mathematics, so a malformed file is an input error (exit 1)
/// while an inconsistent seed is a mathematical one (exit 2).
#[derive(Deserialize)]
struct SeedFile {
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

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, Failure> {
    serde_json::from_str(text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// A potential file is either a bare matrix polynomial or, when it has
/// a "residue" key, a Laurent jet whose polynomial part is reused.
fn load_potential(path: &Path) -> Result<Potential, Failure> {
    let text = read_file(path)?;
    let value: serde_json::Value = parse_json(path, &text)?;
    if value.get("residue").is_some() {
        let jet: MatLaurent = serde_json::from_value(value)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        Ok(Potential::from_laurent(&jet))
    } else {
        let poly: MatPolyX = serde_json::from_value(value)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        Ok(Potential::from_poly(poly))
    }
}

fn load_theta(path: &Path) -> Result<MatPolyX, Failure> {
    let text = read_file(path)?;
    parse_json(&path, &text)
}

/// Parses "re" or "re,im" with each part an exact rational.
fn parse_eval_point(s: &str) -> Result<GaussianRational, Failure> {
    let mut parts = s.splitn(2, ',');
    let re_text = parts.next().unwrap_or_default().trim();
    let re = parse_rational(re_text)
        .map_err(|e| Failure::input(format!("--eval: {e}")))?;
    let im = match parts.next() {
        Some(t) => parse_rational(t.trim())
            .map_err(|e| Failure::input(format!("--eval: {e}")))?,
        None => parse_rational("0").expect("literal zero"),
    };
    Ok(GaussianRational::new(re, im))
}

/// Degree-times-dimension work cap for the membership machinery,
/// overridable through BISPECTRAL_MAX_DEGREE.
fn degree_cap() -> Result<usize, Failure> {
    match std::env::var("BISPECTRAL_MAX_DEGREE") {
        Ok(text) => text.parse().map_err(|_| {
            Failure::input(format!(
                "BISPECTRAL_MAX_DEGREE must be a nonnegative integer, got {text:?}"
            ))
        }),
        Err(_) => Ok(64),
    }
}

fn enforce_cap(theta: &MatPolyX, v: &Potential) -> Result<(), Failure> {
    let cap = degree_cap()?;
    let work = theta.degree().unwrap_or(0) * v.dim();
    if work > cap {
        return Err(Failure::input(format!(
            "work cap exceeded: deg(theta) * dim = {work} > {cap}; \
             raise BISPECTRAL_MAX_DEGREE to allow this"
        )));
    }
    Ok(())
}

// ============================================================
// Payloads
// ============================================================

#[derive(Serialize)]
struct SolveOutput {
    order: i64,
    series: MatLaurent,
    evaluation: Option<SeriesEval>,
}

#[derive(Serialize)]
struct SynthesizeOutput {
    /// Absent when verification failed: unverified operators are not emitted.
    operator: Option<DiffOpZ>,
    verification: Vec<OracleReport>,
}

fn json_payload<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable payload");
    text.push('\n');
    text
}

fn report_text(indent: &str, report: &OracleReport) -> String {
    match &report.first_discrepancy {
        None => format!("{indent}[PASS] {}\n", report.name),
        Some(d) => format!(
            "{indent}[FAIL] {}\n{indent}  at: {}\n{indent}  expected: {}\n{indent}  got: {}\n",
            report.name, d.location, d.expected, d.got
        ),
    }
}

fn solve_text(out: &SolveOutput) -> String {
    let mut text = format!("truncation order: {}\n{}", out.order, out.series);
    if let Some(eval) = &out.evaluation {
        text.push_str(&format!("evaluated partial sum:\n{}", eval.value));
        match &eval.tail_bound {
            Some(bound) => text.push_str(&format!(
                "tail bound (squared Frobenius norm): {}\n",
                bispectral_core::exact::rational_to_string(bound)
            )),
            None => text.push_str("tail bound: not available for this seed\n"),
        }
    }
    text
}

fn certificate_text(cert: &MembershipCertificate) -> String {
    if cert.verdict() {
        "member: true\n".to_string()
    } else {
        let mut text = format!("member: false\nfailed condition: {}\n", cert.failed_label());
        if let Some(witness) = cert.witness() {
            text.push_str(&format!("witness:\n{witness}"));
        }
        text
    }
}

fn synthesize_text(out: &SynthesizeOutput) -> String {
    let mut text = String::new();
    if let Some(op) = &out.operator {
        text.push_str(&format!("operator of order {}:\n", op.order()));
        for (j, b) in op.coeffs().iter().enumerate() {
            text.push_str(&format!("b_{j} =\n{b}"));
        }
    } else {
        text.push_str("operator withheld: verification failed\n");
    }
    text.push_str("verification:\n");
    for report in &out.verification {
        text.push_str(&report_text("  ", report));
    }
    text
}

fn fixtures_text(outcomes: &[FixtureOutcome]) -> String {
    let mut text = String::new();
    for outcome in outcomes {
        let mode = if outcome.discrepancy_allowed {
            " (report-only: discrepancies expected and documented)"
        } else {
            ""
        };
        text.push_str(&format!("case {}{mode}\n", outcome.case));
        for report in &outcome.reports {
            text.push_str(&report_text("  ", report));
        }
    }
    text
}

// ============================================================
// Commands
// ============================================================

fn cmd_solve(
    format: Format,
    seed_file: &Path,
    order: Option<i64>,
    eval: Option<&str>,
) -> Result<(String, u8), Failure> {
    let text = read_file(seed_file)?;
    let raw: SeedFile = parse_json(seed_file, &text)?;
    let seed = SeedData::new(raw.residue, raw.v0, raw.v1, raw.v212, raw.k)
        .map_err(|e| core_failure(&e))?;

    let order = order.or(raw.k).unwrap_or(32);
    if order < 3 {
        return Err(Failure::input(format!(
            "--order must be at least 3 (the recursion determines orders 3 and up), got {order}"
        )));
    }

    let series = seed.solve(order);
    let evaluation = match eval {
        Some(point_text) => {
            let x = parse_eval_point(point_text)?;
            Some(eval_series(&series, &x, order).map_err(|e| core_failure(&e))?)
        }
        None => None,
    };

    let out = SolveOutput { order, series, evaluation };
    let payload = match format {
        Format::Json => json_payload(&out),
        Format::Text => solve_text(&out),
    };
    Ok((payload, 0))
}

fn cmd_membership(
    format: Format,
    theta_file: &Path,
    potential_file: &Path,
) -> Result<(String, u8), Failure> {
    let theta = load_theta(theta_file)?;
    let v = load_potential(potential_file)?;
    enforce_cap(&theta, &v)?;

    let cert = membership(&theta, &v).map_err(|e| core_failure(&e))?;
    let code = if cert.verdict() { 0 } else { EXIT_VERDICT };
    let payload = match format {
        Format::Json => json_payload(&cert),
        Format::Text => certificate_text(&cert),
    };
    Ok((payload, code))
}

fn cmd_synthesize(
    format: Format,
    theta_file: &Path,
    potential_file: &Path,
    verify: VerifyMode,
) -> Result<(String, u8), Failure> {
    let theta = load_theta(theta_file)?;
    let v = load_potential(potential_file)?;
    enforce_cap(&theta, &v)?;

    let op = match synthesize_b(&theta, &v) {
        Ok(op) => op,
        Err(Error::NotAMember(cert)) => {
            // A negative verdict still gets its certificate written.
            eprintln!("bispectral: theta is not a member; no operator to synthesize");
            let payload = match format {
                Format::Json => json_payload(&cert),
                Format::Text => certificate_text(&cert),
            };
            return Ok((payload, EXIT_VERDICT));
        }
        Err(e) => return Err(core_failure(&e)),
    };

    let mut verification = Vec::new();
    if matches!(verify, VerifyMode::Residual | VerifyMode::Both) {
        verification.push(match lambda_residual_report(&theta, &op, &v) {
            None => OracleReport::pass("lambda_residual"),
            Some((power, entry)) => OracleReport::fail(
                "lambda_residual",
                format!("coefficient of x^{power}"),
                "0",
                entry.to_string(),
            ),
        });
    }
    if matches!(verify, VerifyMode::Expand | VerifyMode::Both) {
        let upto = theta.degree().unwrap_or(0) as i64 + v.degree().unwrap_or(0) as i64 + 2;
        verification.push(expand_bispectral_identity(&theta, &op, &v, upto));
    }

    let verified = verification.iter().all(|r| r.passed);
    let out = SynthesizeOutput {
        operator: verified.then_some(op),
        verification,
    };
    let payload = match format {
        Format::Json => json_payload(&out),
        Format::Text => synthesize_text(&out),
    };
    if verified {
        Ok((payload, 0))
    } else {
        eprintln!("bispectral: candidate operator failed verification; operator withheld");
        Ok((payload, EXIT_MATH))
    }
}

fn cmd_fixtures(format: Format, case: Option<&str>, all: bool) -> Result<(String, u8), Failure> {
    let outcomes: Vec<FixtureOutcome> = if all {
        run_all()
    } else {
        let name = case.expect("clap enforces --case xor --all");
        vec![run_case(name).map_err(|e| core_failure(&e))?]
    };

    let ok = outcomes.iter().all(FixtureOutcome::acceptable);
    let payload = match format {
        Format::Json => {
            if all {
                json_payload(&outcomes)
            } else {
                json_payload(&outcomes[0])
            }
        }
        Format::Text => fixtures_text(&outcomes),
    };
    Ok((payload, if ok { 0 } else { EXIT_MATH }))
}

// ============================================================
// Entry point
// ============================================================

fn emit(target: Option<&Path>, payload: &str) -> std::io::Result<()> {
    match target {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(payload.as_bytes())?;
            lock.flush()
        }
        Some(path) => fs::write(path, payload),
    }
}

fn run(cli: &Cli) -> Result<(String, u8), Failure> {
    match &cli.command {
        Command::Solve { seed_file, order, eval } => {
            cmd_solve(cli.format, seed_file, *order, eval.as_deref())
        }
        Command::Membership { theta_file, potential_file } => {
            cmd_membership(cli.format, theta_file, potential_file)
        }
        Command::Synthesize { theta_file, potential_file, verify } => {
            cmd_synthesize(cli.format, theta_file, potential_file, *verify)
        }
        Command::Fixtures { case, all } => cmd_fixtures(cli.format, case.as_deref(), *all),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((payload, code)) => {
            if let Err(e) = emit(cli.output.as_deref(), &payload) {
                eprintln!("bispectral: cannot write output: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
            ExitCode::from(code)
        }
        Err(failure) => {
            eprintln!("bispectral: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
