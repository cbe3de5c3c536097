//! Command dispatch for the `cvxorder` binary.
//!
//! Every command prints a JSON report on stdout. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | order holds / all expectations met |
//! | 1    | an internal expectation of `paper-repro` failed |
//! | 2    | usage or input error |
//! | 10   | order does not hold |
//! | 11   | barycenters differ |

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use cvxorder_core::measure::{paper_instance, paper_points, DiscreteMeasure, PointQ};
use cvxorder_core::order1d::{check_convex_order_1d, majorizes, popoviciu_majorization_vectors, Verdict1d};
use cvxorder_core::ordernd::{check_convex_order, evaluate_inequality_1, evaluate_witness, paper_witness, OrderVerdict};
use cvxorder_core::projcert::{certify_all_directions_2d, DirectionCertificate, Overall};
use cvxorder_core::rational::{parse_rational, parse_rational_field, ratio, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_DOMINATED: i32 = 10;
pub const EXIT_MEAN_MISMATCH: i32 = 11;

#[derive(Parser, Debug)]
#[command(name = "cvxorder", version, about = "Exact convex-order checks between finitely supported measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a ⪯ b for two measures on the line.
    Check1d { a: PathBuf, b: PathBuf },
    /// Decide a ⪯ b in any dimension via a martingale coupling.
    Checknd {
        a: PathBuf,
        b: PathBuf,
        /// Print the separating max-affine function when the order fails.
        #[arg(long)]
        witness: bool,
    },
    /// Certify a_v ⪯ b_v for every direction v in the plane.
    Certify2d {
        a: PathBuf,
        b: PathBuf,
        /// Write the certificate JSON here instead of embedding it in the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the majorization behind the three-point inequality at r, s, t.
    Popoviciu {
        #[arg(allow_hyphen_values = true)]
        r: String,
        #[arg(allow_hyphen_values = true)]
        s: String,
        #[arg(allow_hyphen_values = true)]
        t: String,
    },
    /// Rebuild the planar counterexample and check every expected value.
    PaperRepro {
        /// Override the expected witness gap (harness self-test).
        #[arg(long, hide = true, allow_hyphen_values = true)]
        expect_gap: Option<String>,
    },
    /// Project a measure onto a direction given as comma-separated rationals.
    Project {
        file: PathBuf,
        #[arg(allow_hyphen_values = true)]
        direction: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code plus what goes to stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl RunOutput {
    fn report(code: i32, report: Value) -> Self {
        let mut stdout = serde_json::to_string_pretty(&report).expect("report serializes");
        stdout.push('\n');
        RunOutput {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn usage(message: impl std::fmt::Display) -> Self {
        RunOutput {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CmdResult = Result<RunOutput, UsageError>;

pub fn run<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                RunOutput { code, stdout: String::new(), stderr: text }
            } else {
                RunOutput { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let result = match cli.command {
        Command::Check1d { a, b } => cmd_check1d(&a, &b),
        Command::Checknd { a, b, witness } => cmd_checknd(&a, &b, witness),
        Command::Certify2d { a, b, out } => cmd_certify2d(&a, &b, out.as_deref()),
        Command::Popoviciu { r, s, t } => cmd_popoviciu(&r, &s, &t),
        Command::PaperRepro { expect_gap } => cmd_paper_repro(expect_gap.as_deref()),
        Command::Project { file, direction, out } => cmd_project(&file, &direction, out.as_deref()),
    };
    result.unwrap_or_else(|UsageError(m)| RunOutput::usage(m))
}

fn load(path: &Path) -> Result<DiscreteMeasure, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    DiscreteMeasure::from_json(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn q(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn qs(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(q).collect())
}

fn point(p: &PointQ) -> Value {
    qs(p.coords())
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn verdict_1d_json(v: &Verdict1d) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

pub fn cmd_check1d_measures(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<(i32, Value), String> {
    for (name, m) in [("a", a), ("b", b)] {
        if m.dim() != 1 {
            return Err(format!("{name}: check1d needs dimension 1, found {}", m.dim()));
        }
    }
    let verdict = check_convex_order_1d(a, b).map_err(|e| e.to_string())?;
    let code = match verdict {
        Verdict1d::Dominated => EXIT_OK,
        Verdict1d::NotDominated { .. } => EXIT_NOT_DOMINATED,
        Verdict1d::MeanMismatch => EXIT_MEAN_MISMATCH,
    };
    Ok((code, verdict_1d_json(&verdict)))
}

fn cmd_check1d(a: &Path, b: &Path) -> CmdResult {
    let (ma, mb) = (load(a)?, load(b)?);
    let (code, verdict) = cmd_check1d_measures(&ma, &mb).map_err(UsageError)?;
    Ok(RunOutput::report(
        code,
        json!({
            "command": "check1d",
            "inputs": {"a": path_str(a), "b": path_str(b)},
            "result": verdict,
        }),
    ))
}

fn order_json(verdict: &OrderVerdict, witness: bool) -> Value {
    match verdict {
        OrderVerdict::Dominated { coupling } => json!({
            "verdict": "Dominated",
            "coupling": coupling.iter().map(|row| qs(row)).collect::<Vec<_>>(),
        }),
        OrderVerdict::NotDominated { witness: f, gap } => {
            let mut v = json!({"verdict": "NotDominated", "gap": q(gap)});
            if witness {
                v["witness"] = serde_json::to_value(f).expect("witness serializes");
            }
            v
        }
        OrderVerdict::MeanMismatch => json!({"verdict": "MeanMismatch"}),
    }
}

fn cmd_checknd(a: &Path, b: &Path, witness: bool) -> CmdResult {
    let (ma, mb) = (load(a)?, load(b)?);
    if ma.dim() != mb.dim() {
        return Err(UsageError(format!(
            "dimension mismatch: {} has dim {}, {} has dim {}",
            a.display(),
            ma.dim(),
            b.display(),
            mb.dim()
        )));
    }
    let verdict = check_convex_order(&ma, &mb)?;
    let code = match verdict {
        OrderVerdict::Dominated { .. } => EXIT_OK,
        OrderVerdict::NotDominated { .. } => EXIT_NOT_DOMINATED,
        OrderVerdict::MeanMismatch => EXIT_MEAN_MISMATCH,
    };
    Ok(RunOutput::report(
        code,
        json!({
            "command": "checknd",
            "inputs": {"a": path_str(a), "b": path_str(b), "witness": witness},
            "result": order_json(&verdict, witness),
        }),
    ))
}

fn certificate_summary(cert: &DirectionCertificate) -> Value {
    let mut v = serde_json::to_value(&cert.overall).expect("verdict serializes");
    v["critical_directions"] = cert.critical_directions.len().into();
    v["arcs"] = cert.arcs.len().into();
    v["arcs_verified"] = cert.arcs.iter().filter(|a| a.verified).count().into();
    v
}

fn cmd_certify2d(a: &Path, b: &Path, out: Option<&Path>) -> CmdResult {
    let (ma, mb) = (load(a)?, load(b)?);
    if ma.dim() != 2 || mb.dim() != 2 {
        return Err(UsageError(format!(
            "certify2d needs planar measures (got dims {} and {}); for other dimensions use \
             `project` plus `check1d` on chosen directions",
            ma.dim(),
            mb.dim()
        )));
    }
    let cert = certify_all_directions_2d(&ma, &mb)?;
    let mut report = json!({
        "command": "certify2d",
        "inputs": {"a": path_str(a), "b": path_str(b)},
        "result": certificate_summary(&cert),
    });
    match out {
        Some(path) => {
            fs::write(path, cert.to_json()).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            report["inputs"]["out"] = path_str(path).into();
        }
        None => {
            report["certificate"] = serde_json::from_str(&cert.to_json()).expect("certificate is JSON");
        }
    }
    let code = if cert.is_all_dominated() { EXIT_OK } else { EXIT_NOT_DOMINATED };
    Ok(RunOutput::report(code, report))
}

fn cmd_popoviciu(r: &str, s: &str, t: &str) -> CmdResult {
    let r = parse_rational_field(r, "r")?;
    let s = parse_rational_field(s, "s")?;
    let t = parse_rational_field(t, "t")?;
    let (x, y) = popoviciu_majorization_vectors(&r, &s, &t);
    let verdict = majorizes(&x, &y)?;
    let code = if verdict.holds { EXIT_OK } else { EXIT_NOT_DOMINATED };
    Ok(RunOutput::report(
        code,
        json!({
            "command": "popoviciu",
            "inputs": {"r": q(&r), "s": q(&s), "t": q(&t)},
            "midpoints": qs(&x),
            "centroid_and_points": qs(&y),
            "result": serde_json::to_value(&verdict).expect("verdict serializes"),
        }),
    ))
}

fn parse_direction(text: &str) -> Result<PointQ, UsageError> {
    let coords = text
        .split(',')
        .enumerate()
        .map(|(k, c)| parse_rational_field(c.trim(), &format!("direction[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PointQ::new(coords))
}

fn cmd_project(file: &Path, direction: &str, out: Option<&Path>) -> CmdResult {
    let m = load(file)?;
    let v = parse_direction(direction)?;
    if v.dim() != m.dim() {
        return Err(UsageError(format!(
            "direction has {} coordinates, measure has dimension {}",
            v.dim(),
            m.dim()
        )));
    }
    let projected = m.project(&v)?;
    let text = projected.to_json();
    match out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            Ok(RunOutput::report(
                EXIT_OK,
                json!({
                    "command": "project",
                    "inputs": {"file": path_str(file), "direction": point(&v), "out": path_str(path)},
                    "atoms": projected.len(),
                }),
            ))
        }
        None => Ok(RunOutput {
            code: EXIT_OK,
            stdout: text,
            stderr: String::new(),
        }),
    }
}

struct Expectations {
    checks: Vec<Value>,
    failed: Vec<String>,
}

impl Expectations {
    fn check(&mut self, name: &str, expected: Value, actual: Value) {
        let ok = expected == actual;
        if !ok {
            self.failed.push(format!("{name}: expected {expected}, got {actual}"));
        }
        self.checks.push(json!({"name": name, "expected": expected, "actual": actual, "ok": ok}));
    }
}

/// Builds the planar counterexample and checks every expected value; `expect_gap`
/// replaces the expected witness gap of 1/6.
pub fn paper_repro_report(expect_gap: Option<&Rational>) -> (bool, Value) {
    let (x, y, z) = paper_points();
    let (mu, nu) = paper_instance();
    let mut exp = Expectations {
        checks: Vec::new(),
        failed: Vec::new(),
    };

    exp.check("barycenter_mu", qs(&[ratio(1, 3), ratio(1, 3)]), point(&mu.barycenter()));
    exp.check("barycenter_nu", qs(&[ratio(1, 3), ratio(1, 3)]), point(&nu.barycenter()));

    let cert = certify_all_directions_2d(&mu, &nu).expect("planar pair");
    let cert_verdict = match &cert.overall {
        Overall::AllDominated => "AllDominated",
        Overall::FailsAt { .. } => "FailsAt",
    };
    exp.check("projections_all_directions", json!("AllDominated"), json!(cert_verdict));
    exp.check("certificate_arcs_verified", json!(true), json!(cert.arcs.iter().all(|a| a.verified)));

    let order = check_convex_order(&mu, &nu).expect("equal dimensions");
    exp.check("martingale_lp", json!("NotDominated"), json!(order.kind()));
    let lp_gap_positive = matches!(&order, OrderVerdict::NotDominated { gap, .. } if *gap > ratio(0, 1));
    exp.check("lp_witness_gap_positive", json!(true), json!(lp_gap_positive));

    let f = paper_witness();
    let ints = evaluate_witness(&f, &mu, &nu).expect("planar witness");
    exp.check("witness_integral_mu", q(&ratio(2, 3)), q(&ints.int_mu));
    exp.check("witness_integral_nu", q(&ratio(1, 2)), q(&ints.int_nu));
    let gap = expect_gap.cloned().unwrap_or_else(|| ratio(1, 6));
    exp.check("witness_gap", q(&gap), q(&ints.gap));

    let ineq = evaluate_inequality_1(&x, &y, &z, &f).expect("planar points");
    exp.check("inequality_lhs", q(&ratio(3, 1)), q(&ineq.lhs));
    exp.check("inequality_rhs", q(&ratio(4, 1)), q(&ineq.rhs));
    exp.check("inequality_holds", json!(false), json!(ineq.holds));

    let ok = exp.failed.is_empty();
    let report = json!({
        "command": "paper-repro",
        "inputs": {
            "x": point(&x), "y": point(&y), "z": point(&z),
            "mu": mu.atoms().iter().map(|(p, w)| json!({"point": point(p), "weight": q(w)})).collect::<Vec<_>>(),
            "nu": nu.atoms().iter().map(|(p, w)| json!({"point": point(p), "weight": q(w)})).collect::<Vec<_>>(),
            "witness": serde_json::to_value(&f).expect("witness serializes"),
        },
        "certificate": certificate_summary(&cert),
        "lp": order_json(&order, true),
        "witness_integrals": serde_json::to_value(&ints).expect("integrals serialize"),
        "inequality": serde_json::to_value(&ineq).expect("inequality serializes"),
        "checks": exp.checks,
        "failures": exp.failed,
        "all_ok": ok,
    });
    (ok, report)
}

fn cmd_paper_repro(expect_gap: Option<&str>) -> CmdResult {
    let gap = expect_gap.map(parse_rational).transpose()?;
    let (ok, report) = paper_repro_report(gap.as_ref());
    let mut out = RunOutput::report(if ok { EXIT_OK } else { EXIT_EXPECTATION }, report.clone());
    if !ok {
        for f in report["failures"].as_array().into_iter().flatten() {
            out.stderr.push_str(&format!("expectation failed: {}\n", f.as_str().unwrap_or_default()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repro_passes_and_detects_tampering() {
        let (ok, report) = paper_repro_report(None);
        assert!(ok, "{report:#}");
        let (ok, report) = paper_repro_report(Some(&ratio(1, 5)));
        assert!(!ok);
        assert_eq!(report["failures"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn direction_parsing() {
        assert!(parse_direction("1,0").is_ok());
        assert_eq!(parse_direction("-1/2, 3").ok().unwrap().coords()[0], ratio(-1, 2));
        assert!(parse_direction("1,x").is_err());
    }

    #[test]
    fn clap_usage_errors_exit_2() {
        assert_eq!(run(["cvxorder"]).code, EXIT_USAGE);
        assert_eq!(run(["cvxorder", "popoviciu", "1"]).code, EXIT_USAGE);
        assert_eq!(run(["cvxorder", "popoviciu", "1", "2", "1/0"]).code, EXIT_USAGE);
        assert_eq!(run(["cvxorder", "--help"]).code, EXIT_OK);
    }
}
