//! `qbound` command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 quasi-convexity precondition failed,
//! 4 non-convergence.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    check_derivative_power, reference_mean_integral, sweep, unit_grid, verify_hermite_hadamard,
    verify_identity, QuasiConvexityReport, ORACLE_DEFAULT_TOL,
};
use crate::bounds::BoundReport;
use crate::error::Error;
use crate::expr::Expr;
use crate::integrate::{certified_integrate, composite_fixed, CertifyConfig, CertifiedResult, DEFAULT_MAX_DEPTH};
use crate::means;
use crate::output::{format_real, Format, OutputRecord};
use crate::rules::{Interval, Preset, RuleParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

/// Pass/fail threshold of `verify`.
pub const VERIFY_THRESHOLD: f64 = 1e-9;

/// Header of the `sweep` CSV stream.
pub const SWEEP_HEADER: &str =
    "theta,lambda,q,rule_value,reference_mean,actual_error,bound_pm,bound_holder,sharpness_pm,sharpness_holder";

#[derive(Debug, Parser)]
#[command(name = "qbound", version, about = "Certified error bounds for the (theta, lambda) quadrature rule family")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rule value, reference mean and both error bounds on one interval
    Bound(BoundArgs),
    /// Composite integration with a certified error bound
    Integrate(IntegrateArgs),
    /// Numeric check of the error identity or of Hermite-Hadamard
    Verify(VerifyArgs),
    /// Sharpness of both bounds over a (theta, lambda, q) grid, as CSV
    Sweep(SweepArgs),
    /// Special means and the power / reciprocal inequality instances
    Means(MeansArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Simpson,
    Midpoint,
    Trapezoid,
}

impl From<RuleArg> for Preset {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Simpson => Preset::Simpson,
            RuleArg::Midpoint => Preset::Midpoint,
            RuleArg::Trapezoid => Preset::Trapezoid,
        }
    }
}

#[derive(Debug, Args)]
struct FnArgs {
    /// f(x) in the expression grammar, e.g. "exp(x)" or "x^2"
    #[arg(long = "fn", value_name = "EXPR", allow_hyphen_values = true)]
    function: String,
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
}

#[derive(Debug, Args)]
struct RuleSelect {
    #[arg(long, requires = "lambda", conflicts_with = "rule")]
    theta: Option<f64>,
    #[arg(long, requires = "theta", conflicts_with = "rule")]
    lambda: Option<f64>,
    #[arg(long, value_enum)]
    rule: Option<RuleArg>,
}

impl RuleSelect {
    fn resolve(&self) -> Result<Option<RuleParams>, Error> {
        match (self.rule, self.theta, self.lambda) {
            (Some(r), _, _) => Ok(Some(Preset::from(r).params())),
            (None, Some(t), Some(l)) => RuleParams::new(t, l).map(Some),
            _ => Ok(None),
        }
    }

    fn required(&self) -> Result<RuleParams, Error> {
        self.resolve()?
            .ok_or_else(|| Error::invalid("select a rule with --rule or --theta and --lambda"))
    }
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    func: FnArgs,
    #[command(flatten)]
    rule: RuleSelect,
    #[arg(long)]
    q: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Do not check quasi-convexity of |f'|^q
    #[arg(long)]
    skip_qc_check: bool,
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    #[command(flatten)]
    func: FnArgs,
    #[command(flatten)]
    rule: RuleSelect,
    #[arg(long)]
    q: f64,
    /// Target for the certified bound (integral scale); required unless --n is given
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    /// Fixed uniform composite rule with this many pieces instead of adaptive refinement
    #[arg(long)]
    n: Option<usize>,
    /// Write the partition as CSV to this file ("-" for standard output)
    #[arg(long, value_name = "FILE")]
    dump_subintervals: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    skip_qc_check: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VerifyWhat {
    Identity,
    Hh,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    what: VerifyWhat,
    #[command(flatten)]
    func: FnArgs,
    #[command(flatten)]
    rule: RuleSelect,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    func: FnArgs,
    #[arg(long, default_value_t = 11)]
    theta_steps: usize,
    #[arg(long, default_value_t = 11)]
    lambda_steps: usize,
    /// Comma-separated exponents, each >= 1
    #[arg(long, value_delimiter = ',', required = true)]
    q: Vec<f64>,
    #[arg(long)]
    skip_qc_check: bool,
}

#[derive(Debug, Args)]
struct MeansArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    /// Evaluate inequality instance 1 (xⁿ, power mean), 2 (xⁿ, Hölder), 3 (1/x, power mean) or 4 (1/x, Hölder)
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    prop: Option<u8>,
    #[command(flatten)]
    rule: RuleSelect,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

/// Process exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotQuasiConvex { .. } => EXIT_PRECONDITION,
        Error::NonConvergence(_) => EXIT_NONCONVERGENCE,
        Error::Syntax { .. }
        | Error::Domain(_)
        | Error::InvalidInput(_)
        | Error::UnsupportedExponent(_) => EXIT_INPUT,
    }
}

/// Parse `args` (including the program name), run the command, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{e}");
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Bound(a) => cmd_bound(a, out),
        Command::Integrate(a) => cmd_integrate(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Means(a) => cmd_means(a, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        // the reader went away (e.g. `| head`); nothing left to report to
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

enum CliError {
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CmdResult = Result<i32, CliError>;

struct Problem {
    expr: Expr,
    iv: Interval,
}

impl FnArgs {
    fn load(&self) -> Result<Problem, Error> {
        Ok(Problem {
            expr: Expr::parse(&self.function)?,
            iv: Interval::new(self.a, self.b)?,
        })
    }

    fn echo(&self, rec: &mut OutputRecord) {
        rec.input("fn", self.function.as_str()).input("a", self.a).input("b", self.b);
    }
}

fn echo_rule(rec: &mut OutputRecord, rule: &RuleSelect, params: RuleParams) {
    if let Some(r) = rule.rule {
        rec.input("rule", Preset::from(r).name());
    }
    rec.input("theta", params.theta()).input("lambda", params.lambda());
}

fn check_q(q: f64) -> Result<(), Error> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::invalid(format!("q = {q} must be >= 1")));
    }
    Ok(())
}

/// The quasi-convexity report on `|f'|^q`, or `None` when skipped.
fn qc_report(problem: &Problem, q: f64, skip: bool) -> Result<Option<QuasiConvexityReport>, Error> {
    if skip {
        return Ok(None);
    }
    check_derivative_power(problem.expr.derivative(), problem.iv, q).map(Some)
}

fn qc_failure(problem: &Problem, report: &Option<QuasiConvexityReport>) -> Option<Error> {
    report.as_ref().filter(|r| !r.is_quasiconvex).map(|r| Error::NotQuasiConvex {
        a: problem.iv.a(),
        b: problem.iv.b(),
        max_violation: r.max_violation,
        samples: r.samples,
    })
}

/// Run the quasi-convexity check on `|f'|^q` unless skipped; a failure becomes `NotQuasiConvex`.
fn precondition(problem: &Problem, q: f64, skip: bool) -> Result<Option<QuasiConvexityReport>, Error> {
    let report = qc_report(problem, q, skip)?;
    match qc_failure(problem, &report) {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

fn echo_qc(rec: &mut OutputRecord, report: &Option<QuasiConvexityReport>) {
    rec.output("qc_checked", report.is_some())
        .output("qc_quasiconvex", report.as_ref().map(|r| r.is_quasiconvex))
        .output("qc_max_violation", report.as_ref().map(|r| r.max_violation))
        .output("qc_samples", report.as_ref().map_or(crate::output::Value::Null, |r| r.samples.into()));
}

fn emit(out: &mut dyn Write, rec: &OutputRecord, format: FormatArg) -> io::Result<()> {
    writeln!(out, "{}", rec.render(format.into()))
}

fn cmd_bound(args: BoundArgs, out: &mut dyn Write) -> CmdResult {
    let problem = args.func.load()?;
    let params = args.rule.required()?;
    check_q(args.q)?;
    // the report is printed even when the precondition fails, so the verdict is visible
    let qc = qc_report(&problem, args.q, args.skip_qc_check)?;
    let f = problem.expr.function();
    let reference = reference_mean_integral(&f, problem.iv, ORACLE_DEFAULT_TOL)?;
    let report = BoundReport::evaluate(params, problem.iv, &f, problem.expr.derivative(), args.q, reference)?;

    let mut rec = OutputRecord::new("bound");
    args.func.echo(&mut rec);
    echo_rule(&mut rec, &args.rule, params);
    rec.input("q", args.q);
    rec.output("rule_value", report.rule_value)
        .output("reference_mean", report.reference_mean)
        .output("actual_error", report.actual_error)
        .output("bound_pm", report.bound_power_mean)
        .output("bound_holder", report.bound_holder)
        .output("best_bound", report.best_bound())
        .output("pm_valid", report.pm_valid)
        .output("holder_valid", report.holder_valid);
    echo_qc(&mut rec, &qc);
    emit(out, &rec, args.format)?;
    match qc_failure(&problem, &qc) {
        Some(e) => Err(e.into()),
        None => Ok(EXIT_OK),
    }
}

fn dump_partition(result: &CertifiedResult, w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "a,b,local_bound")?;
    for s in &result.subintervals {
        writeln!(
            w,
            "{},{},{}",
            format_real(s.interval.a()),
            format_real(s.interval.b()),
            format_real(s.local_bound)
        )?;
    }
    Ok(())
}

fn cmd_integrate(args: IntegrateArgs, out: &mut dyn Write) -> CmdResult {
    let problem = args.func.load()?;
    let params = args.rule.required()?;
    check_q(args.q)?;
    let tol = match (args.tol, args.n) {
        (Some(t), _) => t,
        (None, Some(_)) => f64::INFINITY,
        (None, None) => return Err(Error::invalid("--tol is required for adaptive integration").into()),
    };
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!("tol = {tol} must be > 0")).into());
    }
    let qc = precondition(&problem, args.q, args.skip_qc_check)?;
    // precondition already ran (or was waived); don't repeat it inside the integrator
    let config = CertifyConfig::new(params, args.q, tol)
        .max_depth(args.max_depth)
        .skip_qc_check(true);
    let f = problem.expr.function();
    let df = problem.expr.derivative();
    let result = match args.n {
        Some(n) => composite_fixed(&f, &df, problem.iv, config, n)?,
        None => certified_integrate(&f, &df, problem.iv, config)?,
    };

    let mut rec = OutputRecord::new("integrate");
    args.func.echo(&mut rec);
    echo_rule(&mut rec, &args.rule, params);
    rec.input("q", args.q).input("tol", args.tol);
    match args.n {
        Some(n) => rec.input("n", n),
        None => rec.input("max_depth", args.max_depth),
    };
    rec.output("integral_estimate", result.integral_estimate)
        .output("certified_bound", result.certified_bound)
        .output("subinterval_count", result.subinterval_count)
        .output("converged", result.converged);
    echo_qc(&mut rec, &qc);
    emit(out, &rec, args.format)?;

    match args.dump_subintervals.as_deref() {
        Some("-") => dump_partition(&result, out)?,
        Some(path) => dump_partition(&result, &mut File::create(path)?)?,
        None => {}
    }
    Ok(if result.converged { EXIT_OK } else { EXIT_NONCONVERGENCE })
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let problem = args.func.load()?;
    let mut rec = OutputRecord::new("verify");
    let f = problem.expr.function();
    match args.what {
        VerifyWhat::Identity => {
            let params = args.rule.required()?;
            let residual = verify_identity(params, problem.iv, &f, problem.expr.derivative(), ORACLE_DEFAULT_TOL)?;
            rec.input("what", "identity");
            args.func.echo(&mut rec);
            echo_rule(&mut rec, &args.rule, params);
            rec.output("residual", residual)
                .output("threshold", VERIFY_THRESHOLD)
                .output("pass", residual < VERIFY_THRESHOLD);
        }
        VerifyWhat::Hh => {
            let (left_gap, right_gap) = verify_hermite_hadamard(&f, problem.iv)?;
            rec.input("what", "hh");
            args.func.echo(&mut rec);
            rec.output("left_gap", left_gap)
                .output("right_gap", right_gap)
                .output("threshold", VERIFY_THRESHOLD)
                .output("pass", left_gap >= -VERIFY_THRESHOLD && right_gap >= -VERIFY_THRESHOLD);
        }
    }
    emit(out, &rec, args.format)?;
    Ok(EXIT_OK)
}

/// Thread cap for sweep parallelism from `QBOUND_THREADS`, if set to a positive integer.
fn thread_cap() -> Option<usize> {
    std::env::var("QBOUND_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn cell(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

fn cmd_sweep(args: SweepArgs, out: &mut dyn Write) -> CmdResult {
    let problem = args.func.load()?;
    for &q in &args.q {
        check_q(q)?;
        precondition(&problem, q, args.skip_qc_check)?;
    }
    let thetas = unit_grid(args.theta_steps)?;
    let lambdas = unit_grid(args.lambda_steps)?;
    let f = problem.expr.function();
    let df = problem.expr.derivative();
    let run = || sweep(&f, &df, problem.iv, &thetas, &lambdas, &args.q);
    let rows = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("QBOUND_THREADS: {e}")))?
            .install(run)?,
        None => run()?,
    };
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            format_real(r.theta),
            format_real(r.lambda),
            format_real(r.q),
            format_real(r.rule_value),
            format_real(r.reference_mean),
            format_real(r.actual_error),
            format_real(r.bound_pm),
            cell(r.bound_holder),
            format_real(r.sharpness_pm),
            cell(r.sharpness_holder),
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_means(args: MeansArgs, out: &mut dyn Write) -> CmdResult {
    let (a, b) = (args.a, args.b);
    let mut rec = OutputRecord::new("means");
    rec.input("a", a).input("b", b);

    if let Some(prop) = args.prop {
        let params = args.rule.required()?;
        let q = args.q.ok_or_else(|| Error::invalid("--prop needs --q"))?;
        let iv = Interval::new(a, b)?;
        rec.input("prop", prop as usize);
        echo_rule(&mut rec, &args.rule, params);
        rec.input("q", q);
        let result = match prop {
            1 | 2 => {
                let n = args.n.ok_or_else(|| Error::invalid("propositions 1 and 2 need --n"))?;
                rec.input("n", n as usize);
                if prop == 1 {
                    means::proposition_power_pm(n, params, q, iv)?
                } else {
                    means::proposition_power_holder(n, params, q, iv)?
                }
            }
            3 => means::proposition_reciprocal_pm(params, q, iv)?,
            _ => means::proposition_reciprocal_holder(params, q, iv)?,
        };
        rec.output("lhs", result.lhs)
            .output("rhs", result.rhs)
            .output("holds", result.holds)
            .output("slack", result.slack);
    } else {
        rec.output("arithmetic", means::arithmetic(a, b))
            .output("harmonic", means::harmonic(a, b).ok())
            .output("logarithmic", means::logarithmic_mean(a, b).ok());
        if let Some(alpha) = args.alpha {
            rec.input("alpha", alpha);
            rec.output("weighted_arithmetic", means::weighted_arithmetic(alpha, a, b)?)
                .output("weighted_harmonic", means::weighted_harmonic(alpha, a, b).ok());
        }
        if let Some(n) = args.n {
            rec.input("n", n as usize);
            rec.output("n_logarithmic", means::n_logarithmic_mean(n, a, b)?);
        }
    }
    emit(out, &rec, args.format)?;
    Ok(EXIT_OK)
}
