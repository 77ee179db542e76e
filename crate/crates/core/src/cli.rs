//! The `qineq` command line: `eval`, `envelope`, `audit` and `identity`.
//!
//! Exit codes: 0 on success, 1 when an audit has a failing record, 2 on
//! usage or validation errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    envelope_aq_exponential, envelope_aq_gaussian, envelope_entire, envelope_meromorphic,
    envelope_phi, envelope_phi_closed_form, envelope_theta, envelope_theta_as_printed,
    meromorphic_bound_params, EnvelopeResult,
};
use crate::error::Error;
use crate::qcore::QBase;
use crate::series::{ConfluentParams, LaurentSpec, PhiParams};
use crate::verify::{
    audit_envelope, audit_random, format_complex, identity_euler, identity_ql_sum,
    identity_qbinomial_theorem, identity_theta_triple_product, log_grid, parse_complex,
    AuditRecord, AuditSummary, AuditTarget, FunctionTag, SweepPlan, DEFAULT_SLACK, DEFAULT_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping audit parallelism.
pub const THREADS_ENV: &str = "QINEQ_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qineq", version, about = "Evaluate q-series and audit their envelope inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a function at one point.
    Eval {
        #[command(flatten)]
        function: FunctionArgs,
        /// Evaluation point, `<re>[+|-]<im>i` or a real number.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compute an envelope at a given modulus.
    Envelope {
        #[command(flatten)]
        function: FunctionArgs,
        /// Modulus |z| (distance from the center for laurent).
        #[arg(long = "abs-z")]
        abs_z: f64,
        #[arg(long, value_enum, default_value_t = Variant::Default)]
        variant: Variant,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweep a log grid of moduli and angles and check every envelope.
    Audit {
        #[command(flatten)]
        function: FunctionArgs,
        /// Log-spaced grid `lo:hi:count`.
        #[arg(long, default_value = "1e-4:1e4:41")]
        grid: String,
        #[arg(long, default_value_t = 8)]
        angles: usize,
        #[arg(long, default_value_t = DEFAULT_SLACK)]
        slack: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw this many random parameter sets instead of using the given ones.
        #[arg(long)]
        draws: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Residual of a classical identity.
    Identity {
        #[arg(long, value_enum)]
        identity: IdentityKind,
        #[arg(long)]
        q: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long)]
        l: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FunctionKind {
    F,
    Phi,
    Aq,
    Theta,
    Laurent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Default,
    /// `exp(q|z|/(1-q))` for aq.
    Exponential,
    /// Direct closed form for phi.
    ClosedForm,
    /// Literal theta form, for comparison only.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IdentityKind {
    Euler,
    QBinomial,
    QlSum,
    TripleProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct FunctionArgs {
    #[arg(long, value_enum)]
    function: FunctionKind,
    #[arg(long)]
    q: Option<f64>,
    /// Comma-separated numerator parameters.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Comma-separated denominator parameters in [0, 1).
    #[arg(long)]
    b: Option<String>,
    /// Gaussian weight of the confluent class.
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Laurent center.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error carrying the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(flag: &str, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: format!("{flag}: {e}"),
    }
}

fn lib_error(e: Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    }
}

fn parse_q(q: Option<f64>) -> Result<QBase, Failure> {
    let q = q.ok_or_else(|| usage("--q", "required"))?;
    QBase::new(q).map_err(|e| usage("--q", e))
}

fn parse_list<T>(
    flag: &str,
    raw: &Option<String>,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Vec<T>, Failure> {
    match raw {
        None => Ok(Vec::new()),
        Some(s) => s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| parse(p).map_err(|e| usage(flag, e)))
            .collect(),
    }
}

fn parse_a(raw: &Option<String>) -> Result<Vec<Complex64>, Failure> {
    parse_list("--a", raw, |p| parse_complex(p).map_err(|e| e.to_string()))
}

fn parse_b(raw: &Option<String>) -> Result<Vec<f64>, Failure> {
    parse_list("--b", raw, |p| {
        let b = p.parse::<f64>().map_err(|_| format!("cannot parse {p:?}"))?;
        if (0.0..1.0).contains(&b) {
            Ok(b)
        } else {
            Err(format!("{b} is outside [0, 1)"))
        }
    })
}

fn require_alpha(alpha: Option<f64>) -> Result<f64, Failure> {
    let alpha = alpha.ok_or_else(|| usage("--alpha", "required for theta and laurent"))?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(usage("--alpha", format!("{alpha} is outside (0, 1)")));
    }
    Ok(alpha)
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(usage("--tol", format!("{tol} is not a positive number")))
    }
}

impl FunctionArgs {
    fn tag(&self) -> FunctionTag {
        match self.function {
            FunctionKind::F => FunctionTag::ConfluentF,
            FunctionKind::Phi => FunctionTag::Phi,
            FunctionKind::Aq => FunctionTag::Aq,
            FunctionKind::Theta => FunctionTag::Theta,
            FunctionKind::Laurent => FunctionTag::Laurent,
        }
    }

    fn target(&self) -> Result<AuditTarget, Failure> {
        check_tol(self.tol)?;
        let q = parse_q(self.q)?;
        let a = parse_a(&self.a)?;
        let b = parse_b(&self.b)?;
        Ok(match self.function {
            FunctionKind::F => {
                let l = self.l.ok_or_else(|| usage("--l", "required for function f"))?;
                if !(l > 0.0 && l.is_finite()) {
                    return Err(usage("--l", format!("{l} is not positive")));
                }
                AuditTarget::ConfluentF(ConfluentParams::new(a, b, l, q).map_err(|e| usage("--a", e))?)
            }
            FunctionKind::Phi => {
                AuditTarget::Phi(PhiParams::new(a, b, q).map_err(|e| usage("--a/--b", e))?)
            }
            FunctionKind::Aq => AuditTarget::Aq(q),
            FunctionKind::Theta => AuditTarget::Theta {
                q,
                alpha: require_alpha(self.alpha)?,
            },
            FunctionKind::Laurent => {
                let mut spec = LaurentSpec::theta(q, require_alpha(self.alpha)?).map_err(lib_error)?;
                if let Some(center) = &self.center {
                    spec.center = parse_complex(center).map_err(|e| usage("--center", e))?;
                }
                AuditTarget::Laurent(spec)
            }
        })
    }
}

/// Fixed-order CSV row of an audit record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub function: FunctionTag,
    pub q: f64,
    pub l: Option<f64>,
    pub param_digest: String,
    pub re_z: f64,
    pub im_z: f64,
    pub abs_value: f64,
    pub envelope_log: f64,
    pub ratio: f64,
    pub pass: bool,
    pub terms_used: usize,
    pub tail_bound: f64,
}

impl From<&AuditRecord> for CsvRow {
    fn from(r: &AuditRecord) -> Self {
        CsvRow {
            function: r.function,
            q: r.q,
            l: r.l,
            param_digest: r.param_digest.clone(),
            re_z: r.re_z,
            im_z: r.im_z,
            abs_value: r.abs_value,
            envelope_log: r.envelope_log,
            ratio: r.ratio,
            pass: r.pass,
            terms_used: r.terms_used,
            tail_bound: r.tail_bound,
        }
    }
}

/// Writes audit records as CSV with the fixed column order
/// `function,q,l,param_digest,re_z,im_z,abs_value,envelope_log,ratio,pass,terms_used,tail_bound`.
pub fn write_csv<W: Write>(records: &[AuditRecord], out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    if records.is_empty() {
        w.write_record([
            "function", "q", "l", "param_digest", "re_z", "im_z", "abs_value", "envelope_log",
            "ratio", "pass", "terms_used", "tail_bound",
        ])?;
    }
    for r in records {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush()
}

/// Writes audit records as a JSON array.
pub fn write_json<W: Write>(records: &[AuditRecord], mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    writeln!(out)
}

/// Reads rows written by [`write_csv`].
pub fn read_csv<R: io::Read>(input: R) -> csv::Result<Vec<CsvRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

fn emit<T: Serialize>(rows: &[T], format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows)?;
            writeln!(out)
        }
    }
}

fn open_output<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, Failure> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| usage("--out", format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(stdout)),
    }
}

fn io_failure(e: io::Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: format!("write failed: {e}"),
    }
}

#[derive(Serialize)]
struct EvalRow {
    function: FunctionTag,
    z: String,
    re_value: f64,
    im_value: f64,
    abs_value: f64,
    log_abs: f64,
    terms_used: usize,
    tail_bound: f64,
    converged: bool,
}

#[derive(Serialize)]
struct EnvelopeRow {
    function: FunctionTag,
    abs_z: f64,
    log_bound: f64,
    bound: Option<f64>,
    constant_c: f64,
    prefactor_log: f64,
    exponent_term: f64,
}

#[derive(Serialize)]
struct IdentityRow {
    identity: &'static str,
    residual: f64,
}

fn envelope_for(target: &AuditTarget, abs_z: f64, variant: Variant) -> Result<EnvelopeResult, Failure> {
    let bad_variant = || usage("--variant", "not available for this function");
    let env = match (target, variant) {
        (AuditTarget::ConfluentF(p), Variant::Default) => envelope_entire(p, abs_z),
        (AuditTarget::Phi(p), Variant::Default) => envelope_phi(p, abs_z),
        (AuditTarget::Phi(p), Variant::ClosedForm) => envelope_phi_closed_form(p, abs_z),
        (AuditTarget::Aq(q), Variant::Default) => envelope_aq_gaussian(*q, abs_z),
        (AuditTarget::Aq(q), Variant::Exponential) => envelope_aq_exponential(*q, abs_z),
        (AuditTarget::Theta { q, alpha }, Variant::Default) => envelope_theta(*alpha, *q, abs_z),
        (AuditTarget::Theta { q, alpha }, Variant::AsPrinted) => {
            envelope_theta_as_printed(*alpha, *q, abs_z)
        }
        (AuditTarget::Laurent(spec), Variant::Default) => meromorphic_bound_params(spec.alpha, spec.q)
            .and_then(|p| envelope_meromorphic(&p, spec.c_weighted, abs_z)),
        _ => return Err(bad_variant()),
    };
    env.map_err(|e| usage("--abs-z", e))
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(usage("--grid", format!("expected lo:hi:count, got {spec:?}")));
    };
    let lo = lo.parse::<f64>().map_err(|_| usage("--grid", format!("bad lower end {lo:?}")))?;
    let hi = hi.parse::<f64>().map_err(|_| usage("--grid", format!("bad upper end {hi:?}")))?;
    let count = count
        .parse::<usize>()
        .map_err(|_| usage("--grid", format!("bad count {count:?}")))?;
    log_grid(lo, hi, count).map_err(|e| usage("--grid", e))
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(THREADS_ENV, format!("expected a positive integer, got {v:?}"))),
        },
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Eval { mut function, z, output } => {
            // Theta evaluation does not depend on alpha; only its envelope does.
            if matches!(function.function, FunctionKind::Theta) {
                function.alpha.get_or_insert(0.5);
            }
            let target = function.target()?;
            let z = parse_complex(&z).map_err(|e| usage("--z", e))?;
            let v = target.evaluate(z, function.tol).map_err(|e| usage("--z", e))?;
            let value = v.to_complex();
            let row = EvalRow {
                function: target.tag(),
                z: format_complex(z),
                re_value: value.re,
                im_value: value.im,
                abs_value: v.abs(),
                log_abs: v.log_abs(),
                terms_used: v.terms_used,
                tail_bound: v.tail_bound_abs(),
                converged: v.converged,
            };
            let mut out = open_output(&output.out, stdout)?;
            emit(&[row], output.format, &mut out).map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Command::Envelope {
            function,
            abs_z,
            variant,
            output,
        } => {
            let target = function.target()?;
            let env = envelope_for(&target, abs_z, variant)?;
            let row = EnvelopeRow {
                function: target.tag(),
                abs_z,
                log_bound: env.log_bound,
                bound: env.bound,
                constant_c: env.constant_c,
                prefactor_log: env.prefactor_log,
                exponent_term: env.exponent_term,
            };
            let mut out = open_output(&output.out, stdout)?;
            emit(&[row], output.format, &mut out).map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Command::Audit {
            function,
            grid,
            angles,
            slack,
            seed,
            draws,
            output,
        } => {
            check_tol(function.tol)?;
            if angles == 0 {
                return Err(usage("--angles", "must be at least 1"));
            }
            if !(slack >= 0.0) {
                return Err(usage("--slack", format!("{slack} is negative")));
            }
            let plan = SweepPlan {
                abs_z_grid: parse_grid(&grid)?,
                angle_count: angles,
                parameter_draws: draws.unwrap_or(1),
                seed,
                slack,
                tol: function.tol,
            };
            let run = || match draws {
                Some(_) => audit_random(&plan, function.tag()),
                None => function
                    .target()
                    .map_err(|f| Error::InvalidArgument(f.message))
                    .and_then(|t| audit_envelope(&plan, &t)),
            };
            let records = match thread_cap()? {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| usage(THREADS_ENV, e))?
                    .install(run),
                None => run(),
            }
            .map_err(lib_error)?;
            let mut out = open_output(&output.out, stdout)?;
            match output.format {
                Format::Csv => write_csv(&records, &mut out),
                Format::Json => write_json(&records, &mut out),
            }
            .map_err(io_failure)?;
            out.flush().map_err(io_failure)?;
            let summary = AuditSummary::of(&records);
            writeln!(
                stderr,
                "{} records: {} pass, {} violations, {} evaluation errors",
                summary.total, summary.passed, summary.violations, summary.errors
            )
            .map_err(io_failure)?;
            Ok(if summary.all_pass() { EXIT_OK } else { EXIT_VIOLATION })
        }
        Command::Identity {
            identity,
            q,
            z,
            a,
            l,
            tol,
            output,
        } => {
            check_tol(tol)?;
            let q = parse_q(Some(q))?;
            let z = || -> Result<Complex64, Failure> {
                let raw = z.as_deref().ok_or_else(|| usage("--z", "required for this identity"))?;
                parse_complex(raw).map_err(|e| usage("--z", e))
            };
            let (name, residual) = match identity {
                IdentityKind::Euler => ("euler", identity_euler(q, z()?, tol).map_err(|e| usage("--z", e))?),
                IdentityKind::QBinomial => {
                    let a = a.as_deref().ok_or_else(|| usage("--a", "required for q-binomial"))?;
                    let a = parse_complex(a).map_err(|e| usage("--a", e))?;
                    let r = identity_qbinomial_theorem(a, q, z()?, tol).map_err(|e| usage("--z", e))?;
                    ("q_binomial", r)
                }
                IdentityKind::QlSum => {
                    let l = l.ok_or_else(|| usage("--l", "required for ql-sum"))?;
                    ("ql_sum", identity_ql_sum(l, q, tol).map_err(|e| usage("--l", e))?)
                }
                IdentityKind::TripleProduct => {
                    let r = identity_theta_triple_product(q, z()?, tol).map_err(|e| usage("--z", e))?;
                    ("triple_product", r)
                }
            };
            let mut out = open_output(&output.out, stdout)?;
            emit(&[IdentityRow { identity: name, residual }], output.format, &mut out)
                .map_err(io_failure)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the CLI on `args` (including the program name), writing results to
/// `stdout` and diagnostics to `stderr`. Returns the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let first = e.to_string();
            let line = first.lines().next().unwrap_or("usage error").trim_start_matches("error: ");
            let _ = writeln!(stderr, "error: {line}");
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Runs the CLI against the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    run_with(args, &mut out, &mut err)
}
