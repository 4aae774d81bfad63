//! The `fracop` command line.
//!
//! Exit codes: 0 success, 2 refusal (a hypothesis or precondition failed),
//! 1 internal error, 64 usage error.

use std::ffi::OsString;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use fracop_core::cesaro::{cesaro_number, cesaro_sequence, CesaroParams};
use fracop_core::fracdiff::{frac_diff_with, summable_limit, ConvergenceReport, FracDiffOptions, Method, Status, SumMethod};
use fracop_core::model::{build_model, counterexample_gap};
use fracop_core::operator::{certify_a_contraction, certify_a_isometry, FiniteOperator, Subject, Verdict};
use fracop_core::series::CoefficientSeries;
use fracop_core::shifts::{classify_shift, truncate, ShiftSpec};
use fracop_core::similarity::verify_similarity;
use fracop_core::Error;

use crate::input::{parse_direction, parse_sequence, parse_series};
use crate::matrix_io::{read_operator, write_operator};
use crate::record::{Format, Record, RecordWriter};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_REFUSAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "fracop", version, about = "Fractional differences, shifts and operator certificates", args_override_self = true)]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Term cap for series evaluation.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub budget: u64,
    /// Seed for random probe vectors.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
    /// Write records to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Clone, Args)]
pub struct SubjectArgs {
    /// Operator in the plain-text matrix format.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Shift direction (forward or backward), truncated to --dim.
    #[arg(long)]
    pub shift: Option<String>,
    /// Shift weight.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Cesàro number k^a(n).
    Cesaro {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long)]
        n: u64,
    },
    /// (1 - ∇)^a Λ_n.
    Fracdiff {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long)]
        n: u64,
        /// Sequence descriptor, e.g. geom:1,0.5 or shift:forward,2.5,0.
        #[arg(long)]
        seq: String,
        /// direct, abel or cesaro:TAU.
        #[arg(long, default_value = "direct")]
        method: String,
    },
    /// (C, τ) limit of a sequence of partial sums.
    Summability {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        seq: String,
    },
    /// Sign of (1 - t)^a (S*, S) for a weighted shift.
    ShiftClassify {
        #[arg(long)]
        dir: String,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        a: f64,
    },
    /// a-contraction certificate.
    Certify {
        #[command(flatten)]
        subject: SubjectArgs,
        #[arg(long)]
        a: f64,
    },
    /// a-isometry certificate from orbit polynomials.
    Isometry {
        #[command(flatten)]
        subject: SubjectArgs,
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
    },
    /// Model embedding for 0 < a < 1.
    Model {
        #[command(flatten)]
        subject: SubjectArgs,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Growth obstruction for forward shifts.
    Gap {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 1 << 14)]
        n_max: u64,
    },
    /// Similarity certificate.
    Similarity {
        #[command(flatten)]
        subject: SubjectArgs,
        /// α = (1 - t)^a.
        #[arg(long, conflicts_with = "alpha")]
        a: Option<f64>,
        /// α as polynomial coefficients c0,c1,...
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        gamma_tilde: String,
        #[arg(long, allow_hyphen_values = true)]
        g: Option<String>,
        /// Write B and T to PREFIX.b.txt and PREFIX.t.txt.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
    },
    /// Runs one command per input line in parallel; output keeps input order.
    Sweep {
        /// File of command lines; stdin when absent.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Refusal(String),
    Internal(String),
    Usage(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Refusal(_) => EXIT_REFUSAL,
            Failure::Internal(_) => EXIT_INTERNAL,
            Failure::Usage(_) => EXIT_USAGE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Refusal(m) | Failure::Internal(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistency(_) => Failure::Internal(e.to_string()),
            _ => Failure::Refusal(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn method_name(m: Method) -> String {
    match m {
        Method::Direct => "direct".into(),
        Method::Extrapolated => "extrapolated".into(),
        Method::Abel => "abel".into(),
        Method::Cesaro(t) => format!("cesaro:{t}"),
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::Summable => "summable",
        Status::Failed => "failed",
    }
}

fn with_report(rec: Record, r: &ConvergenceReport) -> Record {
    rec.push("value", r.value)
        .push("method", method_name(r.method))
        .push("terms_used", r.terms_used)
        .push("tail_bound", r.tail_bound)
        .push("status", status_name(r.status))
        .push("certified", r.certified)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::CertifiedNonneg => "certified_nonneg",
        Verdict::CertifiedNegative => "certified_negative",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn series_inline(f: &CoefficientSeries) -> String {
    const SHOWN: usize = 16;
    let mut parts: Vec<String> = f.coeffs().iter().take(SHOWN).map(|v| crate::matrix_io::fmt_f64(*v)).collect();
    if f.len() > SHOWN || !f.is_finite() {
        parts.push("...".into());
    }
    parts.join(";")
}

fn shift_of(subject: &SubjectArgs) -> Result<Option<ShiftSpec>, Failure> {
    match (&subject.shift, subject.s) {
        (Some(dir), Some(s)) => {
            let d = parse_direction(dir).map_err(usage)?;
            Ok(Some(ShiftSpec::new(d, s)?))
        }
        (None, None) => Ok(None),
        _ => Err(usage("--shift and --s go together")),
    }
}

fn operator_of(subject: &SubjectArgs) -> Result<FiniteOperator, Failure> {
    match (&subject.matrix, shift_of(subject)?) {
        (Some(_), Some(_)) => Err(usage("give either --matrix or --shift, not both")),
        (Some(path), None) => read_operator(path).map_err(|e| match e {
            crate::matrix_io::MatrixError::Core(c) => c.into(),
            other => usage(format!("{}: {other}", path.display())),
        }),
        (None, Some(shift)) => {
            let dim = subject.dim.ok_or_else(|| usage("--shift needs --dim"))?;
            Ok(truncate(shift, dim))
        }
        (None, None) => Err(usage("an operator is required: --matrix FILE or --shift DIR --s S --dim D")),
    }
}

/// Runs one parsed command and returns its records.
pub fn execute(cli: &Cli) -> Result<Vec<Record>, Failure> {
    if !(cli.tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    if cli.budget == 0 {
        return Err(usage("--budget must be at least 1"));
    }
    let tol = cli.tol;
    let rec = match &cli.cmd {
        Cmd::Cesaro { a, n } => {
            let v = cesaro_number(*a, *n)?;
            Record::new().push("a", *a).push("n", *n).push("value", v).headline("value")
        }
        Cmd::Fracdiff { a, n, seq, method } => {
            let seq = parse_sequence(seq).map_err(usage)?;
            let method = match method.as_str() {
                "direct" => SumMethod::Direct,
                "abel" => SumMethod::Abel,
                m => match m.strip_prefix("cesaro:").map(str::parse::<f64>) {
                    Some(Ok(t)) => SumMethod::Cesaro(t),
                    _ => return Err(usage(format!("unknown method {m:?}"))),
                },
            };
            let opts = FracDiffOptions::new(tol).budget(cli.budget).method(method);
            let r = frac_diff_with(*a, &seq, *n, &opts)?;
            with_report(Record::new().push("a", *a).push("n", *n), &r)
        }
        Cmd::Summability { tau, seq } => {
            let seq = parse_sequence(seq).map_err(usage)?;
            let r = summable_limit(*tau, &seq, tol, cli.budget)?;
            with_report(Record::new().push("tau", *tau), &r)
        }
        Cmd::ShiftClassify { dir, s, a } => {
            let shift = ShiftSpec::new(parse_direction(dir).map_err(usage)?, *s)?;
            let c = classify_shift(shift, *a)?;
            let cross = match &c.cross_check {
                Some(x) if x.consistent => "consistent",
                Some(_) => "inconsistent",
                None => "none",
            };
            Record::new()
                .push("dir", dir.as_str())
                .push("s", *s)
                .push("a", *a)
                .push("verdict", c.verdict.as_str())
                .push("cross_check", cross)
                .headline("verdict")
        }
        Cmd::Certify { subject, a } => {
            let t = operator_of(subject)?;
            let r = certify_a_contraction(&t, *a, tol);
            if let Some(reason) = &r.reason {
                if r.verdict == Verdict::Inconclusive {
                    return Err(Failure::Refusal(reason.clone()));
                }
            }
            Record::new()
                .push("a", *a)
                .push("dim", t.dim())
                .push("min_eigenvalue", r.min_eigenvalue)
                .push("truncation_terms", r.truncation_terms)
                .push("truncation_bound", r.truncation_bound)
                .push("verdict", verdict_name(r.verdict))
        }
        Cmd::Isometry { subject, a, horizon } => {
            let (r, dim) = match (shift_of(subject)?, subject.dim) {
                (Some(shift), None) => (certify_a_isometry(Subject::Shift(shift), *a, *horizon, tol, cli.seed.unwrap_or(0))?, 0),
                _ => {
                    let seed = cli.seed.ok_or_else(|| usage("isometry on a matrix needs --seed"))?;
                    let t = operator_of(subject)?;
                    (certify_a_isometry(Subject::Matrix(&t), *a, *horizon, tol, seed)?, t.dim())
                }
            };
            Record::new()
                .push("a", *a)
                .push("dim", dim)
                .push("m", r.m)
                .push("probes", r.probes)
                .push("polynomial", r.polynomial)
                .push("difference_vanishes", r.difference_vanishes)
                .push("max_residual", r.max_residual)
                .push("max_difference", r.max_difference)
                .push("is_isometry", r.is_isometry)
        }
        Cmd::Model { subject, a, depth } => {
            let t = operator_of(subject)?;
            let r = build_model(&t, *a, *depth, tol)?;
            Record::new()
                .push("a", *a)
                .push("dim", t.dim())
                .push("depth", r.depth)
                .push("defect_rank", r.defect_rank)
                .push("quotient_dim", r.quotient_dim)
                .push("isometry_defect", r.isometry_defect)
                .push("intertwining_residual", r.intertwining_residual)
                .push("norm_identity_residual", r.norm_identity_residual)
                .push("quotient_min", r.quotient_min)
                .push("s_isometry_defect", r.s_isometry_defect)
                .push("depth_tail", r.depth_tail)
        }
        Cmd::Gap { a, s, n_max } => {
            let r = counterexample_gap(*a, *s, *n_max)?;
            Record::new()
                .push("a", *a)
                .push("s", *s)
                .push("m", r.m)
                .push("growth_exponent", r.shift_growth_exponent)
                .push("model_cap", r.model_growth_cap)
                .push("separated", r.separated)
                .push("verdict", r.verdict.as_str())
        }
        Cmd::Similarity { subject, a, alpha, gamma_tilde, g, matrix_out } => {
            let t_hat = operator_of(subject)?;
            let alpha = match (a, alpha) {
                (Some(a), None) => cesaro_sequence(CesaroParams::new(-a, 1 << 12)?),
                (None, Some(c)) => parse_series(c).map_err(usage)?,
                _ => return Err(usage("give exactly one of --a or --alpha")),
            };
            let gamma_tilde = parse_series(gamma_tilde).map_err(usage)?;
            let g = g.as_deref().map(parse_series).transpose().map_err(usage)?;
            let cert = verify_similarity(&t_hat, &alpha, &gamma_tilde, g.as_ref(), tol)?;
            let (b_file, t_file) = match matrix_out {
                Some(prefix) => {
                    let b = prefix.with_extension("b.txt");
                    let t = prefix.with_extension("t.txt");
                    write_operator(&b, &cert.b).map_err(|e| Failure::Internal(e.to_string()))?;
                    write_operator(&t, cert.t.matrix()).map_err(|e| Failure::Internal(e.to_string()))?;
                    (b.display().to_string(), t.display().to_string())
                }
                None => (String::new(), String::new()),
            };
            Record::new()
                .push("g", cert.g_label.as_str())
                .push("g_coeffs", series_inline(&cert.g))
                .push("h_coeffs", series_inline(&cert.h))
                .push("epsilon", cert.epsilon)
                .push("alpha_min_eig", cert.alpha_min_eig)
                .push("gamma_min_eig", cert.gamma_min_eig)
                .push("identity_residual", cert.identity_residual)
                .push("reconstruction_error", cert.reconstruction_error)
                .push("tail_certified", cert.tail_certified)
                .push("b_file", b_file)
                .push("t_file", t_file)
        }
        Cmd::Sweep { .. } => return Err(usage("sweep cannot be nested")),
    };
    Ok(vec![rec])
}

fn global_prefix(cli: &Cli) -> Vec<String> {
    let mut v = vec![
        "fracop".to_string(),
        "--tol".into(),
        format!("{:e}", cli.tol),
        "--budget".into(),
        cli.budget.to_string(),
    ];
    if let Some(seed) = cli.seed {
        v.push("--seed".into());
        v.push(seed.to_string());
    }
    v
}

/// Runs every command line in parallel and returns results in input order,
/// each record prefixed with its line number.
pub fn sweep(cli: &Cli, text: &str) -> Vec<(usize, Result<Vec<Record>, Failure>)> {
    let prefix = global_prefix(cli);
    let jobs: Vec<(usize, Vec<String>)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| (i + 1, prefix.iter().cloned().chain(l.split_whitespace().map(String::from)).collect()))
        .collect();
    jobs.par_iter()
        .map(|(line, argv)| {
            let result = match Cli::try_parse_from(argv) {
                Ok(sub) => execute(&sub),
                Err(e) => Err(usage(e.to_string().lines().next().unwrap_or("").to_string())),
            };
            let result = result.map(|recs| {
                recs.into_iter()
                    .map(|r| {
                        let mut columns = vec![("line", (*line).into())];
                        columns.extend(r.columns);
                        Record { columns, headline: None }
                    })
                    .collect()
            });
            (*line, result)
        })
        .collect()
}

fn emit(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let mut writer = RecordWriter::new(out, cli.format);
    let code = match &cli.cmd {
        Cmd::Sweep { file } => {
            let text = match file {
                Some(p) => std::fs::read_to_string(p)?,
                None => {
                    let mut s = String::new();
                    io::stdin().read_to_string(&mut s)?;
                    s
                }
            };
            let mut code = EXIT_OK;
            for (line, result) in sweep(cli, &text) {
                match result {
                    Ok(recs) => {
                        for r in &recs {
                            writer.write(r)?;
                        }
                    }
                    Err(f) => {
                        writeln!(err, "line {line}: {}", f.message())?;
                        code = worst(code, f.code());
                    }
                }
            }
            code
        }
        _ => match execute(cli) {
            Ok(recs) => {
                for r in &recs {
                    writer.write(r)?;
                }
                EXIT_OK
            }
            Err(f) => {
                writeln!(err, "fracop: {}", f.message())?;
                f.code()
            }
        },
    };
    writer.flush()?;
    Ok(code)
}

fn worst(a: i32, b: i32) -> i32 {
    let rank = |c: i32| match c {
        EXIT_USAGE => 3,
        EXIT_INTERNAL => 2,
        EXIT_REFUSAL => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

/// Parses `args` and runs the command, writing records to `out` (or `--out`).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{e}");
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { EXIT_USAGE } else { EXIT_OK }
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
            return code;
        }
    };
    let result = match &cli.out {
        Some(path) => match std::fs::File::create(path) {
            Ok(f) => {
                let mut buf = io::BufWriter::new(f);
                emit(&cli, &mut buf, err)
            }
            Err(e) => Err(e),
        },
        None => emit(&cli, out, err),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "fracop: {e}");
        EXIT_INTERNAL
    })
}

pub fn run_main(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    run(args, &mut out, &mut err)
}
