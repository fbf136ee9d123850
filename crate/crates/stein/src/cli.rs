//! Command-line front end: `ksd`, `experiment`, `check-kernels`, and
//! `diagnose`.
//!
//! Exit codes are a stable contract: 0 success, 1 validation failure
//! (a kernel failing its derivative suite), 2 input error (parse, dimension,
//! config), 3 numeric error (non-finite values, unsettled quadrature,
//! degenerate search). All numeric stdout uses 17 significant digits with a
//! '.' decimal separator regardless of locale.
//!
//! `--target` and `--kernel` accept either inline JSON (anything starting
//! with '{') or a path to a JSON file. Samples are CSV, one point per row:
//! D float columns, optionally followed by a final `weight` column announced
//! in a header row.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::diagnostics::{coercive_linear_diag, integrability_rate_bound};
use crate::discrepancy::{OperatorMode, SteinKernel, WeightedEmpirical};
use crate::experiments::{run_experiment, write_csv, ExperimentConfig};
use crate::kernels::{derivative_report, KernelSpec, WeightFunction};
use crate::targets::{SteinTarget, Target};
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "stein",
    version,
    about = "Kernel Stein discrepancies with moment-controlling kernels"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the kernel Stein discrepancy of a weighted sample file.
    Ksd(KsdArgs),
    /// Run an experiment config and write its result rows as CSV.
    Experiment(ExperimentArgs),
    /// Validate a kernel's derivatives and positive-definiteness.
    CheckKernels(CheckKernelsArgs),
    /// Moment-growth diagnostics for a target and tilt exponent.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct KsdArgs {
    /// Target distribution, inline JSON or a path to a JSON file.
    #[arg(long)]
    target: String,
    /// Kernel spec, inline JSON or a path to a JSON file.
    #[arg(long)]
    kernel: String,
    /// Sample CSV path.
    #[arg(long)]
    sample: PathBuf,
    /// Stein operator driving the discrepancy.
    #[arg(long, default_value = "langevin", value_parser = parse_mode)]
    mode: OperatorMode,
    /// Report the U-statistic (diagonal removed) instead of the V-statistic.
    #[arg(long)]
    u_statistic: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON path.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckKernelsArgs {
    /// Kernel spec, inline JSON or a path to a JSON file.
    #[arg(long)]
    kernel: String,
    /// Dimensions to test in; repeatable.
    #[arg(long = "dim")]
    dims: Vec<usize>,
    /// Random pairs per dimension.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Relative tolerance for the finite-difference comparison.
    #[arg(long, default_value_t = 1e-5)]
    rel_tol: f64,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Target distribution, inline JSON or a path to a JSON file.
    #[arg(long)]
    target: String,
    /// Sample CSV path.
    #[arg(long)]
    sample: PathBuf,
    /// Tilt exponent p of the weight (v² + ‖x‖²)^p.
    #[arg(long)]
    weight_exponent: f64,
    /// Weight offset v.
    #[arg(long, default_value_t = 1.0)]
    weight_offset: f64,
    /// Coercivity rate η for the integrability bound.
    #[arg(long)]
    eta: Option<f64>,
    /// Moment floor ν for the integrability bound.
    #[arg(long)]
    nu: Option<f64>,
    /// Tilt margin θ for the integrability bound.
    #[arg(long)]
    theta: Option<f64>,
    /// Discrepancy level ε for the integrability bound.
    #[arg(long)]
    eps: Option<f64>,
    /// Moment order q for the integrability bound.
    #[arg(long)]
    q: Option<f64>,
    /// Moment budget S; defaults to the printed diagnostic mean.
    #[arg(long)]
    stein_value: Option<f64>,
}

fn parse_mode(raw: &str) -> std::result::Result<OperatorMode, String> {
    match raw {
        "langevin" => Ok(OperatorMode::Langevin),
        "diffusion" => Ok(OperatorMode::DiffusionScalar),
        other => Err(format!("unknown mode '{other}', expected langevin|diffusion")),
    }
}

/// Parses CLI arguments from the process environment, applies STEIN_THREADS,
/// and dispatches. The return value is the process exit code.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// STEIN_THREADS picks the rayon pool size; 0 or unset means automatic.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("STEIN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Error::Config(format!("STEIN_THREADS must be a nonnegative integer, got '{raw}'"))
    })?;
    if n == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Ksd(args) => {
            cmd_ksd(&args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment(args) => {
            cmd_experiment(&args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckKernels(args) => {
            let pass = cmd_check_kernels(&args)?;
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Diagnose(args) => {
            cmd_diagnose(&args)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::NonFinite { .. } | Error::QuadratureUnsettled { .. } | Error::DegenerateSearch => 3,
        _ => 2,
    }
}

fn cmd_ksd(args: &KsdArgs) -> Result<()> {
    let target: Target = parse_json_or_file(&args.target)?;
    target.validate()?;
    let kernel: KernelSpec = parse_json_or_file(&args.kernel)?;
    kernel.validate()?;
    let sample = read_sample_csv(&args.sample, Some(target.dim()))?;
    let sk = SteinKernel::new(&target, &kernel, args.mode)?;
    let ksd_sq = if args.u_statistic {
        sk.ksd_squared_u(&sample)?
    } else {
        sk.ksd_squared(&sample)?
    };
    println!(
        "ksd={} ksd_squared_raw={}",
        sci(ksd_sq.max(0.0).sqrt()),
        sci(ksd_sq)
    );
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let rows = run_experiment(&cfg)?;
    write_csv(&args.out, &rows)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_check_kernels(args: &CheckKernelsArgs) -> Result<bool> {
    let kernel: KernelSpec = parse_json_or_file(&args.kernel)?;
    kernel.validate()?;
    let dims: Vec<usize> = if args.dims.is_empty() {
        vec![1, 2, 5]
    } else {
        args.dims.clone()
    };
    let report = derivative_report(&kernel, &dims, args.trials, 0xC0FFEE)?;
    let pass = report.grad_x_max_rel <= args.rel_tol
        && report.grad_y_max_rel <= args.rel_tol
        && report.cross_trace_max_rel <= args.rel_tol
        && report.min_gram_eigenvalue >= -1e-8;
    println!(
        "grad_x_max_rel={} grad_y_max_rel={} cross_trace_max_rel={}",
        sci(report.grad_x_max_rel),
        sci(report.grad_y_max_rel),
        sci(report.cross_trace_max_rel)
    );
    println!(
        "min_gram_eigenvalue={} pairs_checked={}",
        sci(report.min_gram_eigenvalue),
        report.pairs_checked
    );
    println!("{}", if pass { "pass" } else { "FAIL" });
    Ok(pass)
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<()> {
    let target: Target = parse_json_or_file(&args.target)?;
    target.validate()?;
    let weight = WeightFunction::new(args.weight_offset, args.weight_exponent)?;
    if let Some(limit) = target.tilt_exponent_limit() {
        if weight.p >= limit {
            eprintln!(
                "warning: weight exponent p={} reaches the admissibility limit {limit} \
                 for this target; the coercivity lemma no longer applies",
                weight.p
            );
        }
    }
    let sample = read_sample_csv(&args.sample, Some(target.dim()))?;
    let mut mean = 0.0;
    for i in 0..sample.len() {
        mean += sample.weights()[i] * coercive_linear_diag(&target, &weight, sample.point(i))?;
    }
    println!("coercive_linear_diag_mean={}", sci(mean));

    if let (Some(eta), Some(nu), Some(theta), Some(eps), Some(q)) =
        (args.eta, args.nu, args.theta, args.eps, args.q)
    {
        let s_cap = args.stein_value.unwrap_or(mean);
        let bound = integrability_rate_bound(s_cap, nu, eta, eps, q, theta)?;
        println!("integrability_rate_bound={}", sci(bound));
    }
    Ok(())
}

/// 17 significant digits, enough to round-trip any f64.
fn sci(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_json_or_file<T: DeserializeOwned>(raw: &str) -> Result<T> {
    let owned;
    let text = if raw.trim_start().starts_with('{') {
        raw
    } else {
        owned = std::fs::read_to_string(raw)?;
        &owned
    };
    Ok(serde_json::from_str(text)?)
}

/// Reads a sample CSV: one point per row, D float columns, and optionally a
/// trailing `weight` column that must be announced in a header row. A first
/// row that fails to parse as floats is taken to be that header. Weights are
/// renormalized when their sum is within [0.99, 1.01] and rejected otherwise;
/// absent weights mean uniform 1/N.
pub fn read_sample_csv(path: &Path, expected_dim: Option<usize>) -> Result<WeightedEmpirical> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();

    let Some(first) = lines.peek() else {
        return Err(Error::EmptySample);
    };
    let first_fields: Vec<&str> = first.split(',').map(str::trim).collect();
    let header = first_fields.iter().any(|f| f.parse::<f64>().is_err());
    let has_weight = header
        && first_fields
            .last()
            .is_some_and(|f| f.eq_ignore_ascii_case("weight"));
    let columns = first_fields.len();
    if header {
        lines.next();
    }

    let dim = columns - usize::from(has_weight);
    if dim == 0 {
        return Err(Error::SampleFormat("no coordinate columns".into()));
    }
    if let Some(expected) = expected_dim {
        if dim != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: dim,
            });
        }
    }

    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns {
            return Err(Error::SampleFormat(format!(
                "row {} has {} fields, expected {columns}",
                lineno + 1,
                fields.len()
            )));
        }
        for (col, field) in fields.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                Error::SampleFormat(format!("row {}, column {}: '{field}' is not a number",
                    lineno + 1, col + 1))
            })?;
            if col < dim {
                points.push(value);
            } else {
                weights.push(value);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    if has_weight {
        WeightedEmpirical::renormalized(points, weights, dim)
    } else {
        WeightedEmpirical::from_points(points, dim)
    }
}
