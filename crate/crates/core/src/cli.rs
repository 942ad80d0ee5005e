//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 non-convergence,
//! 3 divergence of a plain maximum likelihood fit (separated data).
//!
//! Data files have a header row with a response column `y`, an optional
//! totals column `m` (all ones when absent) and covariate columns; an
//! intercept is always included. Contest files have `winner,loser` columns.

use crate::design::{self, Dataset};
use crate::enumerate::{enumerate_saturated, EnumerationTable};
use crate::error::Error;
use crate::infer::{self, WaldSummary};
use crate::link::LinkFamily;
use crate::mle::{fit_ml, FitConfig, FitResult, InnerPolicy};
use crate::mpl::fit_mpl;
use crate::path::{default_grid, fit_path_from, log_grid, PathResult};
use crate::separation::{detect_separation, SeparationReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "jeffreys-glm", version, about = "Binomial GLMs by maximum likelihood and Jeffreys-prior penalized likelihood")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and report estimates with Wald intervals.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        opts: FitOpts,
    },
    /// Penalized fits over a grid of penalty exponents.
    Path(PathArgs),
    /// Classify data as completely separated, quasi-completely separated or overlapping.
    DetectSeparation {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        out: OutputFormat,
    },
    /// Enumerate the two-observation saturated model.
    Enumerate {
        #[arg(long, default_value_t = LinkFamily::Logit)]
        link: LinkFamily,
        #[arg(long, default_value_t = 9)]
        m1: u32,
        #[arg(long, default_value_t = 9)]
        m2: u32,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        out: OutputFormat,
    },
    /// Fit a Bradley-Terry model to decided contests.
    BtFit {
        #[arg(long)]
        contests: PathBuf,
        /// Team whose ability is fixed at zero.
        #[arg(long)]
        reference: String,
        #[command(flatten)]
        opts: FitOpts,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InnerArg {
    Full,
    Step,
}

#[derive(Debug, Args)]
pub struct SolverOpts {
    #[arg(long, default_value_t = LinkFamily::Logit)]
    pub link: LinkFamily,
    /// Convergence threshold on the max-abs score.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Starting values, separated by commas or whitespace.
    #[arg(long)]
    pub start_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InnerArg::Step)]
    pub inner: InnerArg,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub out: OutputFormat,
}

#[derive(Debug, Args)]
pub struct FitOpts {
    /// Penalty exponent; 0 gives maximum likelihood.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    /// Confidence level of the Wald intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[command(flatten)]
    pub solver: SolverOpts,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated ascending penalty exponents.
    #[arg(long, conflicts_with = "grid_log")]
    pub grid: Option<String>,
    /// `lo:hi:k`, k log-spaced exponents from lo to hi.
    #[arg(long)]
    pub grid_log: Option<String>,
    #[command(flatten)]
    pub solver: SolverOpts,
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: i32, stderr: String) -> Self {
        Outcome { code, stdout: String::new(), stderr }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
            Error::Diverged { .. } => EXIT_DIVERGED,
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, message: message.into() }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::fail(EXIT_INVALID, text)
            } else {
                Outcome::ok(text)
            };
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => outcome,
        Err(f) => Outcome::fail(f.code, format!("error: {}\n", f.message)),
    }
}

fn dispatch(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Fit { data, opts } => {
            let dataset = design::load_csv_conventional(&data, true)?;
            run_fit(&dataset, &opts)
        }
        Command::BtFit { contests, reference, opts } => {
            let records = design::load_contests_csv(&contests)?;
            let dataset = design::bt_design(&records, &reference)?;
            run_fit(&dataset, &opts)
        }
        Command::Path(args) => run_path(&args),
        Command::DetectSeparation { data, out } => {
            let dataset = design::load_csv_conventional(&data, true)?;
            let report = detect_separation(&dataset)?;
            Ok(Outcome::ok(match out {
                OutputFormat::Json => to_json(&report)?,
                OutputFormat::Csv => separation_csv(&report)?,
            }))
        }
        Command::Enumerate { link, m1, m2, a, out } => {
            let table = enumerate_saturated(link, m1, m2, a)?;
            Ok(Outcome::ok(match out {
                OutputFormat::Json => to_json(&table)?,
                OutputFormat::Csv => enumeration_csv(&table)?,
            }))
        }
    }
}

fn config(opts: &SolverOpts) -> Result<FitConfig, Failure> {
    let config = FitConfig {
        max_iter: opts.max_iter,
        grad_tol: opts.tol,
        inner: match opts.inner {
            InnerArg::Full => InnerPolicy::FullInnerMl,
            InnerArg::Step => InnerPolicy::SingleIrlsStep,
        },
        ..FitConfig::default()
    };
    config.validate()?;
    Ok(config)
}

/// Reads numbers separated by commas and/or whitespace.
pub fn read_start_file(path: &Path, p: usize) -> crate::error::Result<DVector<f64>> {
    let text = std::fs::read_to_string(path)?;
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Invalid(format!("start file: `{t}` is not a finite number")))
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    if values.len() != p {
        return Err(Error::Invalid(format!(
            "start file holds {} values, model has {p} coefficients",
            values.len()
        )));
    }
    Ok(DVector::from_vec(values))
}

fn start(opts: &SolverOpts, data: &Dataset) -> Result<Option<DVector<f64>>, Failure> {
    Ok(match &opts.start_file {
        Some(path) => Some(read_start_file(path, data.p())?),
        None => None,
    })
}

#[derive(Debug, Serialize)]
struct FitReport {
    link: LinkFamily,
    a: f64,
    coef_names: Vec<String>,
    estimates: Vec<f64>,
    /// Absent when the estimates diverged.
    #[serde(skip_serializing_if = "Option::is_none")]
    wald: Option<WaldSummary>,
    vcov: Vec<Vec<f64>>,
    loglik: f64,
    logdet: f64,
    penalized_loglik: f64,
    converged: bool,
    diverged: bool,
    iterations: usize,
    final_grad_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    separation: Option<SeparationReport>,
}

fn run_fit(data: &Dataset, opts: &FitOpts) -> Result<Outcome, Failure> {
    if !(opts.a >= 0.0 && opts.a.is_finite()) {
        return Err(invalid(format!("--a must be nonnegative, got {}", opts.a)));
    }
    infer::critical_value(opts.level)?;
    let cfg = config(&opts.solver)?;
    let start = start(&opts.solver, data)?;
    let fit = if opts.a == 0.0 {
        fit_ml(data, opts.solver.link, &cfg, start.as_ref())?
    } else {
        fit_mpl(data, opts.solver.link, opts.a, &cfg, start.as_ref())?
    };

    let separation = if fit.diverged { detect_separation(data).ok() } else { None };
    let report = FitReport {
        link: fit.link,
        a: fit.a,
        coef_names: fit.coef_names.clone(),
        estimates: fit.beta.as_slice().to_vec(),
        wald: if fit.converged { Some(infer::wald(&fit, opts.level)?) } else { None },
        vcov: fit.vcov.row_iter().map(|r| r.iter().copied().collect()).collect(),
        loglik: fit.loglik,
        logdet: fit.logdet,
        penalized_loglik: fit.penalized_loglik(),
        converged: fit.converged,
        diverged: fit.diverged,
        iterations: fit.iterations,
        final_grad_norm: fit.final_grad_norm,
        separation,
    };
    let stdout = match opts.solver.out {
        OutputFormat::Json => to_json(&report)?,
        OutputFormat::Csv => fit_csv(&fit, report.wald.as_ref())?,
    };

    let (code, stderr) = if fit.diverged {
        (EXIT_DIVERGED, divergence_message(&fit, report.separation.as_ref()))
    } else if !fit.converged {
        let e = Error::NotConverged { iterations: fit.iterations, grad_norm: fit.final_grad_norm };
        (EXIT_NOT_CONVERGED, format!("error: {e}\n"))
    } else {
        (EXIT_OK, String::new())
    };
    Ok(Outcome { code, stdout, stderr })
}

fn divergence_message(fit: &FitResult, sep: Option<&SeparationReport>) -> String {
    let mut msg = format!("error: {}\n", Error::Diverged { iterations: fit.iterations });
    match sep {
        Some(r) if r.is_separated() => {
            msg += &format!(
                "hint: the data are {} separated; some maximum likelihood estimates are infinite. \
                 A penalized fit (--a 0.5) has finite estimates.\n",
                match r.status {
                    crate::separation::SeparationStatus::Complete => "completely",
                    _ => "quasi-completely",
                }
            );
            if !r.separated_observations.is_empty() {
                let rows: Vec<String> =
                    r.separated_observations.iter().map(|i| (i + 1).to_string()).collect();
                msg += &format!("hint: separated rows: {}\n", rows.join(", "));
            }
        }
        _ => msg += "hint: check the data for separation with `detect-separation`.\n",
    }
    msg
}

fn parse_grid(args: &PathArgs) -> Result<Vec<f64>, Failure> {
    if let Some(list) = &args.grid {
        return list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("--grid: `{}` is not a number", t.trim())))
            })
            .collect();
    }
    if let Some(text) = &args.grid_log {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || invalid(format!("--grid-log expects lo:hi:k, got `{text}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
        let hi = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
        let k = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
        return Ok(log_grid(lo, hi, k)?);
    }
    Ok(default_grid())
}

fn run_path(args: &PathArgs) -> Result<Outcome, Failure> {
    let data = design::load_csv_conventional(&args.data, true)?;
    let grid = parse_grid(args)?;
    let cfg = config(&args.solver)?;
    let start = start(&args.solver, &data)?;
    let path = fit_path_from(&data, args.solver.link, &grid, &cfg, start.as_ref())?;
    let stdout = match args.solver.out {
        OutputFormat::Json => to_json(&path)?,
        OutputFormat::Csv => path_csv(&path)?,
    };
    let failed: Vec<String> = path
        .points
        .iter()
        .filter(|p| !p.converged)
        .map(|p| num(p.a))
        .collect();
    if failed.is_empty() {
        Ok(Outcome::ok(stdout))
    } else {
        Ok(Outcome {
            code: EXIT_NOT_CONVERGED,
            stdout,
            stderr: format!("error: fits did not converge at a = {}\n", failed.join(", ")),
        })
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_csv(header: &[String], rows: Vec<Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_failure = |e: csv::Error| Failure::from(Error::from(e));
    w.write_record(header).map_err(to_failure)?;
    for r in rows {
        w.write_record(&r).map_err(to_failure)?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))
}

/// Shortest round-trip form, in scientific notation outside `[1e-4, 1e15)`.
fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn fit_csv(fit: &FitResult, wald: Option<&WaldSummary>) -> Result<String, Failure> {
    let header = strings(&[
        "term", "estimate", "std_error", "lower", "upper", "logdet", "gen_variance",
        "converged", "diverged", "iterations", "final_grad_norm",
    ]);
    let na = || String::from("NA");
    let rows = (0..fit.beta.len())
        .map(|j| {
            vec![
                fit.coef_names[j].clone(),
                num(fit.beta[j]),
                wald.map_or_else(na, |w| num(w.std_errors[j])),
                wald.map_or_else(na, |w| num(w.lower[j])),
                wald.map_or_else(na, |w| num(w.upper[j])),
                num(fit.logdet),
                wald.map_or_else(na, |w| num(w.gen_variance)),
                fit.converged.to_string(),
                fit.diverged.to_string(),
                fit.iterations.to_string(),
                num(fit.final_grad_norm),
            ]
        })
        .collect();
    write_csv(&header, rows)
}

fn path_csv(path: &PathResult) -> Result<String, Failure> {
    let mut header = strings(&["a", "converged", "iterations", "logdet"]);
    header.extend(path.coef_names.iter().cloned());
    let rows = path
        .points
        .iter()
        .map(|p| {
            let mut r = vec![
                num(p.a),
                p.converged.to_string(),
                p.iterations.to_string(),
                num(p.logdet),
            ];
            r.extend(p.beta.iter().map(|v| num(*v)));
            r
        })
        .collect();
    write_csv(&header, rows)
}

fn separation_csv(report: &SeparationReport) -> Result<String, Failure> {
    let gamma = report.gamma.as_ref().map_or(String::new(), |g| {
        g.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ")
    });
    let rows: Vec<String> =
        report.separated_observations.iter().map(|i| (i + 1).to_string()).collect();
    write_csv(
        &strings(&["status", "gamma", "separated_rows"]),
        vec![vec![report.status.to_string(), gamma, rows.join(" ")]],
    )
}

fn enumeration_csv(table: &EnumerationTable) -> Result<String, Failure> {
    let header = strings(&[
        "y1", "y2", "pi_ml1", "pi_ml2", "ml_limit1", "ml_limit2", "pi_mpl1", "pi_mpl2",
        "logdet_ml", "logdet_mpl",
    ]);
    let limit = |l: crate::enumerate::MlLimit| {
        serde_json::to_value(l).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
    };
    let rows = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.y1.to_string(),
                r.y2.to_string(),
                num(r.pi_ml[0]),
                num(r.pi_ml[1]),
                limit(r.ml_limit[0]),
                limit(r.ml_limit[1]),
                num(r.pi_mpl[0]),
                num(r.pi_mpl[1]),
                num(r.logdet_ml),
                num(r.logdet_mpl),
            ]
        })
        .collect();
    write_csv(&header, rows)
}
