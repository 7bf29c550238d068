//! Command-line front end.
//!
//! Data goes to stdout as JSON lines or CSV, diagnostics to stderr. Exit
//! codes: 0 success, 1 failed verification, 2 invalid input or domain
//! error, 3 numerical failure.

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::anglesums::AngleSumError;
use crate::geomc::{self, GeomError, McConfig};
use crate::quad::{EvalResult, QuadratureConfig};
use crate::sylvester::{self, Distribution, Family, Method, Registry, SylvesterError};
use crate::verify::{self, Status, Suite, VerifyOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_DOMAIN: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sylvester",
    version,
    about = "Simplex probabilities for Gaussian, beta and beta-prime point clouds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate p_d for one distribution (one record per --beta).
    Compute(ComputeArgs),
    /// Monte Carlo estimate of p_d.
    Mc(McArgs),
    /// Evaluate p_d on an equally spaced beta grid (CSV).
    Sweep(SweepArgs),
    /// Cross-check quadrature, closed forms and Monte Carlo.
    Verify(VerifyArgs),
    /// Print a table of known closed forms.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gauss,
    Beta,
    Betaprime,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gauss => Family::Gaussian,
            FamilyArg::Beta => Family::Beta,
            FamilyArg::Betaprime => Family::BetaPrime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Quadrature,
    ClosedForm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Quadrature => Method::Quadrature,
            MethodArg::ClosedForm => Method::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long = "dim", value_name = "D")]
    pub dim: u32,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Shape parameter; repeat for several queries.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Relative tolerance (absolute tolerance is 1e-3 of it).
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, env = "SYLVESTER_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepFamily {
    Beta,
    Betaprime,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: SweepFamily,
    #[arg(long = "dim", value_name = "D")]
    pub dim: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_max: f64,
    #[arg(long)]
    pub steps: u32,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Basic,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Basic)]
    pub suite: SuiteArg,
    #[arg(long, env = "SYLVESTER_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Fault injection for tests: shifts the registry value for
    /// `family:d[:beta]` by 1e-3.
    #[arg(long, hide = true)]
    pub corrupt_registry: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Gauss,
    Arcsine,
    Semispherical,
    BetaprimeSpecial,
    Kingman,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub preset: Preset,
}

/// One result line. Deterministic routes fill `abs_error`, Monte Carlo
/// fills `stderr`, `trials` and `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub family: String,
    pub d: u32,
    pub beta: Option<f64>,
    pub method: String,
    pub value: f64,
    pub abs_error: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl OutputRecord {
    pub fn deterministic(dist: &Distribution, result: &EvalResult) -> Self {
        Self {
            family: dist.family.to_string(),
            d: dist.d,
            beta: dist.beta,
            method: result.method.as_str().to_string(),
            value: result.value,
            abs_error: Some(result.abs_error_estimate),
            stderr: None,
            trials: None,
            seed: None,
        }
    }

    pub fn monte_carlo(dist: &Distribution, result: &geomc::McResult) -> Self {
        Self {
            family: dist.family.to_string(),
            d: dist.d,
            beta: dist.beta,
            method: "monte_carlo".to_string(),
            value: result.estimate,
            abs_error: None,
            stderr: Some(result.stderr),
            trials: Some(result.trials),
            seed: Some(result.seed),
        }
    }
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }
}

impl From<SylvesterError> for Failure {
    fn from(e: SylvesterError) -> Self {
        let code = match &e {
            SylvesterError::Domain(_) | SylvesterError::NotInRegistry(_) => EXIT_DOMAIN,
            SylvesterError::Numeric(AngleSumError::Domain(_)) => EXIT_DOMAIN,
            SylvesterError::Numeric(_) => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        let code = match &e {
            GeomError::Invalid(_) => EXIT_DOMAIN,
            GeomError::Distribution(inner) => return Failure::from(inner.clone()),
            GeomError::Degenerate { .. }
            | GeomError::RetriesExhausted { .. }
            | GeomError::Exclusivity { .. } => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: format!("output error: {e}"),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: format!("output error: {e}"),
        }
    }
}

type CmdResult = Result<u8, Failure>;

/// Parses `std::env::args` and runs the command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = run(cli, &mut out, &mut io::stderr());
    ExitCode::from(code)
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Compute(args) => cmd_compute(&args, out),
        Command::Mc(args) => cmd_mc(&args, out),
        Command::Sweep(args) => cmd_sweep(&args, out, err),
        Command::Verify(args) => cmd_verify(&args, out),
        Command::Table(args) => cmd_table(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn config_for(tol: f64) -> Result<QuadratureConfig, Failure> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Failure::domain(format!("--tol {tol} must lie in (0, 1)")));
    }
    Ok(QuadratureConfig::with_tolerances(tol, tol * 1e-3))
}

pub fn write_records(
    records: &[OutputRecord],
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    match format {
        Format::Json => {
            for r in records {
                serde_json::to_writer(&mut *out, r).map_err(|e| Failure {
                    code: EXIT_NUMERIC,
                    message: e.to_string(),
                })?;
                writeln!(out)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn cmd_compute(args: &ComputeArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = config_for(args.tol)?;
    let family = Family::from(args.dist.family);
    let betas: Vec<Option<f64>> = match (family, args.beta.is_empty()) {
        (Family::Gaussian, true) => vec![None],
        (Family::Gaussian, false) => {
            return Err(Failure::domain("the gauss family takes no --beta"))
        }
        (_, true) => {
            return Err(Failure::domain(format!(
                "the {family} family requires --beta"
            )))
        }
        (_, false) => args.beta.iter().copied().map(Some).collect(),
    };
    let mut records = Vec::new();
    for beta in betas {
        let dist = Distribution::new(family, args.dist.dim, beta)?;
        let r = sylvester::sylvester_probability(&dist, args.method.into(), &cfg)?;
        records.push(OutputRecord::deterministic(&dist, &r));
    }
    write_records(&records, args.format, out)?;
    Ok(EXIT_OK)
}

fn cmd_mc(args: &McArgs, out: &mut dyn Write) -> CmdResult {
    let dist = Distribution::new(args.dist.family.into(), args.dist.dim, args.beta)?;
    let mc = McConfig::new(args.trials, args.seed).with_workers(args.workers);
    let r = geomc::estimate_sylvester(&dist, &mc)?;
    write_records(&[OutputRecord::monte_carlo(&dist, &r)], args.format, out)?;
    Ok(EXIT_OK)
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let cfg = config_for(args.tol)?;
    if args.steps == 0 {
        return Err(Failure::domain("--steps must be at least 1"));
    }
    if !(args.beta_min <= args.beta_max) {
        return Err(Failure::domain("--beta-min must not exceed --beta-max"));
    }
    let family = match args.family {
        SweepFamily::Beta => Family::Beta,
        SweepFamily::Betaprime => Family::BetaPrime,
    };
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record(["beta", "value", "abs_error"])?;
    let mut values = Vec::new();
    let mut rejected = 0;
    let mut worst_code = EXIT_OK;
    for i in 0..=args.steps {
        let t = f64::from(i) / f64::from(args.steps);
        let beta = if i == args.steps {
            args.beta_max
        } else {
            args.beta_min + (args.beta_max - args.beta_min) * t
        };
        let result = Distribution::new(family, args.dim, Some(beta))
            .and_then(|dist| sylvester::sylvester_probability(&dist, Method::Auto, &cfg));
        match result {
            Ok(r) => {
                w.serialize((beta, r.value, r.abs_error_estimate))?;
                values.push(r.value);
            }
            Err(e) => {
                let f = Failure::from(e);
                writeln!(err, "warning: beta = {beta} rejected: {}", f.message)?;
                worst_code = worst_code.max(f.code);
                rejected += 1;
            }
        }
    }
    w.flush()?;
    drop(w);
    let (expected, violations) = match family {
        Family::BetaPrime => (
            "non-increasing",
            values.windows(2).filter(|v| v[1] > v[0]).count(),
        ),
        _ => (
            "non-decreasing",
            values.windows(2).filter(|v| v[1] < v[0]).count(),
        ),
    };
    writeln!(
        out,
        "# expected {expected}: {violations} violation(s) over {} row(s), {rejected} rejected",
        values.len()
    )?;
    Ok(worst_code)
}

fn parse_key(text: &str) -> Result<Distribution, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || {
        Failure::domain(format!(
            "cannot parse registry key `{text}` (want family:d[:beta])"
        ))
    };
    let family: Family = parts.first().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let d: u32 = parts.get(1).ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let beta = match parts.get(2) {
        Some(b) => Some(b.parse::<f64>().map_err(|_| bad())?),
        None => None,
    };
    Ok(Distribution::new(family, d, beta)?)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let suite = match args.suite {
        SuiteArg::Basic => Suite::Basic,
        SuiteArg::Full => Suite::Full,
    };
    let mut opts = VerifyOptions::new(suite, args.seed);
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(Failure::domain("--workers must be positive"));
        }
        opts.workers = w;
    }
    if let Some(key) = &args.corrupt_registry {
        let dist = parse_key(key)?;
        let value = match Registry::standard().lookup(&dist) {
            Some(Ok(r)) => r.value,
            _ => return Err(Failure::domain(format!("no registry entry for `{key}`"))),
        };
        opts.registry = Registry::standard().with_override(&dist, value + 1e-3);
    }
    let mut failed = 0;
    for check in verify::run_suite(&opts) {
        writeln!(out, "{check}")?;
        out.flush()?;
        if check.status == Status::Fail {
            failed += 1;
        }
    }
    writeln!(out, "{} hard check(s) failed", failed)?;
    Ok(if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

/// Distributions listed by a table preset.
pub fn preset_rows(preset: Preset) -> Vec<Distribution> {
    match preset {
        Preset::Gauss => (2..=3).map(Distribution::gaussian).collect(),
        Preset::Arcsine => (2..=5).map(|d| Distribution::beta(d, -0.5)).collect(),
        Preset::Semispherical => (2..=4).map(|d| Distribution::beta(d, 0.5)).collect(),
        Preset::BetaprimeSpecial => (1..=8)
            .map(|d| Distribution::beta_prime(d, f64::from(d) / 2.0 + 1.0))
            .collect(),
        Preset::Kingman => (1..=8).map(|d| Distribution::beta(d, 0.0)).collect(),
    }
}

fn cmd_table(args: &TableArgs, out: &mut dyn Write) -> CmdResult {
    let registry = Registry::standard();
    writeln!(
        out,
        "{:<10} {:>2} {:>6} {:>18}  expression",
        "family", "d", "beta", "value"
    )?;
    for dist in preset_rows(args.preset) {
        // Skip the catch-all d = 1 entry so each row shows its family formula.
        let entry = registry
            .entries()
            .iter()
            .find(|e| e.key.family.is_some() && e.key.matches(&dist))
            .ok_or_else(|| Failure::domain(format!("no registry entry for {}", dist.label())))?;
        let value = entry.evaluate(dist.d)?;
        let beta = dist.beta.map_or_else(|| "-".to_string(), |b| b.to_string());
        writeln!(
            out,
            "{:<10} {:>2} {:>6} {:>18.15}  {}",
            dist.family.as_str(),
            dist.d,
            beta,
            value,
            entry.description
        )?;
    }
    Ok(EXIT_OK)
}
