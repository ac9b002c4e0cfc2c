//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or data error, 1 internal failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::builder::PossibleValue;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bartlett::{r_general, r_m2, r_via_rho_chain, BartlettReport};
use crate::data::{read_counts_file, write_counts, write_counts_file};
use crate::error::{Error, Result};
use crate::lrt::{run_test, CriticalValueScheme, SchemeKind};
use crate::model::{sample_dataset, ModelParams};
use crate::montecarlo::{run_null_experiment_on, summarize_to_csv, write_csv, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "cshock", version, about = "Test for a common shock in multivariate Poisson counts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test lambda = 0 on a CSV of counts.
    Test(TestArgs),
    /// Print the correction coefficient R by every applicable method.
    Rfactor(RfactorArgs),
    /// Write a simulated count matrix as CSV.
    Simulate(SimulateArgs),
    /// Run a null-distribution experiment from a TOML config.
    Experiment(ExperimentArgs),
}

impl ValueEnum for SchemeKind {
    fn value_variants<'a>() -> &'a [Self] {
        &SchemeKind::ALL
    }

    fn to_possible_value(&self) -> Option<PossibleValue> {
        Some(PossibleValue::new(self.as_str()))
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// CSV file, one observation per row; a header row is detected.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = SchemeKind::BartlettPlugin)]
    pub scheme: SchemeKind,
    /// True rates, required by bartlett-true and bartlett-true-pi.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub mu: Option<Vec<f64>>,
    /// Probability of a positive estimate, used by bartlett-true-pi.
    #[arg(long, default_value_t = 0.5)]
    pub pi: f64,
    /// Emit JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RfactorArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub mu: Vec<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub mu: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config value.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Overrides the config value.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; the output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::InvalidInput(_) | Error::Data { .. } | Error::Io { .. } => 2,
        Error::NumericOverflow(_)
        | Error::NonConvergence { .. }
        | Error::TooManyFailures(_)
        | Error::Internal(_) => 1,
    }
}

fn stdout_error(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

pub fn run(cli: Cli, out: &mut dyn Write, warn: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Test(args) => cmd_test(&args, out, warn),
        Command::Rfactor(args) => cmd_rfactor(&args, out),
        Command::Simulate(args) => cmd_simulate(&args, out),
        Command::Experiment(args) => cmd_experiment(&args, out),
    }
}

pub fn cmd_test(args: &TestArgs, out: &mut dyn Write, warn: &mut dyn Write) -> Result<()> {
    let scheme = CriticalValueScheme::new(args.scheme, args.alpha, args.pi, args.mu.clone())?;
    let data = read_counts_file(&args.input)?;
    let d = run_test(&data, &scheme)?;
    if let Some(w) = &d.warning {
        writeln!(warn, "warning: {w}").map_err(stdout_error)?;
    }
    let written = if args.json {
        let report = json!({
            "n": data.n(),
            "m": data.m(),
            "lambda_hat": d.lambda_hat,
            "q_n": d.q_n,
            "critical": d.critical,
            "p_value": d.p_value,
            "reject": d.reject,
            "alpha": args.alpha,
            "scheme": args.scheme.as_str(),
            "applied_scheme": d.applied.as_str(),
            "warning": d.warning,
        });
        writeln!(out, "{report}")
    } else {
        let verdict = if d.reject { "reject" } else { "do not reject" };
        writeln!(
            out,
            "n           {}\nm           {}\nlambda_hat  {}\nq_n         {}\ncritical    {} ({})\np_value     {}\ndecision    {verdict} lambda = 0 at alpha = {}",
            data.n(),
            data.m(),
            d.lambda_hat,
            d.q_n,
            d.critical,
            d.applied,
            d.p_value,
            args.alpha
        )
    };
    written.map_err(stdout_error)
}

/// Every applicable route to `R` and the largest relative gap between them.
pub fn rfactor_reports(mu: &[f64]) -> Result<(Vec<BartlettReport>, f64)> {
    let mut reports = Vec::with_capacity(3);
    if let [a, b] = *mu {
        reports.push(r_m2(a, b)?);
    }
    reports.push(r_general(mu)?);
    reports.push(r_via_rho_chain(mu)?);
    let scale = reports.iter().map(|r| r.r.abs()).fold(f64::MIN_POSITIVE, f64::max);
    let mut gap = 0.0_f64;
    for (i, a) in reports.iter().enumerate() {
        for b in &reports[i + 1..] {
            gap = gap.max((a.r - b.r).abs() / scale);
        }
    }
    Ok((reports, gap))
}

pub fn cmd_rfactor(args: &RfactorArgs, out: &mut dyn Write) -> Result<()> {
    let (reports, gap) = rfactor_reports(&args.mu)?;
    let written = if args.json {
        let methods: Vec<_> = reports
            .iter()
            .map(|r| json!({"method": r.method.to_string(), "r": r.r, "r_corr": r.r_corr}))
            .collect();
        writeln!(
            out,
            "{}",
            json!({"mu": args.mu, "methods": methods, "max_rel_discrepancy": gap})
        )
    } else {
        let mut text = format!("{:<16}{:>24}{:>24}\n", "method", "R", "R_corr");
        for r in &reports {
            text += &format!("{:<16}{:>24.12}{:>24.12}\n", r.method.to_string(), r.r, r.r_corr);
        }
        text += &format!("max relative discrepancy {gap:.3e}");
        writeln!(out, "{text}")
    };
    written.map_err(stdout_error)
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let params = ModelParams::new(args.lambda, args.mu.clone())?;
    let data = sample_dataset(&params, args.n, args.seed)?;
    match &args.out {
        Some(path) => write_counts_file(&data, path),
        None => write_counts(&data, out).map_err(stdout_error),
    }
}

pub fn load_experiment(path: &Path, args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_toml_file(path)?;
    if let Some(r) = args.replications {
        config.replications = r;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    config.validate()?;
    Ok(config)
}

pub fn cmd_experiment(args: &ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    if args.threads == Some(0) {
        return Err(Error::invalid("--threads must be >= 1"));
    }
    let config = load_experiment(&args.config, args)?;
    let result = run_null_experiment_on(&config, args.threads)?;
    match &args.out {
        Some(path) => summarize_to_csv(&result, path),
        None => write_csv(&result, out).map_err(|e| Error::Internal(e.to_string())),
    }
}
