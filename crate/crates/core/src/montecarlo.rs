//! Null-distribution simulations: summaries of `Q_n` and empirical rejection
//! probabilities under each critical-value scheme.
//!
//! Replication `r` at sample size `n` draws from the stream
//! `RngContract::for_replication(seed, n, r)`. Replications run on the rayon
//! pool and are collected in index order, then reduced sequentially, so every
//! summary is a pure function of the configuration.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::likelihood::LikelihoodContext;
use crate::lrt::{critical_value, decide, lr_statistic_with, CriticalValueScheme, SchemeKind};
use crate::mle::FitOptions;
use crate::model::{sample_dataset_with, validate_rates, ModelParams};
use crate::numeric::{chi2_1_upper_quantile, RngContract};

pub const DEFAULT_REPLICATIONS: usize = 100_000;
pub const MIN_REPLICATIONS: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 20_140;
/// Runs abort once failures exceed this fraction of the replications.
pub const MAX_FAILURE_RATE: f64 = 1e-3;

pub const CSV_COLUMNS: [&str; 13] = [
    "case_id",
    "m",
    "mu_list",
    "lambda",
    "n",
    "scheme",
    "replications",
    "two_e_q",
    "var_q",
    "pi_hat",
    "erp",
    "erp_stderr",
    "failures",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub case_id: String,
    pub mu: Vec<f64>,
    pub lambda: f64,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub schemes: Vec<SchemeKind>,
}

impl ExperimentConfig {
    /// A size study at `lambda = 0` with every scheme and the default
    /// replication count.
    pub fn null(case_id: impl Into<String>, mu: Vec<f64>, n_grid: Vec<usize>) -> Self {
        Self {
            case_id: case_id.into(),
            mu,
            lambda: 0.0,
            n_grid,
            replications: DEFAULT_REPLICATIONS,
            alpha: DEFAULT_ALPHA,
            seed: DEFAULT_SEED,
            schemes: SchemeKind::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_rates(&self.mu)?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if self.n_grid.is_empty() {
            return Err(Error::invalid("n_grid is empty"));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "n_grid must be strictly ascending positive sizes, got {:?}",
                self.n_grid
            )));
        }
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::invalid(format!(
                "replications must be >= {MIN_REPLICATIONS}, got {}",
                self.replications
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        let distinct: BTreeSet<_> = self.schemes.iter().collect();
        if distinct.len() != self.schemes.len() {
            return Err(Error::invalid("schemes lists a scheme twice"));
        }
        Ok(())
    }

    /// Parses a TOML document; unknown keys are rejected all at once.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        let unknown: Vec<&str> = table
            .keys()
            .map(String::as_str)
            .filter(|k| !CONFIG_KEYS.contains(k))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::invalid(format!(
                "unknown config keys: {}; expected a subset of {}",
                unknown.join(", "),
                CONFIG_KEYS.join(", ")
            )));
        }
        let file: ConfigFile = table
            .try_into()
            .map_err(|e| Error::invalid(format!("config: {e}")))?;
        let schemes = match file.schemes {
            Some(names) => names
                .iter()
                .map(|s| s.parse())
                .collect::<Result<Vec<_>>>()?,
            None => SchemeKind::ALL.to_vec(),
        };
        let config = Self {
            case_id: file.case_id.unwrap_or_else(|| "case".to_owned()),
            mu: file.mu,
            lambda: file.lambda.unwrap_or(0.0),
            n_grid: file.n_grid,
            replications: file.replications.unwrap_or(DEFAULT_REPLICATIONS),
            alpha: file.alpha.unwrap_or(DEFAULT_ALPHA),
            seed: file.seed.unwrap_or(DEFAULT_SEED),
            schemes,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

const CONFIG_KEYS: [&str; 8] = [
    "case_id",
    "mu",
    "lambda",
    "n_grid",
    "replications",
    "alpha",
    "seed",
    "schemes",
];

#[derive(Deserialize)]
struct ConfigFile {
    case_id: Option<String>,
    mu: Vec<f64>,
    lambda: Option<f64>,
    n_grid: Vec<usize>,
    replications: Option<usize>,
    alpha: Option<f64>,
    seed: Option<u64>,
    schemes: Option<Vec<String>>,
}

/// What one replication contributes.
#[derive(Clone, Debug, PartialEq)]
pub enum Replicate {
    Done {
        q_n: f64,
        lambda_hat: f64,
        /// Plug-in critical value, or `None` when it fell back to asymptotic.
        plugin_critical: Option<f64>,
    },
    Failed(String),
}

fn replicate(params: &ModelParams, n: usize, seed: u64, r: usize, alpha: f64) -> Replicate {
    let mut rng = RngContract::for_replication(seed, n as u64, r as u64).rng();
    let outcome = sample_dataset_with(params, n, &mut rng).and_then(|data| {
        let ctx = LikelihoodContext::<f64>::new(&data);
        let lrt = lr_statistic_with(&ctx, FitOptions::default())?;
        let plugin = CriticalValueScheme::plugin(alpha)?;
        let plugin_critical = match critical_value(&plugin, n, ctx.stats().col_means()) {
            Ok(c) => Some(c),
            Err(Error::Domain(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Replicate::Done {
            q_n: lrt.q_n,
            lambda_hat: lrt.lambda_hat,
            plugin_critical,
        })
    });
    outcome.unwrap_or_else(|e| Replicate::Failed(e.to_string()))
}

/// Every replication at sample size `n`, in replication order.
pub fn simulate_replications(config: &ExperimentConfig, n: usize) -> Result<Vec<Replicate>> {
    config.validate()?;
    let params = ModelParams::new(config.lambda, config.mu.clone())?;
    Ok((0..config.replications)
        .into_par_iter()
        .map(|r| replicate(&params, n, config.seed, r, config.alpha))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeRate {
    pub scheme: SchemeKind,
    pub erp: f64,
    pub stderr: f64,
    /// The fixed critical value, when the scheme has one per sample size.
    pub critical: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeSummary {
    pub n: usize,
    pub replications: usize,
    pub failures: usize,
    /// `2 * mean(Q_n)`.
    pub two_e_q: f64,
    pub two_e_q_stderr: f64,
    pub var_q: f64,
    pub var_q_stderr: f64,
    /// Fraction of `lambda_hat > 0`.
    pub pi_hat: f64,
    pub pi_hat_stderr: f64,
    pub erp: Vec<SchemeRate>,
    /// Replications whose plug-in critical value fell back to asymptotic.
    pub plugin_fallbacks: usize,
}

impl SizeSummary {
    pub fn rate(&self, scheme: SchemeKind) -> Option<&SchemeRate> {
        self.erp.iter().find(|r| r.scheme == scheme)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub sizes: Vec<SizeSummary>,
}

fn proportion(hits: usize, total: usize) -> (f64, f64) {
    let p = hits as f64 / total as f64;
    (p, (p * (1.0 - p) / total as f64).sqrt())
}

/// Aggregates replications at sample size `n` in index order.
pub fn summarize(config: &ExperimentConfig, n: usize, reps: &[Replicate]) -> Result<SizeSummary> {
    let mut first_failure = None;
    let mut q = Vec::with_capacity(reps.len());
    let mut positive = 0usize;
    let mut plugin_rejects = 0usize;
    let mut plugin_fallbacks = 0usize;
    let asymptotic = chi2_1_upper_quantile(2.0 * config.alpha)?;
    for rep in reps {
        match rep {
            Replicate::Done {
                q_n,
                lambda_hat,
                plugin_critical,
            } => {
                q.push(*q_n);
                positive += usize::from(*lambda_hat > 0.0);
                let critical = plugin_critical.unwrap_or_else(|| {
                    plugin_fallbacks += 1;
                    asymptotic
                });
                plugin_rejects += usize::from(decide(*q_n, critical));
            }
            Replicate::Failed(why) => {
                first_failure.get_or_insert(why);
            }
        }
    }
    let failures = reps.len() - q.len();
    if failures as f64 > MAX_FAILURE_RATE * reps.len() as f64 {
        return Err(Error::TooManyFailures(format!(
            "{failures} of {} replications failed at n = {n}; first: {}",
            reps.len(),
            first_failure.map_or("", String::as_str)
        )));
    }
    let done = q.len();
    if done < 2 {
        return Err(Error::TooManyFailures(format!(
            "only {done} replications succeeded at n = {n}"
        )));
    }

    // Welford in replication order.
    let (mut mean, mut m2) = (0.0_f64, 0.0_f64);
    for (k, &x) in q.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var_q = m2 / (done - 1) as f64;
    let m4 = q.iter().map(|&x| (x - mean).powi(4)).sum::<f64>() / done as f64;
    let var_q_stderr = ((m4 - var_q * var_q).max(0.0) / done as f64).sqrt();
    let (pi_hat, pi_hat_stderr) = proportion(positive, done);

    let mut erp = Vec::with_capacity(config.schemes.len());
    for &scheme in &config.schemes {
        let critical = match scheme {
            SchemeKind::BartlettPlugin => None,
            SchemeKind::Asymptotic => Some(asymptotic),
            SchemeKind::BartlettTrue => {
                let s = CriticalValueScheme::at_true_rates(config.alpha, config.mu.clone())?;
                Some(critical_value(&s, n, &[])?)
            }
            SchemeKind::BartlettTruePi => {
                if pi_hat <= config.alpha {
                    // alpha / pi_hat >= 1: every positive statistic rejects.
                    Some(0.0)
                } else {
                    let s = CriticalValueScheme::at_true_rates_with_pi(
                        config.alpha,
                        config.mu.clone(),
                        pi_hat,
                    )?;
                    Some(critical_value(&s, n, &[])?)
                }
            }
        };
        let rejects = match critical {
            Some(c) => q.iter().filter(|&&x| decide(x, c)).count(),
            None => plugin_rejects,
        };
        let (rate, stderr) = proportion(rejects, done);
        erp.push(SchemeRate {
            scheme,
            erp: rate,
            stderr,
            critical,
        });
    }

    Ok(SizeSummary {
        n,
        replications: reps.len(),
        failures,
        two_e_q: 2.0 * mean,
        two_e_q_stderr: 2.0 * (var_q / done as f64).sqrt(),
        var_q,
        var_q_stderr,
        pi_hat,
        pi_hat_stderr,
        erp,
        plugin_fallbacks,
    })
}

pub fn run_null_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let sizes = config
        .n_grid
        .iter()
        .map(|&n| summarize(config, n, &simulate_replications(config, n)?))
        .collect::<Result<_>>()?;
    Ok(ExperimentResult {
        config: config.clone(),
        sizes,
    })
}

/// Runs on a dedicated pool of `threads` workers; `None` uses the global pool.
pub fn run_null_experiment_on(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentResult> {
    match threads {
        None => run_null_experiment(config),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(|| run_null_experiment(config)),
    }
}

/// One row per `(n, scheme)` under [`CSV_COLUMNS`].
pub fn write_csv<W: Write>(result: &ExperimentResult, sink: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(sink);
    out.write_record(CSV_COLUMNS)?;
    let c = &result.config;
    let mu_list = c
        .mu
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(";");
    for size in &result.sizes {
        for rate in &size.erp {
            out.write_record([
                c.case_id.clone(),
                c.mu.len().to_string(),
                mu_list.clone(),
                c.lambda.to_string(),
                size.n.to_string(),
                rate.scheme.to_string(),
                size.replications.to_string(),
                size.two_e_q.to_string(),
                size.var_q.to_string(),
                size.pi_hat.to_string(),
                rate.erp.to_string(),
                rate.stderr.to_string(),
                size.failures.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn summarize_to_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(result, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Internal(format!("{}: {other:?}", path.display())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(schemes: Vec<SchemeKind>) -> ExperimentConfig {
        ExperimentConfig {
            replications: 400,
            schemes,
            ..ExperimentConfig::null("t", vec![1.0, 1.0], vec![20, 40])
        }
    }

    fn csv_bytes(result: &ExperimentResult) -> Vec<u8> {
        let mut buf = Vec::new();
        write_csv(result, &mut buf).unwrap();
        buf
    }

    #[test]
    fn config_validation() {
        let ok = small(SchemeKind::ALL.to_vec());
        assert!(ok.validate().is_ok());
        for bad in [
            ExperimentConfig { replications: 99, ..ok.clone() },
            ExperimentConfig { n_grid: vec![], ..ok.clone() },
            ExperimentConfig { n_grid: vec![40, 20], ..ok.clone() },
            ExperimentConfig { n_grid: vec![20, 20], ..ok.clone() },
            ExperimentConfig { alpha: 0.0, ..ok.clone() },
            ExperimentConfig { lambda: -1.0, ..ok.clone() },
            ExperimentConfig { mu: vec![1.0], ..ok.clone() },
            ExperimentConfig { schemes: vec![SchemeKind::Asymptotic; 2], ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidInput(_))), "{bad:?}");
        }
    }

    #[test]
    fn toml_defaults_and_unknown_keys() {
        let c = ExperimentConfig::from_toml_str("mu = [1.0, 1.0]\nn_grid = [20, 40]\n").unwrap();
        assert_eq!(c.replications, DEFAULT_REPLICATIONS);
        assert_eq!(c.alpha, DEFAULT_ALPHA);
        assert_eq!(c.lambda, 0.0);
        assert_eq!(c.schemes, SchemeKind::ALL.to_vec());

        let err = ExperimentConfig::from_toml_str(
            "mu = [1.0, 1.0]\nn_grid = [20]\nreps = 5\nthreads = 2\n",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("reps") && err.contains("threads"), "{err}");

        let c = ExperimentConfig::from_toml_str(
            "case_id = \"x\"\nmu = [2, 3]\nn_grid = [10]\nschemes = [\"bartlett\"]\nseed = 9\nreplications = 100\n",
        )
        .unwrap();
        assert_eq!(c.mu, vec![2.0, 3.0]);
        assert_eq!(c.schemes, vec![SchemeKind::BartlettPlugin]);
    }

    #[test]
    fn empty_scheme_set_gives_header_only() {
        let r = run_null_experiment(&small(vec![])).unwrap();
        let text = String::from_utf8(csv_bytes(&r)).unwrap();
        assert_eq!(text, format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn independent_of_pool_size() {
        let c = small(SchemeKind::ALL.to_vec());
        let one = run_null_experiment_on(&c, Some(1)).unwrap();
        let three = run_null_experiment_on(&c, Some(3)).unwrap();
        assert_eq!(one, three);
        assert_eq!(csv_bytes(&one), csv_bytes(&three));
    }

    #[test]
    fn summaries_are_in_range() {
        let r = run_null_experiment(&small(SchemeKind::ALL.to_vec())).unwrap();
        for s in &r.sizes {
            assert!((0.0..=1.0).contains(&s.pi_hat));
            assert!(s.var_q >= 0.0);
            assert_eq!(s.erp.len(), 4);
            for rate in &s.erp {
                assert!((0.0..=1.0).contains(&rate.erp));
            }
        }
        let lines = String::from_utf8(csv_bytes(&r)).unwrap().lines().count();
        assert_eq!(lines, 1 + 2 * 4);
    }

    #[test]
    fn failures_abort_past_threshold() {
        let c = small(vec![SchemeKind::Asymptotic]);
        let mut reps = vec![
            Replicate::Done { q_n: 0.0, lambda_hat: 0.0, plugin_critical: Some(3.0) };
            1000
        ];
        reps[0] = Replicate::Failed("a".into());
        assert_eq!(summarize(&c, 20, &reps).unwrap().failures, 1);
        reps[1] = Replicate::Failed("b".into());
        assert!(matches!(summarize(&c, 20, &reps), Err(Error::TooManyFailures(_))));
    }

    #[test]
    fn pi_hat_not_above_alpha_rejects_every_positive_statistic() {
        let c = ExperimentConfig { alpha: 0.3, ..small(vec![SchemeKind::BartlettTruePi]) };
        let mut reps = vec![
            Replicate::Done { q_n: 0.0, lambda_hat: 0.0, plugin_critical: Some(3.0) };
            100
        ];
        for rep in reps.iter_mut().take(20) {
            *rep = Replicate::Done { q_n: 1e-3, lambda_hat: 0.1, plugin_critical: Some(3.0) };
        }
        let s = summarize(&c, 20, &reps).unwrap();
        assert_eq!(s.erp[0].critical, Some(0.0));
        assert_eq!(s.erp[0].erp, 0.2);
    }
}
