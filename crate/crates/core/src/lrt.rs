//! The likelihood-ratio statistic `Q_n = 2 (l(lambda_hat) - l(0))`, its
//! critical values, and test decisions.
//!
//! Under the null, `Q_n` tends to the mixture `1/2 delta_0 + 1/2 chi2_1`.

use std::fmt;
use std::str::FromStr;

use crate::bartlett::{r_at, r_hat};
use crate::error::{Error, Result};
use crate::likelihood::LikelihoodContext;
use crate::mle::{fit_lambda_with, FitOptions, MleResult};
use crate::model::{validate_rates, CountMatrix, SufficientStats};
use crate::numeric::{chi2_1_upper_quantile, chi2_1_upper_tail};

/// Solver noise below this is clamped to zero; anything more negative is a bug.
pub const NEGATIVE_Q_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrtResult {
    pub q_n: f64,
    pub lambda_hat: f64,
    pub n: usize,
    pub m: usize,
    pub mle: MleResult,
}

pub fn lr_statistic(data: &CountMatrix) -> Result<LrtResult> {
    let ctx = LikelihoodContext::<f64>::new(data);
    lr_statistic_with(&ctx, FitOptions::default())
}

pub fn lr_statistic_with(ctx: &LikelihoodContext<'_, f64>, opts: FitOptions) -> Result<LrtResult> {
    let mle = fit_lambda_with(ctx, opts)?;
    let raw = 2.0 * (mle.loglik_at_hat - ctx.loglik_null());
    let q_n = if mle.at_boundary || (-NEGATIVE_Q_TOLERANCE..0.0).contains(&raw) {
        0.0
    } else if raw < 0.0 {
        return Err(Error::Internal(format!(
            "likelihood ratio {raw} is negative beyond solver noise"
        )));
    } else {
        raw
    };
    Ok(LrtResult {
        q_n,
        lambda_hat: mle.lambda_hat,
        n: ctx.stats().n(),
        m: ctx.stats().m(),
        mle,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// `chi2_1(2 alpha)`.
    Asymptotic,
    /// `(1 + R_hat_corr / n) chi2_1(2 alpha)`, rates replaced by column means.
    BartlettPlugin,
    /// `(1 + R_corr(mu) / n) chi2_1(2 alpha)` at the true rates.
    BartlettTrue,
    /// `(1 + R_corr(mu) / n) chi2_1(alpha / pi)`.
    BartlettTruePi,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Asymptotic,
        SchemeKind::BartlettPlugin,
        SchemeKind::BartlettTrue,
        SchemeKind::BartlettTruePi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Asymptotic => "asymptotic",
            SchemeKind::BartlettPlugin => "bartlett",
            SchemeKind::BartlettTrue => "bartlett-true",
            SchemeKind::BartlettTruePi => "bartlett-true-pi",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown scheme {s:?}; expected one of asymptotic, bartlett, bartlett-true, bartlett-true-pi"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalValueScheme {
    kind: SchemeKind,
    alpha: f64,
    pi: f64,
    true_mu: Option<Vec<f64>>,
}

impl CriticalValueScheme {
    pub fn new(kind: SchemeKind, alpha: f64, pi: f64, true_mu: Option<Vec<f64>>) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(pi > 0.0 && pi <= 1.0) {
            return Err(Error::invalid(format!("pi must lie in (0, 1], got {pi}")));
        }
        match (kind, &true_mu) {
            (SchemeKind::BartlettTrue | SchemeKind::BartlettTruePi, None) => {
                return Err(Error::invalid(format!("scheme {kind} needs the true rates")));
            }
            (_, Some(mu)) => validate_rates(mu)?,
            _ => {}
        }
        Ok(Self {
            kind,
            alpha,
            pi,
            true_mu,
        })
    }

    pub fn asymptotic(alpha: f64) -> Result<Self> {
        Self::new(SchemeKind::Asymptotic, alpha, 0.5, None)
    }

    pub fn plugin(alpha: f64) -> Result<Self> {
        Self::new(SchemeKind::BartlettPlugin, alpha, 0.5, None)
    }

    pub fn at_true_rates(alpha: f64, mu: Vec<f64>) -> Result<Self> {
        Self::new(SchemeKind::BartlettTrue, alpha, 0.5, Some(mu))
    }

    pub fn at_true_rates_with_pi(alpha: f64, mu: Vec<f64>, pi: f64) -> Result<Self> {
        Self::new(SchemeKind::BartlettTruePi, alpha, pi, Some(mu))
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn true_mu(&self) -> Option<&[f64]> {
        self.true_mu.as_deref()
    }

    fn tail_probability(&self) -> Result<f64> {
        match self.kind {
            SchemeKind::BartlettTruePi => {
                let p = self.alpha / self.pi;
                if p >= 1.0 {
                    return Err(Error::domain(format!(
                        "alpha / pi = {p} is not below 1"
                    )));
                }
                Ok(p)
            }
            _ => Ok(2.0 * self.alpha),
        }
    }
}

fn bartlett_factor(r_corr: f64, n: usize) -> Result<f64> {
    let factor = 1.0 + r_corr / n as f64;
    if factor > 0.0 {
        Ok(factor)
    } else {
        Err(Error::domain(format!(
            "correction factor 1 + {r_corr}/{n} is not positive"
        )))
    }
}

/// Critical value at sample size `n`; `col_means` feed the plug-in scheme.
pub fn critical_value(scheme: &CriticalValueScheme, n: usize, col_means: &[f64]) -> Result<f64> {
    let base = chi2_1_upper_quantile(scheme.tail_probability()?)?;
    let r_corr = match scheme.kind {
        SchemeKind::Asymptotic => return Ok(base),
        SchemeKind::BartlettPlugin => {
            if col_means.iter().any(|&y| y <= 0.0) {
                return Err(Error::domain(
                    "plug-in correction needs every column mean positive",
                ));
            }
            r_at(col_means)?.r_corr
        }
        SchemeKind::BartlettTrue | SchemeKind::BartlettTruePi => {
            let mu = scheme.true_mu.as_deref().unwrap_or_default();
            r_at(mu)?.r_corr
        }
    };
    Ok(bartlett_factor(r_corr, n)? * base)
}

/// `1` at `q = 0`, otherwise `P(chi2_1 > q / factor) / 2` with the plug-in factor.
///
/// Rejecting under the plug-in scheme at level `alpha` is equivalent to `p < alpha`.
pub fn p_value(q_n: f64, stats: &SufficientStats) -> f64 {
    if q_n <= 0.0 {
        return 1.0;
    }
    let factor = r_hat(stats)
        .and_then(|r| bartlett_factor(r.r_corr, stats.n()))
        .unwrap_or(1.0);
    0.5 * chi2_1_upper_tail(q_n / factor)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestDecision {
    pub reject: bool,
    pub q_n: f64,
    pub critical: f64,
    pub p_value: f64,
    pub lambda_hat: f64,
    /// The scheme actually applied; differs from the request after a fallback.
    pub applied: SchemeKind,
    pub warning: Option<String>,
}

/// Rejects iff `q_n > critical`, strictly.
pub fn decide(q_n: f64, critical: f64) -> bool {
    q_n > 0.0 && q_n > critical
}

pub fn run_test(data: &CountMatrix, scheme: &CriticalValueScheme) -> Result<TestDecision> {
    let ctx = LikelihoodContext::<f64>::new(data);
    let lrt = lr_statistic_with(&ctx, FitOptions::default())?;
    let stats = ctx.stats();
    let n = stats.n();

    let (critical, applied, warning) = match critical_value(scheme, n, stats.col_means()) {
        Ok(c) => (c, scheme.kind, None),
        Err(Error::Domain(why)) if scheme.kind == SchemeKind::BartlettPlugin => {
            let fallback = CriticalValueScheme::asymptotic(scheme.alpha)?;
            (
                critical_value(&fallback, n, stats.col_means())?,
                SchemeKind::Asymptotic,
                Some(format!("{why}; using the asymptotic critical value")),
            )
        }
        Err(e) => return Err(e),
    };

    Ok(TestDecision {
        reject: decide(lrt.q_n, critical),
        q_n: lrt.q_n,
        critical,
        p_value: p_value(lrt.q_n, stats),
        lambda_hat: lrt.lambda_hat,
        applied,
        warning,
    })
}
