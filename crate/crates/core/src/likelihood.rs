//! Profile log-likelihood of the shock rate `lambda`, with `mu_j` profiled
//! out as `ybar_j - lambda`.
//!
//! Every row sum `S_i(lambda) = sum_u xi^u / (u! prod_j (y_ij - u)!)` is
//! evaluated in log space over the full range `u = 0..=min_j y_ij`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{CountMatrix, SufficientStats};
use crate::numeric::log_factorial;
use crate::scalar::{real, Real};

fn check_domain<F: Real>(lambda: F, upper: F) -> Result<()> {
    if lambda == F::zero() || (lambda > F::zero() && lambda < upper) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "lambda = {lambda:?} is outside [0, {upper:?})"
        )))
    }
}

fn min_mean<F: Real>(col_means: &[F]) -> F {
    col_means.iter().copied().fold(F::infinity(), F::min)
}

/// `xi = lambda / prod_j (ybar_j - lambda)`.
pub fn xi<F: Real>(lambda: F, col_means: &[F]) -> Result<F> {
    check_domain(lambda, min_mean(col_means))?;
    Ok(lambda / col_means.iter().map(|&y| y - lambda).fold(F::one(), |a, b| a * b))
}

fn log_xi<F: Real>(lambda: F, col_means: &[F]) -> F {
    col_means
        .iter()
        .fold(lambda.ln(), |acc, &y| acc - (y - lambda).ln())
}

/// `ln u! + sum_j ln (y_j - u)!` negated, for `u = 0..=min_j y_j`.
fn row_log_terms<F: Real>(row: &[u64]) -> impl Iterator<Item = F> + '_ {
    let top = row.iter().copied().min().unwrap_or(0);
    (0..=top).map(move |u| {
        let denom: f64 = log_factorial(u) + row.iter().map(|&y| log_factorial(y - u)).sum::<f64>();
        real::<F>(-denom)
    })
}

fn log_sum_exp<F: Real>(terms: &[F]) -> F {
    let top = terms.iter().copied().fold(F::neg_infinity(), F::max);
    if top == F::neg_infinity() {
        return top;
    }
    top + terms.iter().map(|&t| (t - top).exp()).fold(F::zero(), |a, b| a + b).ln()
}

/// `ln S_i(lambda)` for one row, by direct log-sum-exp.
pub fn log_s_row<F: Real>(lambda: F, row: &[u64], col_means: &[F]) -> Result<F> {
    check_domain(lambda, min_mean(col_means))?;
    let mut terms: Vec<F> = row_log_terms(row).collect();
    if lambda == F::zero() {
        return Ok(terms[0]);
    }
    let lx = log_xi(lambda, col_means);
    for (u, t) in terms.iter_mut().enumerate() {
        *t = *t + real::<F>(u as f64) * lx;
    }
    Ok(log_sum_exp(&terms))
}

/// Null maximized log-likelihood, `0 ln 0 = 0` for empty columns.
pub fn loglik_null<F: Real>(data: &CountMatrix) -> F {
    let stats = SufficientStats::from_counts(data);
    null_from_stats(&stats)
}

fn null_from_stats<F: Real>(stats: &SufficientStats) -> F {
    let n = real::<F>(stats.n() as f64);
    let kernel = stats
        .col_means()
        .iter()
        .map(|&y| {
            let y = real::<F>(y);
            if y > F::zero() {
                y * y.ln() - y
            } else {
                F::zero()
            }
        })
        .fold(F::zero(), |a, b| a + b);
    n * kernel - real::<F>(stats.log_factorial_sum())
}

/// Distinct row with its multiplicity and precomputed `ln` weights.
#[derive(Clone, Debug)]
struct RowGroup<F> {
    weight: F,
    product: F,
    log_terms: Vec<F>,
}

/// Everything the likelihood needs about one dataset, precomputed.
///
/// Identical rows are merged, so repeated small counts cost one evaluation.
#[derive(Clone, Debug)]
pub struct LikelihoodContext<'a, F: Real> {
    data: &'a CountMatrix,
    stats: SufficientStats,
    col_means: Vec<F>,
    lambda_upper: F,
    n: F,
    groups: Vec<RowGroup<F>>,
}

impl<'a, F: Real> LikelihoodContext<'a, F> {
    pub fn new(data: &'a CountMatrix) -> Self {
        Self::with_stats(data, SufficientStats::from_counts(data))
    }

    pub fn with_stats(data: &'a CountMatrix, stats: SufficientStats) -> Self {
        let mut multiplicity: BTreeMap<&[u64], usize> = BTreeMap::new();
        for row in data.rows() {
            *multiplicity.entry(row).or_default() += 1;
        }
        let groups = multiplicity
            .into_iter()
            .map(|(row, count)| RowGroup {
                weight: real(count as f64),
                product: row.iter().map(|&y| real::<F>(y as f64)).fold(F::one(), |a, b| a * b),
                log_terms: row_log_terms(row).collect(),
            })
            .collect();
        let col_means: Vec<F> = stats.col_means().iter().map(|&y| real(y)).collect();
        Self {
            data,
            lambda_upper: min_mean(&col_means),
            n: real(stats.n() as f64),
            col_means,
            stats,
            groups,
        }
    }

    pub fn data(&self) -> &CountMatrix {
        self.data
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn col_means(&self) -> &[F] {
        &self.col_means
    }

    /// Open upper bound `min_j ybar_j` of the `lambda` domain.
    pub fn lambda_upper(&self) -> F {
        self.lambda_upper
    }

    pub fn loglik_null(&self) -> F {
        null_from_stats(&self.stats)
    }

    /// `l(lambda)`.
    pub fn loglik(&self, lambda: F) -> Result<F> {
        check_domain(lambda, self.lambda_upper)?;
        if lambda == F::zero() {
            return Ok(self.loglik_null());
        }
        let m1 = real::<F>(self.col_means.len() as f64 - 1.0);
        let mut kernel = m1 * lambda;
        for &y in &self.col_means {
            kernel = kernel - y + y * (y - lambda).ln();
        }
        let lx = log_xi(lambda, &self.col_means);
        let mut row_sum = F::zero();
        let mut scratch = Vec::new();
        for g in &self.groups {
            scratch.clear();
            scratch.extend(
                g.log_terms
                    .iter()
                    .enumerate()
                    .map(|(u, &a)| a + real::<F>(u as f64) * lx),
            );
            row_sum = row_sum + g.weight * log_sum_exp(&scratch);
        }
        Ok(self.n * kernel + row_sum)
    }

    /// `l'(lambda)` in the factored form
    /// `{1 + lambda sum_j (ybar_j - lambda)^-1} {-n + prod_j (ybar_j - lambda)^-1 sum_i ratio_i}`.
    pub fn dloglik(&self, lambda: F) -> Result<F> {
        check_domain(lambda, self.lambda_upper)?;
        let (lead, inner) = self.score_parts(lambda);
        Ok(lead * inner)
    }

    /// The second factor of [`Self::dloglik`], which carries its sign.
    pub fn score_sign_factor(&self, lambda: F) -> Result<F> {
        check_domain(lambda, self.lambda_upper)?;
        Ok(self.score_parts(lambda).1)
    }

    fn score_parts(&self, lambda: F) -> (F, F) {
        let mut lead = F::one();
        let mut inv_product = F::one();
        for &y in &self.col_means {
            if lambda > F::zero() {
                lead = lead + lambda / (y - lambda);
            }
            inv_product = inv_product / (y - lambda);
        }
        let ratio_sum = if lambda == F::zero() {
            self.groups
                .iter()
                .fold(F::zero(), |acc, g| acc + g.weight * g.product)
        } else {
            let lx = log_xi(lambda, &self.col_means);
            self.groups
                .iter()
                .fold(F::zero(), |acc, g| acc + g.weight * shifted_ratio(&g.log_terms, lx))
        };
        if ratio_sum == F::zero() {
            return (lead, -self.n);
        }
        (lead, -self.n + inv_product * ratio_sum)
    }
}

/// `S_i(y - 1) / S_i(y)`, equal to `sum_u u xi^(u-1) c_u / sum_u xi^u c_u`.
fn shifted_ratio<F: Real>(log_terms: &[F], log_xi: F) -> F {
    if log_terms.len() < 2 {
        return F::zero();
    }
    let t = |u: usize| log_terms[u] + real::<F>(u as f64) * log_xi;
    let top = (0..log_terms.len()).map(t).fold(F::neg_infinity(), F::max);
    let top_shifted = (1..log_terms.len()).map(t).fold(F::neg_infinity(), F::max);

    let (mut num, mut den) = (F::zero(), F::zero());
    for u in 0..log_terms.len() {
        let w = (t(u) - top).exp();
        den = den + w;
        num = num + real::<F>(u as f64) * w;
    }
    if top - top_shifted < real(600.0) {
        return (num / den) * (-log_xi).exp();
    }
    // The u = 0 term dominates so strongly that the others underflowed.
    let num = (1..log_terms.len())
        .map(|u| real::<F>(u as f64) * (t(u) - top_shifted).exp())
        .fold(F::zero(), |a, b| a + b);
    (num / den) * (top_shifted - top - log_xi).exp()
}

/// `l(lambda)` for a prepared context.
pub fn loglik<F: Real>(lambda: F, ctx: &LikelihoodContext<'_, F>) -> Result<F> {
    ctx.loglik(lambda)
}

/// `l'(lambda)` for a prepared context.
pub fn dloglik<F: Real>(lambda: F, ctx: &LikelihoodContext<'_, F>) -> Result<F> {
    ctx.dloglik(lambda)
}
