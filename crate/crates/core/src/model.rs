//! The common-shock Poisson model `Y_j = U + X_j` and its data.

use std::cmp::Ordering;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{log_factorial, poisson_draw, RngContract};

/// Shock rate `lambda` and the `m >= 2` independent rates `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    lambda: f64,
    mu: Vec<f64>,
}

impl ModelParams {
    pub fn new(lambda: f64, mu: Vec<f64>) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
        }
        validate_rates(&mu)?;
        Ok(Self { lambda, mu })
    }

    /// Parameters under the null of independence.
    pub fn null(mu: Vec<f64>) -> Result<Self> {
        Self::new(0.0, mu)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }
}

pub(crate) fn validate_rates(mu: &[f64]) -> Result<()> {
    if mu.len() < 2 {
        return Err(Error::invalid(format!(
            "need m >= 2 rates, got {}",
            mu.len()
        )));
    }
    if let Some(bad) = mu.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!("rates must be positive, got {bad}")));
    }
    Ok(())
}

/// An `n x m` table of counts, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix {
    m: usize,
    counts: Vec<u64>,
}

impl CountMatrix {
    /// Builds from row-major storage of `n * m` counts.
    pub fn from_flat(m: usize, counts: Vec<u64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("need m >= 2 columns, got {m}")));
        }
        if counts.is_empty() || !counts.len().is_multiple_of(m) {
            return Err(Error::invalid(format!(
                "{} counts do not form rows of width {m}",
                counts.len()
            )));
        }
        Ok(Self { m, counts })
    }

    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut counts = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::invalid(format!(
                    "row {} has {} entries, expected {m}",
                    i + 1,
                    row.len()
                )));
            }
            counts.extend_from_slice(row);
        }
        Self::from_flat(m, counts)
    }

    pub fn n(&self) -> usize {
        self.counts.len() / self.m
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.counts[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[u64]> + '_ {
        self.counts.chunks_exact(self.m)
    }

    pub fn as_flat(&self) -> &[u64] {
        &self.counts
    }
}

/// Draws `n` rows from the model with the stream `(seed, 0)`.
pub fn sample_dataset(params: &ModelParams, n: usize, seed: u64) -> Result<CountMatrix> {
    sample_dataset_with(params, n, &mut RngContract::new(seed, 0).rng())
}

/// Draws `n` rows, consuming `rng` row by row: the shock first, then each column.
pub fn sample_dataset_with<R: Rng + ?Sized>(
    params: &ModelParams,
    n: usize,
    rng: &mut R,
) -> Result<CountMatrix> {
    if n == 0 {
        return Err(Error::invalid("sample size must be >= 1"));
    }
    let m = params.m();
    let mut counts = Vec::with_capacity(n * m);
    for _ in 0..n {
        let u = poisson_draw(rng, params.lambda);
        counts.extend(params.mu.iter().map(|&mu| u + poisson_draw(rng, mu)));
    }
    CountMatrix::from_flat(m, counts)
}

/// How the mixed moment was accumulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixedMomentPrecision {
    /// Every row product fit in `u128`.
    Exact,
    /// At least one row product overflowed and was taken in `f64`.
    Floating,
}

/// Column means, row minima, the mixed moment and the factorial constant.
#[derive(Clone, Debug, PartialEq)]
pub struct SufficientStats {
    n: usize,
    col_sums: Vec<u128>,
    col_means: Vec<f64>,
    row_min: Vec<u64>,
    mixed_moment: f64,
    /// `sum_i prod_j y_ij` when it fits in `u128`.
    mixed_sum: Option<u128>,
    mean_product: f64,
    log_factorial_sum: f64,
    precision: MixedMomentPrecision,
}

impl SufficientStats {
    /// Exact statistics; a row product beyond `u128` is a [`Error::NumericOverflow`].
    pub fn exact(data: &CountMatrix) -> Result<Self> {
        let stats = Self::compute(data);
        match stats.precision {
            MixedMomentPrecision::Exact => Ok(stats),
            MixedMomentPrecision::Floating => Err(Error::NumericOverflow(
                "a row product exceeds the exact integer range".into(),
            )),
        }
    }

    /// Like [`Self::exact`] but overflowing row products fall back to `f64`
    /// (relative error near 1e-15 per product).
    pub fn from_counts(data: &CountMatrix) -> Self {
        Self::compute(data)
    }

    fn compute(data: &CountMatrix) -> Self {
        let (n, m) = (data.n(), data.m());
        let mut col_sums = vec![0u128; m];
        let mut row_min = Vec::with_capacity(n);
        let mut exact_sum: u128 = 0;
        let mut float_sum = 0.0;
        let mut precision = MixedMomentPrecision::Exact;
        let mut log_factorial_sum = 0.0;

        for row in data.rows() {
            for (s, &y) in col_sums.iter_mut().zip(row) {
                *s += y as u128;
                log_factorial_sum += log_factorial(y);
            }
            row_min.push(row.iter().copied().min().unwrap_or(0));
            let product = row
                .iter()
                .try_fold(1u128, |acc, &y| acc.checked_mul(y as u128));
            match product.and_then(|p| exact_sum.checked_add(p)) {
                Some(total) => exact_sum = total,
                None => {
                    precision = MixedMomentPrecision::Floating;
                    float_sum += row.iter().map(|&y| y as f64).product::<f64>();
                }
            }
        }

        let nf = n as f64;
        let col_means: Vec<f64> = col_sums.iter().map(|&s| s as f64 / nf).collect();
        let mean_product = col_means.iter().product();
        Self {
            n,
            col_sums,
            col_means,
            row_min,
            mixed_moment: (exact_sum as f64 + float_sum) / nf,
            mixed_sum: (precision == MixedMomentPrecision::Exact).then_some(exact_sum),
            mean_product,
            log_factorial_sum,
            precision,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.col_means.len()
    }

    /// Column means `ybar_j`.
    pub fn col_means(&self) -> &[f64] {
        &self.col_means
    }

    /// Column totals `sum_i y_ij`.
    pub fn col_sums(&self) -> &[u128] {
        &self.col_sums
    }

    /// `true` when some column of smallest mean is the minimum of every row.
    ///
    /// Then `l(lambda)` stays bounded as `lambda` approaches `min_j ybar_j`.
    pub fn minimum_column_dominates(&self) -> bool {
        let smallest = self.col_sums.iter().copied().min().unwrap_or(0);
        let row_min_total: u128 = self.row_min.iter().map(|&y| y as u128).sum();
        smallest > 0 && row_min_total == smallest
    }

    /// Row minima `y_i = min_j y_ij`.
    pub fn row_min(&self) -> &[u64] {
        &self.row_min
    }

    /// `n^-1 sum_i prod_j y_ij`.
    pub fn mixed_moment(&self) -> f64 {
        self.mixed_moment
    }

    /// Sign of `ybar_{11...1} - prod_j ybar_j`, which is the sign of `l'(0)`.
    ///
    /// Compared as `n^(m-1) sum_i prod_j y_ij` against `prod_j sum_i y_ij` in
    /// integers, so exact ties are detected; falls back to `f64` on overflow.
    pub fn score_sign_at_zero(&self) -> Ordering {
        let exact = self.mixed_sum.and_then(|mixed| {
            let scale = (1..self.m()).try_fold(1u128, |acc, _| acc.checked_mul(self.n as u128))?;
            let lhs = mixed.checked_mul(scale)?;
            let rhs = self
                .col_sums
                .iter()
                .try_fold(1u128, |acc, &s| acc.checked_mul(s))?;
            Some(lhs.cmp(&rhs))
        });
        exact.unwrap_or_else(|| {
            self.mixed_moment
                .partial_cmp(&self.mean_product)
                .unwrap_or(Ordering::Equal)
        })
    }

    /// `prod_j ybar_j`.
    pub fn mean_product(&self) -> f64 {
        self.mean_product
    }

    /// `sum_i sum_j ln y_ij!`.
    pub fn log_factorial_sum(&self) -> f64 {
        self.log_factorial_sum
    }

    pub fn precision(&self) -> MixedMomentPrecision {
        self.precision
    }

    /// Upper end of the admissible interval for `lambda`.
    pub fn lambda_upper(&self) -> f64 {
        self.col_means.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Statistics for `data`; overflowing row products are reported, not approximated.
pub fn sufficient_stats(data: &CountMatrix) -> Result<SufficientStats> {
    SufficientStats::exact(data)
}
