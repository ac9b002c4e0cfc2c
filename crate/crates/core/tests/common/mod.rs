#![allow(dead_code)]

use cshock::numeric::{poisson_draw, RngContract};
use cshock::{CountMatrix, ModelParams};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

/// Kolmogorov-Smirnov statistic of `sample` against `cdf`, and its
/// asymptotic p-value.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let root = n.sqrt();
    (d, kolmogorov_tail((root + 0.12 + 0.11 / root) * d))
}

fn kolmogorov_tail(t: f64) -> f64 {
    if t < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * (-2.0 * k * k * t * t).exp();
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn chi2_1_cdf(x: f64) -> f64 {
    ChiSquared::new(1.0).unwrap().cdf(x)
}

/// Pearson goodness-of-fit of Poisson draws; cells pooled so every expected
/// count is at least 5. Returns `(statistic, degrees of freedom, p-value)`.
pub fn poisson_gof(draws: &[u64], mean: f64) -> (f64, usize, f64) {
    let total = draws.len() as f64;
    let law = Poisson::new(mean).unwrap();
    let max = *draws.iter().max().unwrap();
    let mut observed = vec![0u64; max as usize + 2];
    for &k in draws {
        observed[k as usize] += 1;
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for k in 0u64.. {
        obs += observed.get(k as usize).copied().unwrap_or(0) as f64;
        exp += law.pmf(k) * total;
        let tail = law.sf(k) * total;
        if tail < 5.0 {
            obs += observed.iter().skip(k as usize + 1).sum::<u64>() as f64;
            cells.push((obs, exp + tail));
            break;
        }
        if exp >= 5.0 {
            cells.push((obs, exp));
            (obs, exp) = (0.0, 0.0);
        }
    }
    if cells.len() > 1 && cells[cells.len() - 1].1 < 5.0 {
        let (o, e) = cells.pop().unwrap();
        let last = cells.last_mut().unwrap();
        last.0 += o;
        last.1 += e;
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = cells.len() - 1;
    let p = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
    (stat, df, p)
}

pub fn poisson_sample(mean: f64, count: usize, seed: u64) -> Vec<u64> {
    let mut rng = RngContract::new(seed, 7).rng();
    (0..count).map(|_| poisson_draw(&mut rng, mean)).collect()
}

/// A small random dataset: `m` in {2, 3}, `n` in 5..=30, modest rates, and a
/// shock present about half the time.
pub fn random_dataset(seed: u64) -> (CountMatrix, ModelParams) {
    let mut rng = RngContract::new(seed, 99).rng();
    let m = rng.random_range(2..=3);
    let n = rng.random_range(5..=30);
    let mu: Vec<f64> = (0..m).map(|_| rng.random_range(0.3..4.0)).collect();
    let lambda = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.1..2.0) };
    let params = ModelParams::new(lambda, mu).unwrap();
    let data = cshock::model::sample_dataset_with(&params, n, &mut rng).unwrap();
    (data, params)
}
