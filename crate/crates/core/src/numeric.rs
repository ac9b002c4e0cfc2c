//! Shared numerical kernels: the one-degree-of-freedom chi-square,
//! log-factorials, and the random-stream contract with Poisson variates.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Upper tail `P(chi2_1 > q)`.
pub fn chi2_1_upper_tail(q: f64) -> f64 {
    if q <= 0.0 {
        return 1.0;
    }
    libm::erfc((0.5 * q).sqrt())
}

/// The `q` with `P(chi2_1 > q) = p`.
///
/// `q = z^2` where `z` is the standard normal upper `p/2` quantile, seeded
/// by Acklam's rational approximation and polished with one Newton step on
/// `erfc`.
pub fn chi2_1_upper_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "chi-square quantile needs 0 < p < 1, got {p}"
        )));
    }
    let z = normal_upper_quantile(0.5 * p);
    Ok(z * z)
}

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

fn normal_upper_quantile(p: f64) -> f64 {
    // Acklam works with the lower tail; z_upper(p) = -z_lower(p).
    let z = -acklam_lower(p);
    let density = (-0.5 * z * z).exp() / SQRT_2PI;
    if density == 0.0 {
        return z;
    }
    let excess = 0.5 * libm::erfc(z / std::f64::consts::SQRT_2) - p;
    z + excess / density
}

#[allow(clippy::excessive_precision)]
fn acklam_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

const LOG_FACTORIAL_TABLE_MAX: usize = 1024;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LOG_FACTORIAL_TABLE_MAX + 1);
        table.push(0.0);
        // Neumaier-compensated running sum of ln i.
        let (mut sum, mut carry) = (0.0_f64, 0.0_f64);
        for i in 1..=LOG_FACTORIAL_TABLE_MAX {
            let term = (i as f64).ln();
            let t = sum + term;
            carry += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
            table.push(sum + carry);
        }
        table
    })
}

/// `ln k!`, tabulated up to 1024 and continued by `lgamma` above.
pub fn log_factorial(k: u64) -> f64 {
    match usize::try_from(k) {
        Ok(i) if i <= LOG_FACTORIAL_TABLE_MAX => log_factorial_table()[i],
        _ => libm::lgamma(k as f64 + 1.0),
    }
}

/// The random-stream contract: `(seed, stream)` fixes the whole draw sequence.
///
/// Backed by ChaCha8, whose 64-bit stream selector gives independent
/// sequences per replication without any coordination between workers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngContract {
    pub seed: u64,
    pub stream: u64,
}

impl RngContract {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Contract for replication `replication` of experiment `experiment`.
    pub fn for_replication(seed: u64, experiment: u64, replication: u64) -> Self {
        Self::new(seed, stream_id(experiment, replication))
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stream selector `hash(experiment, replication)`.
pub fn stream_id(experiment: u64, replication: u64) -> u64 {
    splitmix64(splitmix64(experiment) ^ replication)
}

const INVERSION_CUTOFF: f64 = 10.0;

/// One Poisson variate.
///
/// Sequential-search inversion below mean 10, Hörmann's PTRS transformed
/// rejection from 10 up.
pub fn poisson_draw<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean < INVERSION_CUTOFF {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut pmf = (-mean).exp();
    let mut cdf = pmf;
    while u > cdf {
        k += 1;
        pmf *= mean / k as f64;
        if pmf == 0.0 {
            break;
        }
        cdf += pmf;
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);

    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - log_factorial(k as u64);
        if lhs <= rhs {
            return k as u64;
        }
    }
}
