//! The `O(1/n)` correction to the mean of the likelihood-ratio statistic.
//!
//! `E(Q_n) / 2 = 1/2 + R / n`. Critical values scale by `1 + R_corr / n`
//! with `R_corr = 2R`, because conditioning on `lambda_hat > 0` doubles the
//! unconditional coefficient.
//!
//! Three routes to `R`: the closed form for two rates, the general `K`
//! expression, and the `rho0 + rho1 + rho2` assembly. The two general routes
//! cancel heavily (about seven digits for `m = 2`), so the `f64` entry points
//! evaluate them in [`DoubleDouble`] and round once at the end.

mod kformula;
mod notation;
mod rho;

pub use kformula::{k_blocks, KBlocks};
pub use notation::{NotationContext, PolyCoeffs, Symbols};
pub use rho::{rho_chain, RhoIntermediates};

use crate::error::{Error, Result};
use crate::model::{validate_rates, SufficientStats};
use crate::scalar::{DoubleDouble, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedFormM2,
    KFormula,
    RhoChain,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::ClosedFormM2 => "closed-form-m2",
            Method::KFormula => "k-formula",
            Method::RhoChain => "rho-chain",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BartlettReport<S = f64> {
    /// Coefficient in `E(Q_n) / 2 = 1/2 + R / n`.
    pub r: S,
    /// `2 R`, the coefficient used in critical values.
    pub r_corr: S,
    pub method: Method,
}

impl<S: Scalar> BartlettReport<S> {
    fn new(r: S, method: Method) -> Self {
        Self {
            r,
            r_corr: r + r,
            method,
        }
    }

    pub fn to_f64(&self) -> BartlettReport<f64> {
        BartlettReport {
            r: self.r.to_real(),
            r_corr: self.r_corr.to_real(),
            method: self.method,
        }
    }
}

/// `R = (1 + 9 mu1 + 9 mu2 + 15 mu1 mu2) / (12 mu1 mu2)`.
pub fn r_m2<S: Scalar>(mu1: S, mu2: S) -> Result<BartlettReport<S>> {
    if !(mu1 > S::zero() && mu2 > S::zero()) {
        return Err(Error::domain(format!(
            "rates must be positive, got ({}, {})",
            mu1.to_real(),
            mu2.to_real()
        )));
    }
    let k = S::int;
    let r = (S::one() + k(9) * mu1 + k(9) * mu2 + k(15) * mu1 * mu2) / (k(12) * mu1 * mu2);
    Ok(BartlettReport::new(r, Method::ClosedFormM2))
}

/// `K` and its blocks in the scalar type of `mu`.
pub fn k_formula_in<S: Scalar>(mu: &[S]) -> Result<(S, KBlocks<S>, NotationContext<S>)> {
    let ctx = NotationContext::new(mu)?;
    let sym = Symbols::new(&ctx)?;
    let blocks = k_blocks(&ctx, &sym);
    Ok((blocks.total(ctx.d10), blocks, ctx))
}

/// `R = -K / (24 d10^3 p1)` in the scalar type of `mu`.
pub fn r_general_in<S: Scalar>(mu: &[S]) -> Result<BartlettReport<S>> {
    let (k, _, ctx) = k_formula_in(mu)?;
    let r = -k / (S::int(24) * ctx.d10.cube() * ctx.p1);
    Ok(BartlettReport::new(r, Method::KFormula))
}

/// The intermediates of the `rho` assembly in the scalar type of `mu`.
pub fn rho_intermediates_in<S: Scalar>(mu: &[S]) -> Result<RhoIntermediates<S>> {
    let ctx = NotationContext::new(mu)?;
    let sym = Symbols::new(&ctx)?;
    Ok(rho_chain(&ctx, &sym))
}

pub fn r_via_rho_chain_in<S: Scalar>(mu: &[S]) -> Result<BartlettReport<S>> {
    Ok(BartlettReport::new(
        rho_intermediates_in(mu)?.r(),
        Method::RhoChain,
    ))
}

fn extended(mu: &[f64]) -> Result<Vec<DoubleDouble>> {
    validate_rates(mu)?;
    Ok(mu.iter().map(|&x| DoubleDouble::from(x)).collect())
}

/// General-`m` closed form, evaluated in double-double.
pub fn r_general(mu: &[f64]) -> Result<BartlettReport> {
    Ok(r_general_in(&extended(mu)?)?.to_f64())
}

/// `rho0 + rho1 + rho2`, evaluated in double-double.
pub fn r_via_rho_chain(mu: &[f64]) -> Result<BartlettReport> {
    Ok(r_via_rho_chain_in(&extended(mu)?)?.to_f64())
}

/// The cheapest exact route: the closed form for two rates, `K` otherwise.
pub fn r_at(mu: &[f64]) -> Result<BartlettReport> {
    match *mu {
        [a, b] => r_m2(a, b),
        _ => r_general(mu),
    }
}

/// Plug-in estimate with `ybar_j` in place of `mu_j`.
pub fn r_hat(stats: &SufficientStats) -> Result<BartlettReport> {
    let means = stats.col_means();
    if means.iter().any(|&y| y <= 0.0) {
        return Err(Error::domain(
            "plug-in correction needs every column mean positive",
        ));
    }
    r_at(means)
}
