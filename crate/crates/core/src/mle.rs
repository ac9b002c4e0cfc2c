//! Maximum likelihood for `lambda` on `[0, min_j ybar_j)`.
//!
//! When the score at zero is positive, the first root is bracketed between `0`
//! and a probe near the upper end and polished with Brent's method. The
//! profile likelihood is not always unimodal on small samples (rows (3,4),
//! (4,3) fall at zero and peak near 2.7), so every fit, including one the
//! screen stops at zero, is compared against an even grid and re-solved near
//! any better grid point.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::likelihood::LikelihoodContext;
use crate::model::{CountMatrix, SufficientStats};
use crate::scalar::{real, Real};

/// `true` iff `l'(0) > 0`, i.e. the mixed moment exceeds the product of means.
pub fn positivity_screen(stats: &SufficientStats) -> bool {
    stats.score_sign_at_zero() == Ordering::Greater
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// Stop once the bracket width falls below `rel_tol * lambda`.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Points in the post-fit optimality scan. With 0 there is no scan and a
    /// negative screen ends the fit at zero.
    pub verify_grid: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 200,
            verify_grid: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MleResult<F = f64> {
    pub lambda_hat: F,
    pub loglik_at_hat: F,
    /// `lambda_hat == 0`.
    pub at_boundary: bool,
    /// The likelihood still increased at the last representable probe below
    /// `min_j ybar_j`; happens when one column is the row minimum in every row.
    pub at_upper: bool,
    pub iterations: usize,
    pub converged: bool,
}

/// Fits `lambda` with default options except the tolerance.
pub fn fit_lambda(data: &CountMatrix, rel_tol: f64) -> Result<MleResult> {
    let ctx = LikelihoodContext::<f64>::new(data);
    fit_lambda_with(
        &ctx,
        FitOptions {
            rel_tol,
            ..FitOptions::default()
        },
    )
}

pub fn fit_lambda_with<F: Real>(
    ctx: &LikelihoodContext<'_, F>,
    opts: FitOptions,
) -> Result<MleResult<F>> {
    let boundary = |iterations| MleResult {
        lambda_hat: F::zero(),
        loglik_at_hat: ctx.loglik_null(),
        at_boundary: true,
        at_upper: false,
        iterations,
        converged: true,
    };
    let upper = ctx.lambda_upper();
    let sign = ctx.stats().score_sign_at_zero();
    if !(upper > F::zero()) {
        return Ok(boundary(0));
    }
    let dominated = ctx.stats().minimum_column_dominates();

    let score = |x: F| ctx.score_sign_factor(x);
    let edge = || -> Result<MleResult<F>> {
        let lambda_hat = probe(upper, PROBE_LIMIT);
        Ok(MleResult {
            lambda_hat,
            loglik_at_hat: ctx.loglik(lambda_hat)?,
            at_boundary: false,
            at_upper: true,
            iterations: PROBE_LIMIT as usize,
            converged: true,
        })
    };
    // With l'(0) = 0 exactly, the sign just above zero decides.
    let start = match sign {
        Ordering::Equal => upper * real::<F>(TIE_OFFSET),
        _ => F::zero(),
    };
    // Falling at zero does not rule out a higher mode further in, nor a
    // bounded climb to the upper end under a dominant column; the grid scan
    // in `finish` looks for the former.
    if sign == Ordering::Less || (sign == Ordering::Equal && !(score(start)? > F::zero())) {
        let mut best = boundary(0);
        if dominated {
            let limit = edge()?;
            if limit.loglik_at_hat > best.loglik_at_hat {
                best = limit;
            }
        }
        return finish(ctx, best, opts);
    }
    let Some((lo, hi, probes)) = bracket_below(upper, start, &score)? else {
        return edge();
    };
    let (root, steps) = brent_root(&score, lo, hi, opts)?;
    let best = MleResult {
        lambda_hat: root,
        loglik_at_hat: ctx.loglik(root)?,
        at_boundary: false,
        at_upper: false,
        iterations: probes + steps,
        converged: true,
    };
    if dominated {
        // The score cancels to noise near the upper end here; decide on l itself.
        let limit = edge()?;
        if limit.loglik_at_hat >= best.loglik_at_hat {
            return Ok(limit);
        }
    }

    finish(ctx, best, opts)
}

fn finish<F: Real>(
    ctx: &LikelihoodContext<'_, F>,
    mut best: MleResult<F>,
    opts: FitOptions,
) -> Result<MleResult<F>> {
    if opts.verify_grid > 0 {
        best = verify_on_grid(ctx, best, opts)?;
    }
    if best.loglik_at_hat < ctx.loglik_null() {
        let iterations = best.iterations;
        return Ok(MleResult {
            lambda_hat: F::zero(),
            loglik_at_hat: ctx.loglik_null(),
            at_boundary: true,
            at_upper: false,
            iterations,
            converged: true,
        });
    }
    Ok(best)
}

/// Where the search starts, relative to the upper end, when `l'(0) = 0`.
const TIE_OFFSET: f64 = 1.0 / 1_073_741_824.0;

const PROBE_LIMIT: i32 = 52;

fn probe<F: Real>(upper: F, k: i32) -> F {
    upper * (F::one() - real::<F>(2f64.powi(-k)))
}

/// Walks `upper (1 - 2^-k)` upward from `start` until the score turns
/// negative. `None` if it never does before the float grid runs out.
fn bracket_below<F: Real>(
    upper: F,
    start: F,
    score: &impl Fn(F) -> Result<F>,
) -> Result<Option<(F, F, usize)>> {
    let mut lo = start;
    for k in 1..=PROBE_LIMIT {
        let x = probe(upper, k);
        if x <= lo {
            continue;
        }
        if score(x)? < F::zero() {
            return Ok(Some((lo, x, k as usize)));
        }
        lo = x;
    }
    Ok(None)
}

/// Brent's zero finder on `[a, b]` with `f(a) > 0 > f(b)`.
fn brent_root<F: Real>(
    f: &impl Fn(F) -> Result<F>,
    a: F,
    b: F,
    opts: FitOptions,
) -> Result<(F, usize)> {
    let two = real::<F>(2.0);
    let half = real::<F>(0.5);
    let three = real::<F>(3.0);
    let eps = F::epsilon();
    let rel_tol = real::<F>(opts.rel_tol);

    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=opts.max_iter {
        if (fb > F::zero()) == (fc > F::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * eps * b.abs() + half * rel_tol * b.abs();
        let xm = half * (c - b);
        if xm.abs() <= tol || fb == F::zero() {
            return Ok((b, iter));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = F::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qa * (qa - r) - (b - a) * (r - F::one()));
                q = (qa - F::one()) * (r - F::one()) * (s - F::one());
            }
            if p > F::zero() {
                q = -q;
            }
            p = p.abs();
            if two * p < (three * xm * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol {
            b + d
        } else if xm > F::zero() {
            b + tol
        } else {
            b - tol
        };
        fb = f(b)?;
    }
    let (lo, hi) = if b < c { (b, c) } else { (c, b) };
    Err(Error::NonConvergence {
        lo: lo.to_real(),
        hi: hi.to_real(),
        iterations: opts.max_iter,
    })
}

/// Rescans `l` on an even grid; a grid point beating the root means a second
/// mode, which is then bracketed and solved locally.
fn verify_on_grid<F: Real>(
    ctx: &LikelihoodContext<'_, F>,
    found: MleResult<F>,
    opts: FitOptions,
) -> Result<MleResult<F>> {
    let upper = ctx.lambda_upper();
    let points = opts.verify_grid;
    let step = upper / real::<F>(points as f64);
    let mut best_k = 0;
    let mut best_val = ctx.loglik_null();
    for k in 1..points {
        let v = ctx.loglik(step * real::<F>(k as f64))?;
        if v > best_val {
            best_val = v;
            best_k = k;
        }
    }
    let slack = real::<F>(1e-8) * found.loglik_at_hat.abs();
    if best_val <= found.loglik_at_hat + slack {
        return Ok(found);
    }

    let score = |x: F| ctx.score_sign_factor(x);
    let lo = step * real::<F>(best_k.saturating_sub(1) as f64);
    let mut iterations = found.iterations;
    let local = if best_k + 1 < points {
        let hi = step * real::<F>((best_k + 1) as f64);
        if score(lo)? > F::zero() && score(hi)? < F::zero() {
            let (root, steps) = brent_root(&score, lo, hi, opts)?;
            iterations += steps;
            Some(root)
        } else {
            None
        }
    } else {
        bracket_below(upper, lo, &score)?.map(|(a, b, _)| brent_root(&score, a, b, opts)).transpose()?.map(|(root, steps)| {
            iterations += steps;
            root
        })
    };

    let mut candidate = (step * real::<F>(best_k as f64), best_val);
    if let Some(root) = local {
        let v = ctx.loglik(root)?;
        if v > candidate.1 {
            candidate = (root, v);
        }
    }
    Ok(MleResult {
        lambda_hat: candidate.0,
        loglik_at_hat: candidate.1,
        at_boundary: candidate.0 == F::zero(),
        at_upper: false,
        iterations,
        converged: local.is_some(),
    })
}
