//! The compact symbols used by the correction-factor formulas.
//!
//! | token | engine call |
//! |---|---|
//! | `p_1` | `ctx.p1` = `prod_poly(PolyCoeffs::new([0, 1]))` |
//! | `p_{11}` | `prod_poly([1, 1])` = `prod_j (1 + mu_j)` |
//! | `p_{21}`, `p_{12}`, `p_{31}` | `prod_poly([2, 1])`, `([1, 2])`, `([3, 1])` |
//! | `p_{131}`, `p_{241}`, `p_{451}` | `prod_poly([1, 3, 1])`, `([2, 4, 1])`, `([4, 5, 1])` |
//! | `p_{452}` (second-moment display) | `prod_poly([4, 5, 1])`, see [`Symbols::p451`] |
//! | `p_{1761}` | `prod_poly([1, 7, 6, 1])` |
//! | `s_k` | `ctx.s1`, `ctx.s2`, `ctx.s3` = `sum_rational(k, [1], [1])` |
//! | `s_k^{(11)}` | `ctx.s2_11`, `ctx.s3_11` = `sum_rational(k, [1], [1, 1])` |
//! | `s_{0;11}`, `s_{1;11}` | `sum_rational(0 or 1, [1, 1], [1])` |
//! | `s_{1;11}^{(12)}` | `sum_rational(1, [1, 1], [1, 2])` |
//! | `s_{1;21}^{(43)}` | `sum_rational(1, [2, 1], [4, 3])` |
//! | `s_{1;131}^{(163)}` | `sum_rational(1, [1, 3, 1], [1, 6, 3])` |
//! | `s_{2;11}^{(151)}` | `sum_rational(2, [1, 1], [1, 5, 1])` |
//! | `s_{2;121}^{(144)}` | `sum_rational(2, [1, 2, 1], [1, 4, 4])` |
//! | `s_{0;131}^{(11)}` | `sum_rational(0, [1, 3, 1], [1, 1])` |
//! | `s_{21}`, `s_{0;21}` | `sum_rational(0, [2, 1], [1])` |
//! | `s_{12}`, `s_{0;12}` | `sum_rational(0, [1, 2], [1])` |
//! | `s_{1;12}` | `sum_rational(1, [1, 2], [1])` |
//! | `d_{10}` | `ctx.d10` = `p_{11} - p_1 (1 + s_1)` |

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coefficients `(a, b, c, d)` of `a + b mu + c mu^2 + d mu^3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolyCoeffs {
    coeffs: [i64; 4],
    len: usize,
}

impl PolyCoeffs {
    /// Panics on more than four coefficients or all zeros; meant for literals.
    pub const fn new<const N: usize>(coeffs: [i64; N]) -> Self {
        assert!(N >= 1 && N <= 4, "at most a cubic");
        let mut out = [0i64; 4];
        let mut nonzero = false;
        let mut i = 0;
        while i < N {
            out[i] = coeffs[i];
            nonzero |= coeffs[i] != 0;
            i += 1;
        }
        assert!(nonzero, "polynomial must not vanish identically");
        Self {
            coeffs: out,
            len: N,
        }
    }

    pub fn try_from_slice(coeffs: &[i64]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > 4 {
            return Err(Error::invalid(format!(
                "expected 1 to 4 coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().all(|&c| c == 0) {
            return Err(Error::invalid("polynomial must not vanish identically"));
        }
        let mut out = [0i64; 4];
        out[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Self {
            coeffs: out,
            len: coeffs.len(),
        })
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs[..self.len]
    }

    pub fn eval<S: Scalar>(&self, x: S) -> S {
        self.coefficients()
            .iter()
            .rev()
            .fold(S::zero(), |acc, &c| acc * x + S::int(c))
    }
}

pub(crate) const ONE: PolyCoeffs = PolyCoeffs::new([1]);
pub(crate) const P11: PolyCoeffs = PolyCoeffs::new([1, 1]);
pub(crate) const P21: PolyCoeffs = PolyCoeffs::new([2, 1]);
pub(crate) const P12: PolyCoeffs = PolyCoeffs::new([1, 2]);
pub(crate) const P31: PolyCoeffs = PolyCoeffs::new([3, 1]);
pub(crate) const P131: PolyCoeffs = PolyCoeffs::new([1, 3, 1]);
pub(crate) const P241: PolyCoeffs = PolyCoeffs::new([2, 4, 1]);
pub(crate) const P451: PolyCoeffs = PolyCoeffs::new([4, 5, 1]);
pub(crate) const P1761: PolyCoeffs = PolyCoeffs::new([1, 7, 6, 1]);
const P121: PolyCoeffs = PolyCoeffs::new([1, 2, 1]);
const P43: PolyCoeffs = PolyCoeffs::new([4, 3]);
const P163: PolyCoeffs = PolyCoeffs::new([1, 6, 3]);
const P151: PolyCoeffs = PolyCoeffs::new([1, 5, 1]);
const P144: PolyCoeffs = PolyCoeffs::new([1, 4, 4]);

/// The rates together with the power sums every formula uses.
#[derive(Clone, Debug)]
pub struct NotationContext<S> {
    mu: Vec<S>,
    pub p1: S,
    pub s1: S,
    pub s2: S,
    pub s3: S,
    /// `s_2^{(11)} = sum_j mu_j^-2 (1 + mu_j)`.
    pub s2_11: S,
    /// `s_3^{(11)} = sum_j mu_j^-3 (1 + mu_j)`.
    pub s3_11: S,
    pub d10: S,
}

impl<S: Scalar> NotationContext<S> {
    pub fn new(mu: &[S]) -> Result<Self> {
        if mu.len() < 2 {
            return Err(Error::invalid(format!(
                "need m >= 2 rates, got {}",
                mu.len()
            )));
        }
        if let Some(bad) = mu.iter().find(|&&x| !(x > S::zero())) {
            return Err(Error::domain(format!(
                "rates must be positive, got {}",
                bad.to_real()
            )));
        }
        let mut ctx = Self {
            mu: mu.to_vec(),
            p1: S::zero(),
            s1: S::zero(),
            s2: S::zero(),
            s3: S::zero(),
            s2_11: S::zero(),
            s3_11: S::zero(),
            d10: S::zero(),
        };
        ctx.p1 = ctx.prod_poly(&PolyCoeffs::new([0, 1]));
        ctx.s1 = ctx.sum_rational(1, &ONE, &ONE)?;
        ctx.s2 = ctx.sum_rational(2, &ONE, &ONE)?;
        ctx.s3 = ctx.sum_rational(3, &ONE, &ONE)?;
        ctx.s2_11 = ctx.sum_rational(2, &ONE, &P11)?;
        ctx.s3_11 = ctx.sum_rational(3, &ONE, &P11)?;
        ctx.d10 = ctx.prod_poly(&P11) - ctx.p1 * (S::one() + ctx.s1);
        if !(ctx.d10 > S::zero()) {
            return Err(Error::Internal(format!(
                "d10 = {} is not positive",
                ctx.d10.to_real()
            )));
        }
        Ok(ctx)
    }

    pub fn mu(&self) -> &[S] {
        &self.mu
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }

    /// `prod_j poly(mu_j)`.
    pub fn prod_poly(&self, poly: &PolyCoeffs) -> S {
        self.mu.iter().fold(S::one(), |acc, &x| acc * poly.eval(x))
    }

    /// `sum_j mu_j^-a num(mu_j) / den(mu_j)`.
    pub fn sum_rational(&self, a: u32, den: &PolyCoeffs, num: &PolyCoeffs) -> Result<S> {
        let mut total = S::zero();
        for &x in &self.mu {
            let d = den.eval(x);
            if d == S::zero() {
                return Err(Error::domain(format!(
                    "denominator {:?} vanishes at mu = {}",
                    den.coefficients(),
                    x.to_real()
                )));
            }
            let mut term = num.eval(x) / d;
            for _ in 0..a {
                term = term / x;
            }
            total = total + term;
        }
        Ok(total)
    }
}

/// Every named product and weighted sum, evaluated once.
#[derive(Clone, Debug)]
pub struct Symbols<S> {
    pub p11: S,
    pub p21: S,
    pub p12: S,
    pub p31: S,
    pub p131: S,
    pub p241: S,
    /// `prod_j (4 + 5 mu_j + mu_j^2)`, the `E{X^3 (X - 1)}` factor. The
    /// second-moment display prints it as `p_{452}`; only `(4, 5, 1)`
    /// reproduces the moment and makes both routes to `R` agree.
    pub p451: S,
    pub p1761: S,
    pub s0_11: S,
    pub s1_11: S,
    pub s1_11_12: S,
    pub s1_21_43: S,
    pub s1_131_163: S,
    pub s2_11_151: S,
    pub s2_121_144: S,
    pub s0_131_11: S,
    pub s0_21: S,
    pub s0_12: S,
    pub s1_12: S,
}

impl<S: Scalar> Symbols<S> {
    pub fn new(ctx: &NotationContext<S>) -> Result<Self> {
        Ok(Self {
            p11: ctx.prod_poly(&P11),
            p21: ctx.prod_poly(&P21),
            p12: ctx.prod_poly(&P12),
            p31: ctx.prod_poly(&P31),
            p131: ctx.prod_poly(&P131),
            p241: ctx.prod_poly(&P241),
            p451: ctx.prod_poly(&P451),
            p1761: ctx.prod_poly(&P1761),
            s0_11: ctx.sum_rational(0, &P11, &ONE)?,
            s1_11: ctx.sum_rational(1, &P11, &ONE)?,
            s1_11_12: ctx.sum_rational(1, &P11, &P12)?,
            s1_21_43: ctx.sum_rational(1, &P21, &P43)?,
            s1_131_163: ctx.sum_rational(1, &P131, &P163)?,
            s2_11_151: ctx.sum_rational(2, &P11, &P151)?,
            s2_121_144: ctx.sum_rational(2, &P121, &P144)?,
            s0_131_11: ctx.sum_rational(0, &P131, &P11)?,
            s0_21: ctx.sum_rational(0, &P21, &ONE)?,
            s0_12: ctx.sum_rational(0, &P12, &ONE)?,
            s1_12: ctx.sum_rational(1, &P12, &ONE)?,
        })
    }
}
