//! The closed form `R = -K / (24 d10^3 p1)`.
//!
//! `K = A + 3 (B1 + B2 + B3 + B4) + d10 (C1 + C2 + C3)`, one block per
//! bracketed group of the printed expression.

use super::notation::{NotationContext, Symbols};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KBlocks<S> {
    /// `6 d10^2 p1 {...}`.
    pub a: S,
    /// `4 p131^2 - 8 p1 p131 {...}`.
    pub b1: S,
    /// `p1^2 [...]`.
    pub b2: S,
    /// `p1^4 {...}`.
    pub b3: S,
    /// `2 p1^3 [...]`.
    pub b4: S,
    /// `-8 p131 - 6 p1761 + 3 p1 (...)`.
    pub c1: S,
    /// `4 p1^2 [...]`.
    pub c2: S,
    /// `3 p1^3 {...}`, the only block with explicit `m`.
    pub c3: S,
}

impl<S: Scalar> KBlocks<S> {
    pub fn total(&self, d10: S) -> S {
        self.a
            + S::int(3) * (self.b1 + self.b2 + self.b3 + self.b4)
            + d10 * (self.c1 + self.c2 + self.c3)
    }
}

pub fn k_blocks<S: Scalar>(ctx: &NotationContext<S>, sym: &Symbols<S>) -> KBlocks<S> {
    let k = S::int;
    let (p1, s1, s2, s3, d10) = (ctx.p1, ctx.s1, ctx.s2, ctx.s3, ctx.d10);
    let m = k(ctx.m() as i64);
    let Symbols {
        p11,
        p21,
        p12,
        p131,
        p241,
        p451,
        p1761,
        s0_11,
        s1_11,
        s1_11_12,
        s1_21_43,
        s2_11_151,
        s2_121_144,
        s0_131_11,
        s0_21,
        s0_12,
        s1_12,
        ..
    } = *sym;
    let p1_2 = p1 * p1;
    let p1_3 = p1_2 * p1;
    let p1_4 = p1_3 * p1;
    let s1_2 = s1 * s1;
    let s1_3 = s1_2 * s1;
    let one_s12 = S::one() + s1_11_12;

    let a = k(6)
        * d10.square()
        * p1
        * (-k(2) * (p11 + k(6) * p11 * s0_11 + k(2) * s1)
            + p1 * (k(2) + k(12) * s1 + k(5) * s1_2 - k(17) * s2));

    let b1 = k(4) * p131.square()
        - k(8) * p1 * p131 * (p21 + p11 * (S::one() + s0_11 + s1_11_12));

    let b2 = p1_2
        * (k(8) * p131 + p21.square() + k(24) * p131 * s1 + k(8) * p131 * s1_2
            + k(4) * p11 * p21 * (k(5) + k(5) * s0_11 - k(9) * s1 + k(5) * s1_11_12)
            - k(4)
                * p11.square()
                * (k(15) * s1_2 - k(18) * s1 * one_s12 + k(2) * one_s12.square()
                    + s0_11 * (k(4) - k(6) * s1 + k(4) * s1_11_12))
            - k(8) * p131 * s2);

    let b3 = p1_4
        * (S::one() + k(40) * s1_3 + k(9) * s1_2 * s1_2 + k(10) * s2 - k(15) * s2.square()
            + k(8) * s1 * (k(3) + s2)
            + s1_2 * (k(58) + k(6) * s2));

    let b4 = k(2)
        * p1_3
        * (-p21 * (k(7) + k(12) * s1 + s1_2 - k(13) * s2)
            + k(2)
                * p11
                * (-k(3) * s1_3 - s1_2 * (k(17) + k(5) * s1_11_12)
                    - k(3) * s1 * (k(5) + k(2) * s1_11_12 - k(5) * s2)
                    + s0_11 * (S::one() + k(2) * s1 + k(3) * s1_2 - k(3) * s2)
                    - one_s12 * (-S::one() + k(7) * s2)));

    let c1 = -k(8) * p131 - k(6) * p1761
        + k(3)
            * p1
            * (k(4) * p11.square() + k(4) * p21 - p241 + k(4) * p451
                + k(4) * p131 * s0_131_11
                + k(8) * p11 * s1);

    let c2 = k(4)
        * p1_2
        * (-S::one() - k(3) * p21 - k(6) * s1 + k(27) * p21 * s1 - k(3) * s1_2
            + k(6) * p12 * s1 * s0_12
            - k(6) * p12 * s1_12
            - k(3) * p21 * s1_21_43
            - s2
            - k(6) * p21 * s0_21
            + k(3)
                * p11
                * (-S::one() + k(2) * s0_11 + k(18) * s1_2 + k(2) * s1_11 + k(2) * s1_11_12
                    + s1_11_12.square()
                    - s1 * (k(19) + s1_11 + k(16) * s1_11_12)
                    + k(3) * s2
                    + s2_11_151
                    - s2_121_144));

    let c3 = k(3)
        * p1_3
        * (k(3) - k(4) * (m - k(9)) * s1_2 + k(4) * s1_3 + k(4) * (m - k(4)) * s2
            - k(4) * s1 * (-k(7) + k(4) * s2 + ctx.s2_11)
            - k(6) * s3
            + k(4) * ctx.s3_11);

    KBlocks {
        a,
        b1,
        b2,
        b3,
        b4,
        c1,
        c2,
        c3,
    }
}
