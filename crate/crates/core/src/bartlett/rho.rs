//! `R = rho0 + rho1 + rho2`, assembled from the expectation formulas
//! without going through `K`.

use super::notation::{NotationContext, Symbols};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoIntermediates<S> {
    pub eta: S,
    /// `E(S'^2)`, which equals `p1 d10`.
    pub e_s2: S,
    pub e_sx: S,
    pub e_s2x: S,
    pub e_s2x_dot: S,
    pub e_x2_dot: S,
    pub e_vx: S,
    pub e_zx: S,
    pub e_sz: S,
    pub e_s2z: S,
    pub e_zv: S,
    pub e_seps3: S,
    /// `sum over (m-2)-subsets of prod mu`; 1 when `m = 2`.
    pub musum: S,
    pub d20: S,
    pub d330: S,
    pub d340: S,
    pub q1: S,
    pub q2: S,
    pub q3: S,
    pub rho0: S,
    pub rho1: S,
    pub rho2: S,
}

impl<S: Scalar> RhoIntermediates<S> {
    pub fn r(&self) -> S {
        self.rho0 + self.rho1 + self.rho2
    }
}

pub fn rho_chain<S: Scalar>(ctx: &NotationContext<S>, sym: &Symbols<S>) -> RhoIntermediates<S> {
    let k = S::int;
    let half = S::ratio(1, 2);
    let three_halves = S::ratio(3, 2);
    let (p1, s1, s2, s3, d10) = (ctx.p1, ctx.s1, ctx.s2, ctx.s3, ctx.d10);
    let m = k(ctx.m() as i64);
    let Symbols {
        p11,
        p21,
        p12,
        p31,
        p131,
        p241,
        p451,
        p1761,
        s0_11,
        s1_11,
        s1_11_12,
        s1_21_43,
        s1_131_163,
        s2_11_151,
        s2_121_144,
        s0_131_11,
        s0_21,
        s0_12,
        s1_12,
    } = *sym;
    let p1_2 = p1 * p1;
    let p1_3 = p1_2 * p1;
    let p1_4 = p1_3 * p1;
    let s1_2 = s1 * s1;
    let pair_sum = s1_2 - s2;

    let musum = half * p1 * pair_sum;
    let eta = p1_2 * (p11 * s1_11 - p1 * s2);
    let e_s2 = p1 * p11 - p1_2 * (S::one() + s1);

    let e_x2_dot = p1 * (p1 * p241 + p1761 - k(2) * p1 * p451 - p1 * (p1 - p11).square());

    let e_sx = p1
        * (p1 * p21 - p131 - p1_2 - k(2) * p1_2 * s1 + p1 * p11 + p1 * p11 * s1_11_12);

    let e_s2x = p1 * (p1 * p451 - p1761)
        - k(2) * p1_2 * (p1 * p21 - p131)
        - k(2) * p1_2 * (p1 * p21 * s1_21_43 - p131 * s1_131_163)
        + p1_3 * (p1 - p11)
        + k(2) * p1_3 * (k(2) * p1 * s1 - p11 * s1_11_12)
        + p1_3
            * (p1 * s1 * (k(4) * s1 + S::one()) - p11 * s2_11_151 - p11 * s1_11_12.square()
                + p11 * s2_121_144);

    let e_s2x_dot = e_s2x - p1_2 * d10 * (p1 - p11);

    let e_vx = p1_2 * (k(2) * p1 * s1 - p11 * s1_11_12);

    let e_zx = p1_2 * p21 * s0_21 - p1 * p131 * s0_131_11 - p1_2 * s1 * (p1 - p11);

    let e_sz = p1 * p11 * s0_11 - p1_2 * (s1 + s1_2 - s2);

    let e_s2z = p1 * p131 * s0_131_11
        - p1_2 * (p11 * (s1 + k(2) * s0_11 + k(2) * s1_11) + k(2) * p12 * (s1 * s0_12 - s1_12))
        + p1_3
            * (k(2) * s1 + k(2) * s1_2 + (m - S::one()) * pair_sum + s1 * ctx.s2_11
                - ctx.s3_11);

    let e_zv = p1_2 * pair_sum;

    let e_seps3 = half * p1_3 * p31 - three_halves * p1_2 * p451 + p1 * p1761
        - half * p1_4
        + three_halves * p1_3 * p21
        - p1_2 * p131
        - three_halves * p1_4 * s1
        + three_halves * p1_3 * p21 * s1_21_43
        - p1_2 * p131 * s1_131_163;

    let d20 = p1 * s1 - p11 * s1 + half * p1 - three_halves * p21 + p131 / p1 - half * p1 * pair_sum;

    let d330 = p1_3 * (three_halves * s1_2 + half * s2) + k(3) * p1_2 * s1 * (p1 - p11)
        + half * p1_3
        - three_halves * p1_2 * p21
        + p1 * p131;

    let d340 = p1_4 * (S::ratio(2, 3) * s1_2 * s1 + k(2) * s1 * s2 + S::ratio(1, 3) * s3)
        + k(2) * p1_3 * (k(2) * s1_2 + s2) * (p1 - p11)
        + k(2) * p1_4 * s1
        - k(6) * p1_3 * p21 * s1
        + k(4) * p1_2 * p131 * s1
        + S::ratio(1, 6) * p1_4
        - S::ratio(2, 3) * p1_3 * p31
        - half * p1_2 * p241
        + k(2) * p1_2 * p451
        - p1 * p1761;

    let q1 = p1 * s1 - p11 * s1 - half * p1 * pair_sum;
    let q2 = half * p1 - three_halves * p21 + p131 / p1;
    let q3 = p1_3 * (three_halves * s1_2 + half * s2) + k(3) * p1_2 * s1 * (p1 - p11);

    let inner = half * e_s2x_dot + half * p1 * e_s2z + p1_2 * s1 * d10 + half * p1 * s1 * eta
        + e_sx.square() / (p1 * d10)
        + k(3) * p1 * d10 * e_sz
        + half * p1_3 * d10 * pair_sum
        + k(2) / d10 * e_sz * e_sx
        + p1 * (half / p1 * e_x2_dot + e_zx + k(6) * s1 * e_sx + s1 * e_vx
            + k(2) * p1_3 * s1 * pair_sum
            + half * p1_3 * s3);
    let rho0 = -half / d10 * musum + inner / (p1_2 * d10.square());

    let rho1 = k(3) * d20 / d10.cube() * (e_sz + k(2) * p1 * d10 * s1)
        + d330 / (k(3) * p1_2 * d10.square())
        + k(3) * e_sx * d330 / (p1_3 * d10.cube())
        + three_halves * p1 / d10 * (s1_2 + s2)
        + k(3) * s1 * e_sx / (p1 * d10.square())
        + e_seps3 / (p1_2 * d10.square());

    let rho2 = k(3) / (k(4) * p1_2 * d10.cube())
        * (k(2) * p1_3 * (q2.square() - q1.square()) + k(4) * p1 * q3 * (q1 + q2) + d340 * d10);

    RhoIntermediates {
        eta,
        e_s2,
        e_sx,
        e_s2x,
        e_s2x_dot,
        e_x2_dot,
        e_vx,
        e_zx,
        e_sz,
        e_s2z,
        e_zv,
        e_seps3,
        musum,
        d20,
        d330,
        d340,
        q1,
        q2,
        q3,
        rho0,
        rho1,
        rho2,
    }
}
