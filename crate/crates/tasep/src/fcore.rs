//! The functions F_n(x,t) and tilde F_n(x,t).
//!
//! Both are the w^0 coefficient of `w^(x-1) (q + p/w)^t (1-w)^(-n)` (times w),
//! which for integer t is the finite sum
//!
//! ```text
//! tilde F_n(x,t) = sum_{k=0}^{t-x} C(t,k) q^k p^(t-k) C(n+t-x-k-1, t-x-k)
//! ```
//!
//! `C(t,k)` is the generalized binomial, so the same sum covers t < 0.
//! F_n agrees with tilde F_n for t >= 0 and vanishes for t < 0.

use crate::binom::binom;
use crate::scalar::{ModelParams, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FIndex {
    pub n: i64,
    pub x: i64,
    pub t: i64,
}

impl FIndex {
    pub fn new(n: i64, x: i64, t: i64) -> Self {
        FIndex { n, x, t }
    }
}

/// Coefficient of w^m in (1-w)^(-n).
fn neg_series(n: i64, m: i64) -> num_bigint::BigInt {
    if m < 0 {
        return num_bigint::BigInt::from(0);
    }
    binom(n + m - 1, m)
}

pub fn f_tilde<S: Scalar>(idx: FIndex, params: &ModelParams<S>) -> S {
    let FIndex { n, x, t } = idx;
    let span = t - x;
    if span < 0 {
        return S::zero();
    }
    let mut acc = S::zero();
    let mut qk = S::one();
    let mut pk = params.p.powi(t);
    let pinv = S::one() / params.p.clone();
    for k in 0..=span {
        let c = binom(t, k);
        let m = neg_series(n, span - k);
        if c.bits() != 0 && m.bits() != 0 {
            let coef = S::from_bigint(&(c * m));
            acc = acc + coef * qk.clone() * pk.clone();
        }
        qk = qk * params.q.clone();
        pk = pk * pinv.clone();
    }
    acc
}

pub fn f_n<S: Scalar>(idx: FIndex, params: &ModelParams<S>) -> S {
    if idx.t < 0 {
        S::zero()
    } else {
        f_tilde(idx, params)
    }
}
