//! Arithmetic back ends: exact rationals and `f64`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Integer power; negative exponents invert.
    fn powi(&self, e: i64) -> Self;
    fn det(m: Vec<Vec<Self>>) -> Self;
    /// "num/den" in exact mode, shortest round-trip decimal in float mode.
    fn render(&self) -> String;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
}

fn pow_by_squaring<S: Clone + Mul<Output = S>>(base: &S, mut e: u64, one: S) -> S {
    let mut acc = one;
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b.clone();
        }
        e >>= 1;
        if e > 0 {
            b = b.clone() * b;
        }
    }
    acc
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn powi(&self, e: i64) -> Self {
        let r = pow_by_squaring(self, e.unsigned_abs(), <BigRational as One>::one());
        if e < 0 {
            r.recip()
        } else {
            r
        }
    }
    fn det(m: Vec<Vec<Self>>) -> Self {
        crate::linalg::det_rational(m)
    }
    fn render(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn powi(&self, e: i64) -> Self {
        if let Ok(e32) = i32::try_from(e) {
            f64::powi(*self, e32)
        } else {
            self.powf(e as f64)
        }
    }
    fn det(m: Vec<Vec<Self>>) -> Self {
        crate::linalg::det_f64(m)
    }
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

/// Correctly scaled conversion; `BigRational::to_f64` overflows when numerator
/// and denominator are both huge.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    // keep ~80 significant bits in the quotient
    let shift = db - nb + 80;
    let num = if shift >= 0 {
        r.numer() << shift as usize
    } else {
        r.numer() >> (-shift) as usize
    };
    let (qt, _) = num.div_rem(r.denom());
    let mant = qt.to_f64().unwrap_or(0.0);
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * mant.abs() * 2f64.powi(-(shift as i32))
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Hopping probability `p` and its complement `q = 1 - p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<S: Scalar> {
    pub p: S,
    pub q: S,
}

impl<S: Scalar> ModelParams<S> {
    pub fn new(p: S) -> Result<Self> {
        if !(p > S::zero() && p < S::one()) {
            return Err(Error::InvalidParams(format!(
                "hopping probability must lie in (0,1), got {}",
                p.render()
            )));
        }
        let q = S::one() - p.clone();
        Ok(ModelParams { p, q })
    }

    pub fn to_float(&self) -> ModelParams<f64> {
        ModelParams {
            p: self.p.to_f64(),
            q: self.q.to_f64(),
        }
    }
}

impl ModelParams<BigRational> {
    pub fn exact(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParams("zero denominator".into()));
        }
        Self::new(rational(num, den))
    }
}

impl ModelParams<f64> {
    pub fn float(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::InvalidParams(format!("non-finite p = {p}")));
        }
        Self::new(p)
    }
}

/// Powers `base^0 ..= base^len-1`.
pub fn power_table<S: Scalar>(base: &S, len: usize) -> Vec<S> {
    let mut v = Vec::with_capacity(len);
    let mut acc = S::one();
    for _ in 0..len {
        v.push(acc.clone());
        acc = acc * base.clone();
    }
    v
}
