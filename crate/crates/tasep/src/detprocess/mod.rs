//! The signed determinantal process on auxiliary times and its kernel.
//!
//! Throughout, `m = x + N`. The functions Psi_k and Phi_j depend on the level
//! label only through `k` and `j`, so the level argument is accepted for
//! signature symmetry and checked for range but otherwise unused.
//!
//! Exact closed forms (generalized binomials throughout):
//!
//! ```text
//! Psi_k(tau) = sum_{i+l = tau+k+1-m} C(tau,i) q^i p^(tau-i) (-1)^(k+l) C(k,l)
//!            + [k<0] sum_{i=0}^{-k-1} C(tau,i) q^i C(m-k-2-tau, -k-1-i)
//! Phi_j(tau) = p sum_{i=0}^{j} C(tau+j-m, j-i) C(-tau-1, i) q^i
//! ```
//!
//! the first being the residues at w = 0 and w = 1 of
//! `(qw+p)^tau (w-1)^k w^(m-k-2-tau)`, the second the residue at v = 1 of
//! `p (1+u)^(tau+j-m) (1+qu)^(-tau-1) u^(-j-1)` with `v = 1 + u`.

pub mod contour;
pub mod table;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::binom::binom;
use crate::error::{Error, Result};
use crate::scalar::{ModelParams, Rational, Scalar};

pub use contour::{kernel_contour, phi_cap_contour, phi_conv_contour, psi_contour, ContourGeometry};
pub use table::KernelTable;

/// Auxiliary times: `levels[n-1] = [tau^n_1, ..., tau^n_n]`, largest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxConfig {
    pub levels: Vec<Vec<i64>>,
}

impl AuxConfig {
    /// Level `n` has `n` entries, strictly decreasing.
    pub fn levels_strict(&self) -> bool {
        self.levels
            .iter()
            .enumerate()
            .all(|(i, l)| l.len() == i + 1 && l.windows(2).all(|w| w[0] > w[1]))
    }

    /// Every level interlaces with the next: `tau^{n+1}_{i+1} < tau^n_i <= tau^{n+1}_i`.
    pub fn in_domain(&self) -> bool {
        self.levels_strict() && self.levels.windows(2).all(|w| interlaces(&w[0], &w[1]))
    }

    pub fn min_value(&self) -> Option<i64> {
        self.levels.iter().flatten().copied().min()
    }
}

/// `upper[i+1] < lower[i] <= upper[i]` for every `i`, with `upper` one longer.
pub fn interlaces(lower: &[i64], upper: &[i64]) -> bool {
    upper.len() == lower.len() + 1
        && lower
            .iter()
            .enumerate()
            .all(|(i, &l)| upper[i + 1] < l && l <= upper[i])
}

/// `phi(z, y) = p` if `y >= z`, else 0.
pub fn phi<S: Scalar>(z: i64, y: i64, params: &ModelParams<S>) -> S {
    if y >= z {
        params.p.clone()
    } else {
        S::zero()
    }
}

/// Determinant of the transition block between a level of `n` values and the
/// next level of `n + 1` values, with the reservoir row (all `p`) last.
pub fn phi_block_det<S: Scalar>(lower: &[i64], upper: &[i64], params: &ModelParams<S>) -> S {
    let n = lower.len();
    assert_eq!(upper.len(), n + 1, "level sizes must differ by one");
    let mut m = Vec::with_capacity(n + 1);
    for &z in lower {
        m.push(upper.iter().map(|&y| phi(z, y, params)).collect());
    }
    m.push(vec![params.p.clone(); n + 1]);
    S::det(m)
}

/// Convolution of `n2 - n1` copies of `phi`: `p^d C(tau2 - tau1 + d - 1, d - 1)`.
pub fn phi_conv<S: Scalar>(n1: i64, n2: i64, tau1: i64, tau2: i64, params: &ModelParams<S>) -> S {
    let d = n2 - n1;
    if d <= 0 || tau2 < tau1 {
        return S::zero();
    }
    params.p.powi(d) * S::from_bigint(&binom(tau2 - tau1 + d - 1, d - 1))
}

/// `[C(a, 0), ..., C(a, len-1)]` by the multiplicative recurrence.
fn binom_row(a: i64, len: usize) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(len);
    let mut cur = BigInt::one();
    for i in 0..len as i64 {
        row.push(cur.clone());
        cur = cur * BigInt::from(a - i) / BigInt::from(i + 1);
    }
    row
}

fn pow_row(base: &BigInt, len: usize) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(len);
    let mut cur = BigInt::one();
    for _ in 0..len {
        row.push(cur.clone());
        cur *= base;
    }
    row
}

/// `p = a/b`, `q = c/b`.
fn split(params: &ModelParams<Rational>) -> (BigInt, BigInt, BigInt) {
    let b = params.p.denom().clone();
    let a = params.p.numer().clone();
    let c = &b - &a;
    (a, b, c)
}

fn check_level(n: i64, nn: i64) -> Result<()> {
    if n < 0 || n > nn {
        return Err(Error::InvalidParams(format!("level {n} outside 0..={nn}")));
    }
    Ok(())
}

/// Psi_k(tau) with `m = x + N`, exact.
pub fn psi_m(k: i64, tau: i64, m: i64, params: &ModelParams<Rational>) -> Rational {
    let (a, b, c) = split(params);
    let e = tau + k + 1 - m;
    let mut total = <Rational as Scalar>::zero();
    if e >= 0 {
        let sign_k = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        if tau >= 0 {
            let imax = e.min(tau) as usize;
            let ct = binom_row(tau, imax + 1);
            let ck = binom_row(k, e as usize + 1);
            let cp = pow_row(&c, imax + 1);
            let ap = pow_row(&a, tau as usize + 1);
            let mut num = BigInt::zero();
            for i in 0..=imax {
                let l = e as usize - i;
                if ck[l].is_zero() || ct[i].is_zero() {
                    continue;
                }
                let mut term = &ct[i] * &cp[i] * &ap[tau as usize - i] * &ck[l];
                if (sign_k * if l % 2 == 0 { 1 } else { -1 }) < 0 {
                    term = -term;
                }
                num += term;
            }
            total += BigRational::new(num, num_traits::pow(b.clone(), tau as usize));
        } else {
            let ct = binom_row(tau, e as usize + 1);
            let ck = binom_row(k, e as usize + 1);
            for i in 0..=e as usize {
                let l = e as usize - i;
                let mut term = BigRational::from_integer(&ct[i] * &ck[l])
                    * params.q.powi(i as i64)
                    * params.p.powi(tau - i as i64);
                if (sign_k * if l % 2 == 0 { 1 } else { -1 }) < 0 {
                    term = -term;
                }
                total += term;
            }
        }
    }
    if k < 0 {
        let top = (-k - 1) as usize;
        let ct = binom_row(tau, top + 1);
        let cr = binom_row(m - k - 2 - tau, top + 1);
        let cp = pow_row(&c, top + 1);
        let bp = pow_row(&b, top + 1);
        let mut num = BigInt::zero();
        for i in 0..=top {
            num += &ct[i] * &cp[i] * &bp[top - i] * &cr[top - i];
        }
        total += BigRational::new(num, num_traits::pow(b, top));
    }
    total
}

/// Phi_j(tau) with `m = x + N`, exact; zero for `j < 0`.
pub fn phi_cap_m(j: i64, tau: i64, m: i64, params: &ModelParams<Rational>) -> Rational {
    if j < 0 {
        return <Rational as Scalar>::zero();
    }
    let (a, b, c) = split(params);
    let ju = j as usize;
    let c1 = binom_row(tau + j - m, ju + 1);
    let c2 = binom_row(-tau - 1, ju + 1);
    let cp = pow_row(&c, ju + 1);
    let bp = pow_row(&b, ju + 1);
    let mut num = BigInt::zero();
    for i in 0..=ju {
        num += &c1[ju - i] * &c2[i] * &cp[i] * &bp[ju - i];
    }
    BigRational::new(a * num, num_traits::pow(b, ju + 1))
}

/// Psi^n_k(tau) by residues; exact.
pub fn psi(
    n: i64,
    k: i64,
    tau: i64,
    x: i64,
    nn: i64,
    params: &ModelParams<Rational>,
) -> Result<Rational> {
    check_level(n, nn)?;
    Ok(psi_m(k, tau, x + nn, params))
}

/// Phi^n_j(tau), a polynomial of degree `j` in `tau`; exact.
pub fn phi_cap(
    n: i64,
    j: i64,
    tau: i64,
    x: i64,
    nn: i64,
    params: &ModelParams<Rational>,
) -> Result<Rational> {
    check_level(n, nn)?;
    Ok(phi_cap_m(j, tau, x + nn, params))
}

/// `sum_{tau >= x} Phi_i(tau) Psi_j(tau)`, summed until the geometric tail
/// estimate drops below `tail_tol`.
pub fn orthogonality_sum(
    i: i64,
    j: i64,
    n: i64,
    x: i64,
    nn: i64,
    params: &ModelParams<Rational>,
    tail_tol: f64,
) -> Result<f64> {
    check_level(n, nn)?;
    if !(0..n).contains(&i) || !(0..n).contains(&j) {
        return Err(Error::InvalidParams(format!("indices must lie in 0..{n}")));
    }
    if tail_tol <= 0.0 {
        return Err(Error::InvalidParams("tail_tol must be positive".into()));
    }
    let m = x + nn;
    let mut acc = <Rational as Scalar>::zero();
    let mut prev = f64::INFINITY;
    let mut calm = 0;
    let limit = x + 20_000;
    for tau in x..limit {
        let term = phi_cap_m(i, tau, m, params) * psi_m(j, tau, m, params);
        let mag = term.abs().to_f64();
        acc += term;
        if tau > m && mag > 0.0 {
            let ratio = mag / prev;
            if ratio < 1.0 && mag * ratio / (1.0 - ratio) < tail_tol {
                calm += 1;
                if calm >= 3 {
                    return Ok(acc.to_f64());
                }
            } else {
                calm = 0;
            }
        } else if tau > m && mag == 0.0 && prev == 0.0 {
            calm += 1;
            if calm >= 3 {
                return Ok(acc.to_f64());
            }
        }
        prev = mag;
    }
    Err(Error::NonConvergence(format!(
        "orthogonality sum ({i},{j}) did not settle by tau = {limit}"
    )))
}

/// Unnormalized weight: the product of transition blocks (reservoir rows
/// included) times `det[Psi_i(tau^N_{N-j})]_{i,j=0}^{N-1}`. The normalization
/// constant equals 1 with this convention.
pub fn measure_weight(cfg: &AuxConfig, x: i64, nn: i64, params: &ModelParams<Rational>) -> Rational {
    let n = nn as usize;
    assert_eq!(cfg.levels.len(), n, "configuration must have N levels");
    let mut w = params.p.clone();
    for lvl in 1..n {
        let d = phi_block_det(&cfg.levels[lvl - 1], &cfg.levels[lvl], params);
        if Scalar::is_zero(&d) {
            return <Rational as Scalar>::zero();
        }
        w *= d;
    }
    let top = &cfg.levels[n - 1];
    let m = x + nn;
    let psi_mat: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| psi_m(i as i64, top[n - 1 - j], m, params)).collect())
        .collect();
    w * Rational::det(psi_mat)
}

/// Kernel index `(n, tau)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KernelIndex {
    pub n: i64,
    pub tau: i64,
}

impl KernelIndex {
    pub fn new(n: i64, tau: i64) -> Self {
        KernelIndex { n, tau }
    }
}

/// `K(n1,tau1; n2,tau2) = -phi^(n1,n2)(tau1,tau2) + sum_{k=1}^{n2} Psi_{n1-k}(tau1) Phi_{n2-k}(tau2)`.
pub fn kernel_m(a: KernelIndex, b: KernelIndex, m: i64, params: &ModelParams<Rational>) -> Rational {
    let mut acc = -phi_conv(a.n, b.n, a.tau, b.tau, params);
    for k in 1..=b.n {
        let f = phi_cap_m(b.n - k, b.tau, m, params);
        if Scalar::is_zero(&f) {
            continue;
        }
        acc += psi_m(a.n - k, a.tau, m, params) * f;
    }
    acc
}

/// Correlation kernel by the exact sum route.
pub fn kernel(
    a: KernelIndex,
    b: KernelIndex,
    x: i64,
    nn: i64,
    params: &ModelParams<Rational>,
) -> Result<Rational> {
    for idx in [a, b] {
        if idx.n < 1 || idx.n > nn {
            return Err(Error::InvalidParams(format!("label {} outside 1..={nn}", idx.n)));
        }
        if idx.tau < x {
            return Err(Error::InvalidParams(format!("time {} below floor {x}", idx.tau)));
        }
    }
    Ok(kernel_m(a, b, x + nn, params))
}

/// Diagonal entry `K(n,tau; n,tau)`.
pub fn kernel_diag_m(n: i64, tau: i64, m: i64, params: &ModelParams<Rational>) -> Rational {
    kernel_m(KernelIndex::new(n, tau), KernelIndex::new(n, tau), m, params)
}
