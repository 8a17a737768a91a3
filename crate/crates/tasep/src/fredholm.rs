//! Joint distribution of jump-off times as a truncated Fredholm determinant
//! `det(1 - chi_a K chi_a)` over `{n_1..n_m} x {tau : a_i < tau <= T_max}`.

use serde::{Deserialize, Serialize};

use crate::detprocess::{kernel_m, KernelIndex, KernelTable};
use crate::error::{Error, Result};
use crate::linalg::{det_f64, osborne_scaling};
use crate::scalar::{ModelParams, Rational, Scalar};

/// `P(t_{n_1} <= a_1, ..., t_{n_m} <= a_m)` for `N` particles from step
/// initial condition, jump-off sites `x + N - n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentQuery {
    pub labels: Vec<i64>,
    pub thresholds: Vec<i64>,
    pub x: i64,
    pub n: i64,
    pub params: ModelParams<Rational>,
}

impl CurrentQuery {
    pub fn new(
        labels: Vec<i64>,
        thresholds: Vec<i64>,
        x: i64,
        n: i64,
        params: ModelParams<Rational>,
    ) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidConfig("N must be at least 1".into()));
        }
        if labels.is_empty() || labels.len() != thresholds.len() {
            return Err(Error::InvalidConfig(
                "labels and thresholds must be non-empty and of equal length".into(),
            ));
        }
        if labels.len() as i64 > n {
            return Err(Error::InvalidConfig("more labels than particles".into()));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) || labels[0] < 1 || *labels.last().unwrap() > n {
            return Err(Error::InvalidConfig(format!(
                "labels must be strictly increasing within 1..={n}: {labels:?}"
            )));
        }
        if thresholds.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig(format!(
                "thresholds must be nondecreasing along the labels: {thresholds:?}"
            )));
        }
        Ok(CurrentQuery {
            labels,
            thresholds,
            x,
            n,
            params,
        })
    }

    pub fn params(&self) -> &ModelParams<Rational> {
        &self.params
    }

    fn m(&self) -> i64 {
        self.x + self.n
    }

    fn max_threshold(&self) -> i64 {
        *self.thresholds.iter().max().unwrap()
    }

    /// Index set up to `t_max`, grouped by label, times ascending.
    pub fn indices(&self, t_max: i64) -> Vec<KernelIndex> {
        let mut out = Vec::new();
        for (&n, &a) in self.labels.iter().zip(&self.thresholds) {
            for tau in (a + 1).max(self.x)..=t_max {
                out.push(KernelIndex::new(n, tau));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Balancing {
    None,
    Osborne,
    /// Conjugate by `beta^(tau - tau')`.
    Beta(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Starting horizon; `None` uses `max(a) + 4 ceil((x+N)/p)`.
    pub t_max: Option<i64>,
    pub tol: f64,
    pub max_doublings: u32,
    pub balancing: Balancing,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            t_max: None,
            tol: 1e-8,
            max_doublings: 8,
            balancing: Balancing::Osborne,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentResult {
    pub probability: f64,
    pub error_estimate: f64,
    pub t_max: i64,
}

fn balanced_det(mut a: Vec<Vec<f64>>, idx: &[KernelIndex], balancing: Balancing) -> f64 {
    match balancing {
        Balancing::None => {}
        Balancing::Osborne => {
            let d = osborne_scaling(&a, 30);
            for (i, row) in a.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v *= d[i] / d[j];
                }
            }
        }
        Balancing::Beta(beta) => {
            for (i, row) in a.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v *= beta.powi((idx[i].tau - idx[j].tau) as i32);
                }
            }
        }
    }
    det_f64(a)
}

/// `det(1 - K)` on the index set up to a fixed horizon, in floating point.
pub fn truncated_determinant(q: &CurrentQuery, t_max: i64, balancing: Balancing) -> Result<f64> {
    let idx = q.indices(t_max);
    if idx.is_empty() {
        return Ok(1.0);
    }
    let fl = q.params().to_float();
    let table = KernelTable::new(q.m(), q.n, q.x, t_max.max(q.x), &fl)?;
    let a: Vec<Vec<f64>> = idx
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            idx.iter()
                .enumerate()
                .map(|(j, &c)| (if i == j { 1.0 } else { 0.0 }) - table.kernel(r, c))
                .collect()
        })
        .collect();
    Ok(balanced_det(a, &idx, balancing))
}

/// Joint CDF with horizon doubling. The error estimate is the last change.
pub fn joint_current_prob(q: &CurrentQuery, trunc: &TruncationPolicy) -> Result<CurrentResult> {
    let amax = q.max_threshold().max(q.x);
    let p = q.params().p.to_f64();
    let base = trunc
        .t_max
        .unwrap_or(amax + 4 * (q.m() as f64 / p).ceil() as i64);
    if base <= amax {
        return Err(Error::InvalidParams(format!(
            "horizon {base} must exceed the largest threshold {amax}"
        )));
    }
    let mut ext = base - amax;
    let mut prev = truncated_determinant(q, amax + ext, trunc.balancing)?;
    let mut prev_diff = f64::INFINITY;
    let mut calm = 0;
    for _ in 0..trunc.max_doublings {
        ext *= 2;
        let cur = truncated_determinant(q, amax + ext, trunc.balancing)?;
        let diff = (cur - prev).abs();
        if !cur.is_finite() {
            return Err(Error::NonConvergence("determinant is not finite".into()));
        }
        if diff < trunc.tol {
            calm += 1;
            if calm >= 2 {
                return Ok(CurrentResult {
                    probability: cur,
                    error_estimate: diff,
                    t_max: amax + ext,
                });
            }
        } else {
            calm = 0;
            if diff >= prev_diff {
                return Err(Error::NonConvergence(format!(
                    "horizon doubling does not stabilize: |dP| {diff:e} after {prev_diff:e}"
                )));
            }
        }
        prev_diff = diff;
        prev = cur;
    }
    Err(Error::NonConvergence(format!(
        "no stable value after {} doublings",
        trunc.max_doublings
    )))
}

/// Exact `det(1 - K)` on the index set up to `t_hi`.
pub fn exact_truncated_determinant(q: &CurrentQuery, t_hi: i64) -> Rational {
    let idx = q.indices(t_hi);
    let m = q.m();
    let a = idx
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            idx.iter()
                .enumerate()
                .map(|(j, &c)| {
                    let d = if i == j { Rational::one() } else { Rational::zero() };
                    d - kernel_m(r, c, m, q.params())
                })
                .collect()
        })
        .collect();
    Rational::det(a)
}

/// Partial inclusion-exclusion series `sum_{k <= cap} (-1)^k sum_{|S| = k} det K_S`
/// on the index set up to `t_hi`, exact.
pub fn inclusion_exclusion_check(q: &CurrentQuery, order_cap: usize, t_hi: i64) -> Result<Rational> {
    let idx = q.indices(t_hi);
    if idx.len() > 16 {
        return Err(Error::SizeCap(format!(
            "inclusion-exclusion over {} indices exceeds the cap of 16",
            idx.len()
        )));
    }
    let m = q.m();
    let k: Vec<Vec<Rational>> = idx
        .iter()
        .map(|&r| idx.iter().map(|&c| kernel_m(r, c, m, q.params())).collect())
        .collect();
    let n = idx.len();
    let mut acc = Rational::zero();
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > order_cap {
            continue;
        }
        let sel: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let minor = sel
            .iter()
            .map(|&i| sel.iter().map(|&j| k[i][j].clone()).collect())
            .collect();
        let d = Rational::det(minor);
        if size % 2 == 0 {
            acc = acc + d;
        } else {
            acc = acc - d;
        }
    }
    Ok(acc)
}
