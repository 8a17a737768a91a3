//! Floating-point kernel from tabulated Psi and Phi.
//!
//! For `k >= 0`, `Psi_k(tau) = (-1)^k sum_l C(k,l) (-1)^l b(m-k-1+l; tau)` with
//! `b(y; tau)` the binomial probability of `y` successes in `tau` trials.
//! Negative orders follow from `Psi_{k-1}(tau) = p sum_{t >= tau} Psi_k(t)`,
//! accumulated backwards from a far time where every tabulated value is
//! negligible.

use crate::binom::binom_f64;
use crate::error::{Error, Result};
use crate::fcore::{f_tilde, FIndex};
use crate::scalar::ModelParams;

use super::KernelIndex;

const FAR_CAP: i64 = 5_000_000;

/// Psi_k for `1 - n_max <= k < n_max` and Phi_j for `0 <= j < n_max` on
/// `tau_lo..=tau_hi`.
#[derive(Clone, Debug)]
pub struct KernelTable {
    m: i64,
    n_max: i64,
    tau_lo: i64,
    tau_hi: i64,
    p: f64,
    // psi[k + n_max - 1][tau - tau_lo]
    psi: Vec<Vec<f64>>,
    // phi[j][tau - tau_lo]
    phi: Vec<Vec<f64>>,
}

fn phi_cap_f64(j: i64, tau: i64, m: i64, params: &ModelParams<f64>) -> f64 {
    let mut acc = 0.0;
    let mut qi = 1.0;
    for i in 0..=j {
        acc += binom_f64(tau + j - m, j - i) * binom_f64(-tau - 1, i) * qi;
        qi *= params.q;
    }
    params.p * acc
}

impl KernelTable {
    pub fn new(
        m: i64,
        n_max: i64,
        tau_lo: i64,
        tau_hi: i64,
        params: &ModelParams<f64>,
    ) -> Result<Self> {
        if n_max < 1 || tau_hi < tau_lo {
            return Err(Error::InvalidParams(format!(
                "bad table shape: n_max {n_max}, times {tau_lo}..={tau_hi}"
            )));
        }
        let (p, q) = (params.p, params.q);
        let (lp, lq) = (p.ln(), q.ln());
        let y_lo = m - n_max;
        let ny = n_max as usize;
        // log binomial probability for y in y_lo..m at the current tau >= 0
        let mut logb = vec![f64::NEG_INFINITY; ny];
        let mut started = vec![false; ny];
        let nonneg_psi = |logb: &[f64], k: i64| -> f64 {
            let mut acc = 0.0;
            let mut c = 1.0;
            for l in 0..=k {
                let y = m - k - 1 + l;
                let lb = logb[(y - y_lo) as usize];
                if lb > f64::NEG_INFINITY {
                    let s = if l % 2 == 0 { 1.0 } else { -1.0 };
                    acc += s * c * lb.exp();
                }
                c = c * (k - l) as f64 / (l + 1) as f64;
            }
            if k % 2 == 0 {
                acc
            } else {
                -acc
            }
        };
        let mode_end = ((m.max(0) + n_max) as f64 / p).ceil() as i64 * 2;
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut tau = tau_lo;
        loop {
            let col: Vec<f64> = if tau < 0 {
                (0..n_max)
                    .map(|k| {
                        let v = f_tilde(FIndex::new(-k, m - k - 1, tau), params);
                        if k % 2 == 0 {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            } else {
                for (i, lb) in logb.iter_mut().enumerate() {
                    let y = y_lo + i as i64;
                    if y < 0 || y > tau {
                        continue;
                    }
                    if !started[i] {
                        *lb = y as f64 * lp;
                        started[i] = true;
                        // catch up from tau = y
                        for t in y..tau {
                            *lb += lq + ((t + 1) as f64).ln() - ((t + 1 - y) as f64).ln();
                        }
                    } else {
                        *lb += lq + (tau as f64).ln() - ((tau - y) as f64).ln();
                    }
                }
                (0..n_max).map(|k| nonneg_psi(&logb, k)).collect()
            };
            let small = col
                .iter()
                .all(|v| v.abs() * (tau.max(1) as f64).powi(n_max as i32) < 1e-18);
            cols.push(col);
            if tau >= tau_hi && tau >= mode_end && small {
                break;
            }
            tau += 1;
            if tau - tau_lo > FAR_CAP {
                return Err(Error::NonConvergence(
                    "Psi table tail did not become negligible".into(),
                ));
            }
        }
        let width = (tau_hi - tau_lo + 1) as usize;
        let len = cols.len();
        let mut psi = vec![Vec::new(); (2 * n_max - 1) as usize];
        for k in 0..n_max {
            psi[(k + n_max - 1) as usize] = cols.iter().take(width).map(|c| c[k as usize]).collect();
        }
        // negative orders by backward tail sums over the full range
        let mut prev: Vec<f64> = cols.iter().map(|c| c[0]).collect();
        for k in (1 - n_max..0).rev() {
            let mut cur = vec![0.0; len];
            let mut tail = 0.0;
            for i in (0..len).rev() {
                tail += prev[i];
                cur[i] = p * tail;
            }
            psi[(k + n_max - 1) as usize] = cur[..width].to_vec();
            prev = cur;
        }
        let phi = (0..n_max)
            .map(|j| (tau_lo..=tau_hi).map(|t| phi_cap_f64(j, t, m, params)).collect())
            .collect();
        Ok(KernelTable {
            m,
            n_max,
            tau_lo,
            tau_hi,
            p,
            psi,
            phi,
        })
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn tau_range(&self) -> (i64, i64) {
        (self.tau_lo, self.tau_hi)
    }

    fn check(&self, tau: i64) {
        assert!(
            (self.tau_lo..=self.tau_hi).contains(&tau),
            "time {tau} outside table range {}..={}",
            self.tau_lo,
            self.tau_hi
        );
    }

    pub fn psi(&self, k: i64, tau: i64) -> f64 {
        self.check(tau);
        assert!(k > -self.n_max && k < self.n_max, "order {k} not tabulated");
        self.psi[(k + self.n_max - 1) as usize][(tau - self.tau_lo) as usize]
    }

    pub fn phi_cap(&self, j: i64, tau: i64) -> f64 {
        self.check(tau);
        if j < 0 {
            return 0.0;
        }
        assert!(j < self.n_max, "order {j} not tabulated");
        self.phi[j as usize][(tau - self.tau_lo) as usize]
    }

    pub fn kernel(&self, a: KernelIndex, b: KernelIndex) -> f64 {
        let d = b.n - a.n;
        let mut acc = if d > 0 && b.tau >= a.tau {
            -self.p.powi(d as i32) * binom_f64(b.tau - a.tau + d - 1, d - 1)
        } else {
            0.0
        };
        for k in 1..=b.n {
            acc += self.psi(a.n - k, a.tau) * self.phi_cap(b.n - k, b.tau);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detprocess::{kernel_m, phi_cap_m, psi_m};
    use crate::scalar::{Rational, Scalar};

    #[test]
    fn table_matches_exact() {
        for (num, den) in [(1, 2), (1, 3), (3, 4)] {
            let ex = ModelParams::<Rational>::exact(num, den).unwrap();
            let fl = ex.to_float();
            for (x, nn) in [(0, 3), (-2, 3), (2, 2)] {
                let m = x + nn;
                let t = KernelTable::new(m, nn, x, x + 25, &fl).unwrap();
                for tau in x..=x + 25 {
                    for k in 1 - nn..nn {
                        let e = psi_m(k, tau, m, &ex).to_f64();
                        assert!((t.psi(k, tau) - e).abs() < 1e-10, "psi {k} {tau}: {} vs {e}", t.psi(k, tau));
                    }
                    for j in 0..nn {
                        let e = phi_cap_m(j, tau, m, &ex).to_f64();
                        assert!((t.phi_cap(j, tau) - e).abs() < 1e-9 * e.abs().max(1.0));
                    }
                }
                for n1 in 1..=nn {
                    for n2 in 1..=nn {
                        for (t1, t2) in [(x, x + 3), (x + 4, x + 1), (x + 7, x + 7)] {
                            let a = KernelIndex::new(n1, t1);
                            let b = KernelIndex::new(n2, t2);
                            let e = kernel_m(a, b, m, &ex).to_f64();
                            assert!((t.kernel(a, b) - e).abs() < 1e-9);
                        }
                    }
                }
            }
        }
    }
}
