//! Brute-force references. Nothing here calls the determinant formulas it is
//! meant to check: trajectories are generated by literally running the
//! sequential update, N-paths carry their conditional two-point weights, and
//! the small-time F values used in the permutation expansion are computed
//! from their own series.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::detprocess::{measure_weight, AuxConfig};
use crate::error::{Error, Result};
use crate::green::{ParticleConfig, SpaceTimeConfig};
use crate::scalar::{ModelParams, Rational};

pub const MAX_GREEN_N: usize = 3;
pub const MAX_GREEN_T: i64 = 6;
pub const MAX_NPATH_N: usize = 3;
pub const MAX_NPATH_SPAN: i64 = 5;
pub const MAX_PERM_N: usize = 5;
pub const MAX_MEASURE_N: usize = 3;
pub const MAX_MEASURE_WINDOW: i64 = 10;

/// Distribution after one backward-sequential sweep, built by branching on
/// each particle in turn.
fn sweep(from: &[i64], params: &ModelParams<Rational>) -> Vec<(Vec<i64>, Rational)> {
    let mut partial: Vec<(Vec<i64>, Rational)> = vec![(Vec::new(), BigRational::one())];
    for &pos in from {
        let mut next = Vec::with_capacity(partial.len() * 2);
        for (moved, w) in partial {
            let target_taken = moved.last().is_some_and(|&ahead| ahead == pos + 1);
            if target_taken {
                let mut m = moved.clone();
                m.push(pos);
                next.push((m, w));
            } else {
                let mut hop = moved.clone();
                hop.push(pos + 1);
                next.push((hop, &w * &params.p));
                let mut stay = moved;
                stay.push(pos);
                next.push((stay, w * &params.q));
            }
        }
        partial = next;
    }
    partial
}

/// Transition probability over `t` steps by summing every trajectory.
pub fn enumerate_green(
    x: &ParticleConfig,
    y: &ParticleConfig,
    t: i64,
    params: &ModelParams<Rational>,
) -> Result<Rational> {
    if x.len() != y.len() {
        return Err(Error::InvalidConfig("dimension mismatch".into()));
    }
    if x.len() > MAX_GREEN_N || !(0..=MAX_GREEN_T).contains(&t) {
        return Err(Error::SizeCap(format!(
            "enumerate_green supports N <= {MAX_GREEN_N}, 0 <= t <= {MAX_GREEN_T}"
        )));
    }
    let mut dist: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
    dist.insert(y.coords().to_vec(), BigRational::one());
    for _ in 0..t {
        let mut next: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
        for (cfg, w) in &dist {
            for (succ, sw) in sweep(cfg, params) {
                *next.entry(succ).or_insert_with(BigRational::zero) += sw * w;
            }
        }
        dist = next;
    }
    Ok(dist.remove(x.coords()).unwrap_or_else(BigRational::zero))
}

/// All lattice paths from `(x0, t0)` to `(x1, t1)` with unit steps in time and
/// increments 0 or 1 in space, as position sequences.
fn lattice_paths(x0: i64, t0: i64, x1: i64, t1: i64) -> Vec<Vec<i64>> {
    let len = t1 - t0;
    let jumps = x1 - x0;
    if len < 0 || jumps < 0 || jumps > len {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = vec![x0];
    fn rec(cur: &mut Vec<i64>, left: i64, jumps_left: i64, out: &mut Vec<Vec<i64>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        let last = *cur.last().expect("nonempty");
        if jumps_left < left {
            cur.push(last);
            rec(cur, left - 1, jumps_left, out);
            cur.pop();
        }
        if jumps_left > 0 {
            cur.push(last + 1);
            rec(cur, left - 1, jumps_left - 1, out);
            cur.pop();
        }
    }
    rec(&mut cur, len, jumps, &mut out);
    out
}

/// Weighted sum over N-paths: path i+1 is weighted conditionally on the
/// space-time points of path i.
pub fn enumerate_npath(
    fin: &SpaceTimeConfig,
    init: &SpaceTimeConfig,
    params: &ModelParams<Rational>,
) -> Result<Rational> {
    let n = fin.len();
    if n != init.len() || n == 0 {
        return Err(Error::InvalidConfig("dimension mismatch".into()));
    }
    let t_lo = init.points.iter().map(|p| p.1).min().unwrap_or(0);
    let t_hi = fin.points.iter().map(|p| p.1).max().unwrap_or(0);
    if n > MAX_NPATH_N || t_hi - t_lo > MAX_NPATH_SPAN {
        return Err(Error::SizeCap(format!(
            "enumerate_npath supports N <= {MAX_NPATH_N}, span <= {MAX_NPATH_SPAN}"
        )));
    }
    let candidates: Vec<Vec<Vec<i64>>> = (0..n)
        .map(|i| {
            let (x0, t0) = init.points[i];
            let (x1, t1) = fin.points[i];
            lattice_paths(x0, t0, x1, t1)
        })
        .collect();

    fn rec(
        i: usize,
        prev: Option<BTreeSet<(i64, i64)>>,
        init: &SpaceTimeConfig,
        candidates: &[Vec<Vec<i64>>],
        params: &ModelParams<Rational>,
    ) -> Rational {
        if i == candidates.len() {
            return BigRational::one();
        }
        let t0 = init.points[i].1;
        let mut total = BigRational::zero();
        for path in &candidates[i] {
            let mut w = BigRational::one();
            for (s, pair) in path.windows(2).enumerate() {
                let t_next = t0 + s as i64 + 1;
                let blocked = prev
                    .as_ref()
                    .is_some_and(|pts| pts.contains(&(pair[0] + 1, t_next)));
                let step = if pair[1] == pair[0] + 1 {
                    if blocked {
                        BigRational::zero()
                    } else {
                        params.p.clone()
                    }
                } else if blocked {
                    BigRational::one()
                } else {
                    params.q.clone()
                };
                w *= step;
                if w.is_zero() {
                    break;
                }
            }
            if w.is_zero() {
                continue;
            }
            let pts: BTreeSet<(i64, i64)> = path
                .iter()
                .enumerate()
                .map(|(s, &x)| (x, t0 + s as i64))
                .collect();
            total += w * rec(i + 1, Some(pts), init, candidates, params);
        }
        total
    }
    Ok(rec(0, None, init, &candidates, params))
}

fn small_binom(a: i64, b: i64) -> i128 {
    if b < 0 {
        return 0;
    }
    if a < 0 {
        let v = small_binom(b - a - 1, b);
        return if b % 2 == 0 { v } else { -v };
    }
    if b > a {
        return 0;
    }
    let mut acc: i128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// F_n(x, t) for t in {0, 1} from the expansion of (q + p/w)^t (1 - w)^(-n).
fn f_small(n: i64, x: i64, t: i64, params: &ModelParams<Rational>) -> Rational {
    let c = |m: i64| -> Rational {
        if m < 0 {
            BigRational::zero()
        } else {
            BigRational::from_integer(small_binom(n + m - 1, m).into())
        }
    };
    match t {
        0 => c(-x),
        1 => &params.p * c(1 - x) + &params.q * c(-x),
        _ => panic!("f_small only covers t in {{0, 1}}"),
    }
}

/// One term of the permutation expansion of the Green determinant:
/// `prod_i F_{sigma_i - i}(x_i - y_{sigma_i}, t)`, with 0-based `sigma`.
pub fn perm_expansion_terms(
    x: &ParticleConfig,
    y: &ParticleConfig,
    t: i64,
    sigma: &[usize],
    params: &ModelParams<Rational>,
) -> Result<Rational> {
    let n = x.len();
    if y.len() != n || sigma.len() != n {
        return Err(Error::InvalidConfig("dimension mismatch".into()));
    }
    if n > MAX_PERM_N || !(0..=1).contains(&t) {
        return Err(Error::SizeCap(format!(
            "perm_expansion_terms supports N <= {MAX_PERM_N}, t in {{0,1}}"
        )));
    }
    let mut acc = BigRational::one();
    for (i, &s) in sigma.iter().enumerate() {
        acc *= f_small(
            s as i64 - i as i64,
            x.coords()[i] - y.coords()[s],
            t,
            params,
        );
        if acc.is_zero() {
            break;
        }
    }
    Ok(acc)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Nontrivial cycles of `sigma`, each listed from its smallest element.
pub fn nontrivial_cycles(sigma: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; sigma.len()];
    let mut out = Vec::new();
    for start in 0..sigma.len() {
        if seen[start] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cyc.push(i);
            i = sigma[i];
        }
        if cyc.len() > 1 {
            out.push(cyc);
        }
    }
    out
}

/// The cycle shape allowed at t = 1: `a -> a+1 -> ... -> a+k-1 -> a` on a
/// compact cluster whose positions are unchanged between `y` and `x`.
pub fn is_cluster_cycle(cycle: &[usize], x: &ParticleConfig, y: &ParticleConfig) -> bool {
    let k = cycle.len();
    let a = cycle[0];
    let consecutive = cycle.iter().enumerate().all(|(r, &i)| i == a + r);
    if !consecutive {
        return false;
    }
    let (xs, ys) = (x.coords(), y.coords());
    let x0 = xs[a];
    (0..k).all(|r| xs[a + r] == x0 - r as i64 && ys[a + r] == x0 - r as i64)
}

/// `C_k = (-1)^(k-1) F_1(1,1)^(k-1) F_{1-k}(1-k,1)`.
pub fn cluster_term(k: usize, params: &ModelParams<Rational>) -> Rational {
    let k = k as i64;
    let mut acc = f_small(1 - k, 1 - k, 1, params);
    for _ in 0..k - 1 {
        acc = -acc * f_small(1, 1, 1, params);
    }
    acc
}

/// Sum of `measure_weight` over every auxiliary configuration with the
/// leading variables `tau^k_1 = pinned[k-1]` and all free variables in
/// `floor..=ceiling`.
pub fn enumerate_measure_marginal(
    pinned: &[i64],
    x: i64,
    floor: i64,
    ceiling: i64,
    params: &ModelParams<Rational>,
) -> Result<Rational> {
    let n = pinned.len();
    if n == 0 || n > MAX_MEASURE_N || ceiling - floor + 1 > MAX_MEASURE_WINDOW {
        return Err(Error::SizeCap(format!(
            "enumerate_measure_marginal supports N <= {MAX_MEASURE_N}, window <= {MAX_MEASURE_WINDOW}"
        )));
    }
    if pinned.iter().any(|&t| t < floor || t > ceiling) {
        return Ok(BigRational::zero());
    }
    // free variables tau^j_i with 2 <= i <= j <= N
    let free: Vec<(usize, usize)> = (2..=n)
        .flat_map(|j| (2..=j).map(move |i| (j, i)))
        .collect();
    let mut levels: Vec<Vec<i64>> = (1..=n).map(|j| vec![0; j]).collect();
    for (j, &t) in pinned.iter().enumerate() {
        levels[j][0] = t;
    }
    let mut total = BigRational::zero();
    let mut idx = vec![floor; free.len()];
    loop {
        for (slot, &(j, i)) in free.iter().enumerate() {
            levels[j - 1][i - 1] = idx[slot];
        }
        let cfg = AuxConfig {
            levels: levels.clone(),
        };
        if cfg.levels_strict() {
            total += measure_weight(&cfg, x, n as i64, params);
        }
        let mut s = 0;
        loop {
            if s == idx.len() {
                return Ok(total);
            }
            idx[s] += 1;
            if idx[s] <= ceiling {
                break;
            }
            idx[s] = floor;
            s += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, Scalar};

    fn half() -> ModelParams<Rational> {
        ModelParams::exact(1, 2).unwrap()
    }

    fn pc(v: &[i64]) -> ParticleConfig {
        ParticleConfig::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sweep_is_a_distribution() {
        let m = ModelParams::exact(1, 3).unwrap();
        let total: Rational = sweep(&[3, 2, 0, -1], &m).into_iter().map(|(_, w)| w).sum();
        assert_eq!(total, rational(1, 1));
    }

    #[test]
    fn green_initial_and_single() {
        let m = half();
        let y = pc(&[0, -1]);
        assert_eq!(enumerate_green(&y, &y, 0, &m).unwrap(), rational(1, 1));
        assert_eq!(enumerate_green(&pc(&[1, -1]), &y, 0, &m).unwrap(), rational(0, 1));
        // three steps, two hops: C(3,2) p^2 q
        assert_eq!(enumerate_green(&pc(&[2]), &pc(&[0]), 3, &m).unwrap(), rational(3, 8));
        assert!(enumerate_green(&pc(&[2]), &pc(&[0]), 7, &m).is_err());
    }

    #[test]
    fn blocked_stay_has_weight_one() {
        let m = ModelParams::exact(1, 3).unwrap();
        // particle 1 sits at 0 for one step; particle 2 is stuck behind it
        let init = SpaceTimeConfig::new(vec![(0, 0), (-1, 0)]);
        let fin = SpaceTimeConfig::new(vec![(0, 1), (-1, 1)]);
        assert_eq!(enumerate_npath(&fin, &init, &m).unwrap(), m.q);
    }

    #[test]
    fn single_path_is_bernoulli_product() {
        let m = ModelParams::exact(2, 5).unwrap();
        let init = SpaceTimeConfig::new(vec![(0, 1)]);
        let fin = SpaceTimeConfig::new(vec![(2, 5)]);
        let want = m.p.clone() * m.p.clone() * m.q.clone() * m.q.clone() * rational(6, 1);
        assert_eq!(enumerate_npath(&fin, &init, &m).unwrap(), want);
    }

    #[test]
    fn permutation_listing() {
        let p = permutations(4);
        assert_eq!(p.len(), 24);
        assert_eq!(p[0], vec![0, 1, 2, 3]);
        assert_eq!(p[23], vec![3, 2, 1, 0]);
        assert_eq!(nontrivial_cycles(&[1, 2, 0, 3]), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn cluster_terms_closed_form() {
        let m = ModelParams::exact(1, 3).unwrap();
        for k in 1..=6 {
            assert_eq!(cluster_term(k, &m), m.p.powi(k as i64 - 1) * m.q.clone());
        }
    }

    #[test]
    fn f_small_values() {
        let m = ModelParams::exact(1, 3).unwrap();
        assert_eq!(f_small(0, 0, 1, &m), m.q);
        assert_eq!(f_small(0, 1, 1, &m), m.p);
        assert_eq!(f_small(-1, -1, 1, &m), -m.q.clone());
        assert_eq!(f_small(0, 0, 0, &m), rational(1, 1));
        assert_eq!(f_small(0, 2, 0, &m), rational(0, 1));
    }
}
