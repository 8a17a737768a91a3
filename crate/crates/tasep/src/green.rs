//! Transition weights and determinantal (generalized) Green functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcore::{f_n, FIndex};
use crate::scalar::{ModelParams, Scalar};

/// Particle positions, rightmost first: `x_1 > x_2 > ... > x_N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParticleConfig {
    coords: Vec<i64>,
}

impl ParticleConfig {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidConfig("empty particle configuration".into()));
        }
        if coords.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "coordinates must be strictly decreasing: {coords:?}"
            )));
        }
        Ok(ParticleConfig { coords })
    }

    /// Step initial condition `x_i = 1 - i`.
    pub fn step(n: usize) -> Self {
        ParticleConfig {
            coords: (1..=n as i64).map(|i| 1 - i).collect(),
        }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Indexed space-time points `(x_i, t_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceTimeConfig {
    pub points: Vec<(i64, i64)>,
}

impl SpaceTimeConfig {
    pub fn new(points: Vec<(i64, i64)>) -> Self {
        SpaceTimeConfig { points }
    }

    /// All particles at one time.
    pub fn equal_time(x: &ParticleConfig, t: i64) -> Self {
        SpaceTimeConfig {
            points: x.coords().iter().map(|&xi| (xi, t)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// x strictly decreasing and t weakly increasing.
pub fn is_admissible(c: &SpaceTimeConfig) -> bool {
    c.points
        .windows(2)
        .all(|w| w[0].0 > w[1].0 && w[0].1 <= w[1].1)
}

fn theta<S: Scalar>(k: i64, l: Option<i64>, params: &ModelParams<S>) -> S {
    match k {
        0 if l == Some(1) => S::one(),
        0 => params.q.clone(),
        1 => params.p.clone(),
        _ => S::zero(),
    }
}

/// One sweep of the backward sequential update: `P_1(to | from)`.
pub fn one_step_prob<S: Scalar>(
    to: &ParticleConfig,
    from: &ParticleConfig,
    params: &ModelParams<S>,
) -> Result<S> {
    if to.len() != from.len() {
        return Err(Error::InvalidConfig(format!(
            "dimension mismatch: {} vs {}",
            to.len(),
            from.len()
        )));
    }
    let x = to.coords();
    let y = from.coords();
    let mut acc = S::one();
    for i in 0..x.len() {
        let l = if i == 0 { None } else { Some(x[i - 1] - y[i]) };
        let w = theta(x[i] - y[i], l, params);
        if w.is_zero() {
            return Ok(S::zero());
        }
        acc = acc * w;
    }
    Ok(acc)
}

/// `det[F_{j-i}(x_i - y_j, t)]`.
pub fn green_det<S: Scalar>(
    x: &ParticleConfig,
    y: &ParticleConfig,
    t: i64,
    params: &ModelParams<S>,
) -> Result<S> {
    if x.len() != y.len() {
        return Err(Error::InvalidConfig("dimension mismatch".into()));
    }
    if t < 0 {
        return Err(Error::InvalidParams(format!("negative time {t}")));
    }
    let n = x.len();
    let m = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    f_n(
                        FIndex::new(j as i64 - i as i64, x.coords()[i] - y.coords()[j], t),
                        params,
                    )
                })
                .collect()
        })
        .collect();
    Ok(S::det(m))
}

fn ggf_matrix<S: Scalar>(
    fin: &SpaceTimeConfig,
    init: &SpaceTimeConfig,
    params: &ModelParams<S>,
) -> S {
    let n = fin.len();
    let m = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (xi, ti) = fin.points[i];
                    let (x0, t0) = init.points[j];
                    f_n(FIndex::new(j as i64 - i as i64, xi - x0, ti - t0), params)
                })
                .collect()
        })
        .collect();
    S::det(m)
}

fn check_pair(fin: &SpaceTimeConfig, init: &SpaceTimeConfig) -> Result<()> {
    if fin.len() != init.len() || fin.is_empty() {
        return Err(Error::InvalidConfig("dimension mismatch".into()));
    }
    if !is_admissible(fin) || !is_admissible(init) {
        return Err(Error::InvalidConfig(
            "generalized Green function needs admissible configurations".into(),
        ));
    }
    Ok(())
}

/// `det[F_{j-i}(x_i - x0_j, t_i - t0_j)]` for admissible pairs with `t_i > t0_i`.
pub fn ggf_det<S: Scalar>(
    fin: &SpaceTimeConfig,
    init: &SpaceTimeConfig,
    params: &ModelParams<S>,
) -> Result<S> {
    check_pair(fin, init)?;
    if fin.points.iter().zip(&init.points).any(|(a, b)| a.1 <= b.1) {
        return Err(Error::InvalidConfig(
            "every particle needs a final time later than its initial time".into(),
        ));
    }
    Ok(ggf_matrix(fin, init, params))
}

/// As [`ggf_det`] but allowing `t_i = t0_i` (a particle that does not move
/// contributes the factor `F_0(0, 0) = 1`). Used for boundary crossings where
/// a start point already lies on the boundary.
pub fn ggf_det_weak<S: Scalar>(
    fin: &SpaceTimeConfig,
    init: &SpaceTimeConfig,
    params: &ModelParams<S>,
) -> Result<S> {
    check_pair(fin, init)?;
    if fin.points.iter().zip(&init.points).any(|(a, b)| a.1 < b.1) {
        return Err(Error::InvalidConfig("final time precedes initial time".into()));
    }
    Ok(ggf_matrix(fin, init, params))
}

/// Every configuration reachable from `y` in `t` steps: `y_i <= x_i <= y_i + t`,
/// strictly decreasing. Lexicographic order.
pub fn reachable(y: &ParticleConfig, t: i64) -> Vec<ParticleConfig> {
    let n = y.len();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(i: usize, y: &[i64], t: i64, cur: &mut Vec<i64>, out: &mut Vec<ParticleConfig>) {
        if i == y.len() {
            out.push(ParticleConfig { coords: cur.clone() });
            return;
        }
        let hi = if i == 0 { y[0] + t } else { (y[i] + t).min(cur[i - 1] - 1) };
        for xi in y[i]..=hi {
            cur.push(xi);
            rec(i + 1, y, t, cur, out);
            cur.pop();
        }
    }
    if t >= 0 && n > 0 {
        rec(0, y.coords(), t, &mut cur, &mut out);
    }
    out
}

/// `sum_x G_t(x | y)` over the reachable set.
pub fn green_normalization<S: Scalar>(
    y: &ParticleConfig,
    t: i64,
    params: &ModelParams<S>,
) -> Result<S> {
    let mut acc = S::zero();
    for x in reachable(y, t) {
        acc = acc + green_det(&x, y, t, params)?;
    }
    Ok(acc)
}
