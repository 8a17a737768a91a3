//! Staircase boundary sets, exit probabilities and the boundary measure.
//!
//! A staircase is a lattice path whose consecutive points differ by
//! `(x+1, t)` (RIGHT) or `(x, t-1)` (DOWN). Explicit points run from the
//! anchor through `steps`; beyond them the set continues lazily as rays:
//! the head ray leaves the anchor backwards (upwards for DOWN, leftwards for
//! RIGHT) and the tail ray repeats `tail` after the last point.
//!
//! The region `L` enclosed by the boundary is its down-set: `(x, t)` is in
//! `L` iff some boundary point `b` has `x <= b.x` and `t <= b.t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcore::{f_n, FIndex};
use crate::green::{ggf_det_weak, is_admissible, SpaceTimeConfig};
use crate::scalar::{ModelParams, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    Right,
    Down,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Staircase {
    anchor: (i64, i64),
    steps: Vec<Step>,
    head: Step,
    tail: Step,
    points: Vec<(i64, i64)>,
}

impl Staircase {
    pub fn new(anchor: (i64, i64), steps: Vec<Step>, head: Step, tail: Step) -> Self {
        let mut points = vec![anchor];
        let mut cur = anchor;
        for s in &steps {
            cur = match s {
                Step::Right => (cur.0 + 1, cur.1),
                Step::Down => (cur.0, cur.1 - 1),
            };
            points.push(cur);
        }
        Staircase {
            anchor,
            steps,
            head,
            tail,
            points,
        }
    }

    /// The vertical line through column `x`: exit means hopping past `x`.
    pub fn fixed_space(x: i64) -> Self {
        Staircase::new((x, 0), Vec::new(), Step::Down, Step::Down)
    }

    /// The horizontal line at time `t`.
    pub fn fixed_time(t: i64) -> Self {
        Staircase::new((0, t), Vec::new(), Step::Right, Step::Right)
    }

    pub fn anchor(&self) -> (i64, i64) {
        self.anchor
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn head(&self) -> Step {
        self.head
    }

    pub fn tail(&self) -> Step {
        self.tail
    }

    /// Copy translated by `dx` in space.
    pub fn shifted(&self, dx: i64) -> Self {
        Staircase::new(
            (self.anchor.0 + dx, self.anchor.1),
            self.steps.clone(),
            self.head,
            self.tail,
        )
    }

    fn last(&self) -> (i64, i64) {
        *self.points.last().expect("staircase has an anchor")
    }

    pub fn contains(&self, (x, t): (i64, i64)) -> bool {
        if self.points.contains(&(x, t)) {
            return true;
        }
        let (xa, ta) = self.anchor;
        let (xe, te) = self.last();
        let on_head = match self.head {
            Step::Down => x == xa && t > ta,
            Step::Right => t == ta && x < xa,
        };
        let on_tail = match self.tail {
            Step::Down => x == xe && t < te,
            Step::Right => t == te && x > xe,
        };
        on_head || on_tail
    }

    /// Membership in the enclosed down-set.
    pub fn encloses(&self, (x, t): (i64, i64)) -> bool {
        if self.points.iter().any(|&(bx, bt)| x <= bx && t <= bt) {
            return true;
        }
        let (xa, _) = self.anchor;
        let (_, te) = self.last();
        (self.head == Step::Down && x <= xa) || (self.tail == Step::Right && t <= te)
    }

    /// Boundary points with `x_lo <= x` and `t_lo <= t <= t_hi` and
    /// `x - x_lo <= t - t_lo` (reachable from `(x_lo, t_lo)`), in path order.
    pub fn reachable_points(&self, x_lo: i64, t_lo: i64, t_hi: i64) -> Vec<(i64, i64)> {
        let ok = |(x, t): (i64, i64)| x >= x_lo && t >= t_lo && t <= t_hi && x - x_lo <= t - t_lo;
        let mut out = Vec::new();
        let (xa, ta) = self.anchor;
        match self.head {
            Step::Down => {
                for t in (ta + 1..=t_hi).rev() {
                    out.push((xa, t));
                }
            }
            Step::Right => {
                let reach = x_lo + (ta - t_lo);
                for x in x_lo..xa.min(reach + 1) {
                    out.push((x, ta));
                }
            }
        }
        out.extend(self.points.iter().copied());
        let (xe, te) = self.last();
        match self.tail {
            Step::Down => {
                for t in (t_lo..te).rev() {
                    out.push((xe, t));
                }
            }
            Step::Right => {
                let reach = x_lo + (te - t_lo);
                for x in xe + 1..=reach {
                    out.push((x, te));
                }
            }
        }
        out.retain(|&pt| ok(pt));
        out
    }

    /// Jumps a particle from `(x0, t0)` needs before it can no longer be
    /// inside the region at large times; `None` when every particle has
    /// crossed by a finite time regardless of its jumps.
    fn jumps_to_clear(&self, x0: i64) -> Option<i64> {
        match self.head {
            Step::Down => Some((self.anchor.0 - x0 + 1).max(0)),
            Step::Right => None,
        }
    }

    /// Time after which no point is in the region if the head is horizontal.
    fn time_to_clear(&self) -> Option<i64> {
        match self.head {
            Step::Right => Some(self.anchor.1),
            Step::Down => None,
        }
    }
}

/// `N` copies of a staircase, copy `i` (0-based) shifted `i` sites left.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NBoundary {
    pub base: Staircase,
    pub copies: usize,
}

impl NBoundary {
    pub fn new(base: Staircase, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidConfig("an N-boundary needs N >= 1".into()));
        }
        Ok(NBoundary { base, copies })
    }

    pub fn copy(&self, i: usize) -> Staircase {
        self.base.shifted(-(i as i64))
    }
}

/// Sum of one-step weights from a boundary point into the complement of the
/// enclosed region: `q [(x, t+1) outside] + p [(x+1, t+1) outside]`.
pub fn exit_probability<S: Scalar>(point: (i64, i64), b: &Staircase, params: &ModelParams<S>) -> Result<S> {
    if !b.contains(point) {
        return Err(Error::InvalidConfig(format!("{point:?} is not on the boundary")));
    }
    let (x, t) = point;
    let mut acc = S::zero();
    if !b.encloses((x, t + 1)) {
        acc = acc + params.q.clone();
    }
    if !b.encloses((x + 1, t + 1)) {
        acc = acc + params.p.clone();
    }
    Ok(acc)
}

fn check_initial(nb: &NBoundary, initial: &SpaceTimeConfig) -> Result<()> {
    if initial.len() != nb.copies {
        return Err(Error::InvalidConfig("initial configuration size differs from N".into()));
    }
    if !is_admissible(initial) {
        return Err(Error::InvalidConfig("initial configuration is not admissible".into()));
    }
    for (i, &pt) in initial.points.iter().enumerate() {
        if !nb.copy(i).encloses(pt) {
            return Err(Error::InvalidConfig(format!(
                "initial point {pt:?} lies outside boundary copy {i}"
            )));
        }
    }
    Ok(())
}

/// Probability that the trajectories leave the N-boundary exactly at
/// `config`: the exit weights times the generalized Green function.
pub fn boundary_measure<S: Scalar>(
    config: &SpaceTimeConfig,
    nb: &NBoundary,
    initial: &SpaceTimeConfig,
    params: &ModelParams<S>,
) -> Result<S> {
    if config.len() != nb.copies {
        return Err(Error::InvalidConfig("configuration size differs from N".into()));
    }
    check_initial(nb, initial)?;
    let mut w = S::one();
    for (i, &pt) in config.points.iter().enumerate() {
        w = w * exit_probability(pt, &nb.copy(i), params)?;
    }
    if !is_admissible(config) {
        return Err(Error::InvalidConfig("boundary configuration is not admissible".into()));
    }
    if w.is_zero() {
        return Ok(w);
    }
    Ok(w * ggf_det_weak(config, initial, params)?)
}

/// `P(Bin(n, p) < k)`.
pub fn binomial_lower_tail(n: i64, k: i64, p: f64) -> f64 {
    if k <= 0 {
        return 0.0;
    }
    if n < k {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut lc = 0.0;
    let mut acc = 0.0;
    for j in 0..k {
        if j > 0 {
            lc += ((n - j + 1) as f64).ln() - (j as f64).ln();
        }
        acc += (lc + j as f64 * lp + (n - j) as f64 * lq).exp();
    }
    acc.min(1.0)
}

/// Upper bound on the probability that some particle has not crossed its
/// boundary copy by time `t_max`.
///
/// Particle `n` makes its `k`-th jump no later than the larger of its own
/// `(k-1)`-th jump and the `k`-th jump of particle `n-1`, plus an independent
/// geometric wait. Bounding the resulting last-passage time by the sum over
/// all required jumps gives `P(Bin(t_max - t0, p) < K)` with `K` the total
/// number of jumps needed.
pub fn tail_bound(nb: &NBoundary, initial: &SpaceTimeConfig, t_max: i64, p: f64) -> f64 {
    let t0 = initial.points.iter().map(|pt| pt.1).max().unwrap_or(0);
    let mut total = 0i64;
    for (i, &(x0, _)) in initial.points.iter().enumerate() {
        let c = nb.copy(i);
        if let Some(tc) = c.time_to_clear() {
            if t_max <= tc {
                return 1.0;
            }
            continue;
        }
        total += c.jumps_to_clear(x0).unwrap_or(0);
    }
    binomial_lower_tail(t_max - t0, total, p)
}

/// Smallest horizon whose tail bound is below `tail_tol`, up to `cap`.
pub fn horizon_for(nb: &NBoundary, initial: &SpaceTimeConfig, p: f64, tail_tol: f64, cap: i64) -> Result<i64> {
    let t0 = initial.points.iter().map(|pt| pt.1).max().unwrap_or(0);
    let mut t = t0;
    while tail_bound(nb, initial, t, p) >= tail_tol {
        t += 1;
        if t > cap {
            return Err(Error::NonConvergence(format!(
                "boundary tail bound still above {tail_tol:e} at t = {cap}"
            )));
        }
    }
    Ok(t)
}

/// Default cap on the truncation horizon.
pub const DEFAULT_HORIZON_CAP: i64 = 2_000;

/// Sum of the boundary measure over every admissible crossing configuration
/// with times up to `t_max`. Configurations are visited with particle 1
/// outermost, times nondecreasing down the particle index.
pub fn boundary_sum<S: Scalar>(
    nb: &NBoundary,
    initial: &SpaceTimeConfig,
    t_max: i64,
    params: &ModelParams<S>,
) -> Result<S> {
    check_initial(nb, initial)?;
    let n = nb.copies;
    let candidates: Vec<Vec<(i64, i64)>> = (0..n)
        .map(|i| {
            let (x0, t0) = initial.points[i];
            let mut pts = nb.copy(i).reachable_points(x0, t0, t_max);
            pts.sort_by_key(|&(x, t)| (t, x));
            pts
        })
        .collect();
    let exits: Vec<Vec<S>> = candidates
        .iter()
        .enumerate()
        .map(|(i, pts)| {
            let c = nb.copy(i);
            pts.iter()
                .map(|&pt| exit_probability(pt, &c, params))
                .collect::<Result<Vec<S>>>()
        })
        .collect::<Result<_>>()?;
    // entries[i][j][c] = F_{j-i}(x_c - x0_j, t_c - t0_j) for candidate c of particle i
    let entries: Vec<Vec<Vec<S>>> = candidates
        .iter()
        .enumerate()
        .map(|(i, pts)| {
            (0..n)
                .map(|j| {
                    let (x0, t0) = initial.points[j];
                    pts.iter()
                        .map(|&(x, t)| f_n(FIndex::new(j as i64 - i as i64, x - x0, t - t0), params))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut acc = S::zero();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    struct Ctx<'a, S: Scalar> {
        candidates: &'a [Vec<(i64, i64)>],
        exits: &'a [Vec<S>],
        entries: &'a [Vec<Vec<S>>],
    }
    fn rec<S: Scalar>(i: usize, cx: &Ctx<'_, S>, chosen: &mut Vec<usize>, acc: &mut S) {
        let n = cx.candidates.len();
        if i == n {
            let mut w = S::one();
            for (j, &c) in chosen.iter().enumerate() {
                w = w * cx.exits[j][c].clone();
            }
            if !w.is_zero() {
                let m: Vec<Vec<S>> = chosen
                    .iter()
                    .enumerate()
                    .map(|(r, &c)| (0..n).map(|j| cx.entries[r][j][c].clone()).collect())
                    .collect();
                *acc = acc.clone() + w * S::det(m);
            }
            return;
        }
        for (c, &(x, t)) in cx.candidates[i].iter().enumerate() {
            if i > 0 {
                let (px, pt) = cx.candidates[i - 1][chosen[i - 1]];
                if t < pt || x >= px {
                    continue;
                }
            }
            chosen.push(c);
            rec(i + 1, cx, chosen, acc);
            chosen.pop();
        }
    }
    let cx = Ctx {
        candidates: &candidates,
        exits: &exits,
        entries: &entries,
    };
    rec(0, &cx, &mut chosen, &mut acc);
    Ok(acc)
}

/// Total boundary mass, truncated at the first horizon whose tail bound is
/// below `tail_tol`. Returns the sum and the horizon used.
pub fn boundary_normalization<S: Scalar>(
    nb: &NBoundary,
    initial: &SpaceTimeConfig,
    params: &ModelParams<S>,
    tail_tol: f64,
) -> Result<(S, i64)> {
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidParams("tail_tol must be positive".into()));
    }
    let t_max = horizon_for(nb, initial, params.p.to_f64(), tail_tol, DEFAULT_HORIZON_CAP)?;
    Ok((boundary_sum(nb, initial, t_max, params)?, t_max))
}
