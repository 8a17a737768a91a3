//! Monte Carlo simulation of the backward sequential update.
//!
//! Every trial draws from its own ChaCha8 stream, selected by the trial
//! index on a generator seeded once from the user seed, so results do not
//! depend on how trials are spread over threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::ParticleConfig;
use crate::scalar::ModelParams;

/// Generator for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Positions (rightmost first), time, and per-particle jump-off times for
/// the sites `x + N - n`.
#[derive(Clone, Debug)]
pub struct SimState {
    pub positions: Vec<i64>,
    pub time: i64,
    pub rng_seed: u64,
    pub jump_off_log: Vec<Option<i64>>,
    exit_sites: Vec<i64>,
    rng: ChaCha8Rng,
}

impl SimState {
    /// Start from `init` with jump-off sites `x + N - n`, drawing from
    /// stream `trial` of `seed`.
    pub fn new(init: &ParticleConfig, x: i64, seed: u64, trial: u64) -> Self {
        let n = init.len() as i64;
        SimState {
            positions: init.coords().to_vec(),
            time: 0,
            rng_seed: seed,
            jump_off_log: vec![None; init.len()],
            exit_sites: (1..=n).map(|i| x + n - i).collect(),
            rng: trial_rng(seed, trial),
        }
    }

    pub fn config(&self) -> ParticleConfig {
        ParticleConfig::new(self.positions.clone()).expect("exclusion is preserved")
    }

    pub fn all_jumped(&self) -> bool {
        self.jump_off_log.iter().all(Option::is_some)
    }
}

/// One sweep, rightmost particle first. A particle with a vacant target
/// (after the moves already made in this sweep) hops with probability `p`.
pub fn step(s: &mut SimState, params: &ModelParams<f64>) {
    let p = params.p;
    for i in 0..s.positions.len() {
        let free = i == 0 || s.positions[i] + 1 < s.positions[i - 1];
        if free && s.rng.random::<f64>() < p {
            if s.positions[i] == s.exit_sites[i] && s.jump_off_log[i].is_none() {
                s.jump_off_log[i] = Some(s.time);
            }
            s.positions[i] += 1;
        }
    }
    s.time += 1;
}

/// Jump-off times of every uncensored trial, in trial order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpOffSample {
    pub n: i64,
    pub x: i64,
    pub times: Vec<Vec<i64>>,
    pub censored: usize,
    pub trials: usize,
}

impl JumpOffSample {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.trials.max(1) as f64
    }

    /// Estimate and standard error of `P(t_{n_i} <= a_i for all i)`.
    pub fn cdf(&self, labels: &[i64], thresholds: &[i64]) -> (f64, f64) {
        let hits = self
            .times
            .iter()
            .filter(|t| labels.iter().zip(thresholds).all(|(&n, &a)| t[(n - 1) as usize] <= a))
            .count();
        binomial_estimate(hits, self.times.len())
    }

    /// Estimate and standard error of `P(t_n = t)`.
    pub fn pmf(&self, n: i64, t: i64) -> (f64, f64) {
        let hits = self.times.iter().filter(|v| v[(n - 1) as usize] == t).count();
        binomial_estimate(hits, self.times.len())
    }

    /// Sample mean and standard error of `t_n`.
    pub fn mean(&self, n: i64) -> (f64, f64) {
        let k = self.times.len() as f64;
        let vals = self.times.iter().map(|v| v[(n - 1) as usize] as f64);
        let mean = vals.clone().sum::<f64>() / k;
        let var = vals.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0).max(1.0);
        (mean, (var / k).sqrt())
    }

    /// Histogram of `t_n`.
    pub fn histogram(&self, n: i64) -> BTreeMap<i64, usize> {
        let mut h = BTreeMap::new();
        for v in &self.times {
            *h.entry(v[(n - 1) as usize]).or_insert(0) += 1;
        }
        h
    }
}

fn binomial_estimate(hits: usize, total: usize) -> (f64, f64) {
    if total == 0 {
        return (f64::NAN, f64::NAN);
    }
    let f = hits as f64 / total as f64;
    (f, (f * (1.0 - f) / total as f64).sqrt())
}

/// Simulate `trials` runs of `N` particles from step initial condition until
/// every particle has left its site `x + N - n`, or `t_cap` steps pass.
pub fn run_jump_off(
    n: i64,
    x: i64,
    params: &ModelParams<f64>,
    t_cap: i64,
    trials: usize,
    seed: u64,
) -> Result<JumpOffSample> {
    if n < 1 {
        return Err(Error::InvalidConfig("N must be at least 1".into()));
    }
    if x + n < 1 {
        return Err(Error::InvalidConfig(format!(
            "jump-off site x + N - n lies behind the start for x = {x}, N = {n}"
        )));
    }
    let init = ParticleConfig::step(n as usize);
    let runs: Vec<Option<Vec<i64>>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut s = SimState::new(&init, x, seed, trial);
            while !s.all_jumped() {
                if s.time >= t_cap {
                    return None;
                }
                step(&mut s, params);
            }
            Some(s.jump_off_log.iter().map(|t| t.unwrap()).collect())
        })
        .collect();
    let censored = runs.iter().filter(|r| r.is_none()).count();
    Ok(JumpOffSample {
        n,
        x,
        times: runs.into_iter().flatten().collect(),
        censored,
        trials,
    })
}

/// Trajectory of one trial: positions at times `0..=t`.
pub fn trajectory(
    init: &ParticleConfig,
    t: i64,
    params: &ModelParams<f64>,
    seed: u64,
    trial: u64,
) -> Vec<Vec<i64>> {
    let mut s = SimState::new(init, 0, seed, trial);
    let mut out = vec![s.positions.clone()];
    for _ in 0..t {
        step(&mut s, params);
        out.push(s.positions.clone());
    }
    out
}

/// Counts of final configurations after `t` steps from `init`.
pub fn empirical_green(
    init: &ParticleConfig,
    t: i64,
    params: &ModelParams<f64>,
    trials: usize,
    seed: u64,
) -> BTreeMap<Vec<i64>, usize> {
    let finals: Vec<Vec<i64>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut s = SimState::new(init, 0, seed, trial);
            for _ in 0..t {
                step(&mut s, params);
            }
            s.positions
        })
        .collect();
    let mut h = BTreeMap::new();
    for f in finals {
        *h.entry(f).or_insert(0) += 1;
    }
    h
}
