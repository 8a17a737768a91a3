#![allow(dead_code)]

use tasep::green::{is_admissible, ParticleConfig, SpaceTimeConfig};
use tasep::{ModelParams, Rational};

pub fn exact(num: i64, den: i64) -> ModelParams<Rational> {
    ModelParams::exact(num, den).unwrap()
}

pub fn grid_params() -> Vec<ModelParams<Rational>> {
    vec![exact(1, 3), exact(1, 2), exact(2, 3)]
}

/// Strictly decreasing configurations of `n` particles inside `lo..=hi`.
pub fn configs_in(n: usize, lo: i64, hi: i64) -> Vec<ParticleConfig> {
    fn rec(n: usize, lo: i64, top: i64, cur: &mut Vec<i64>, out: &mut Vec<ParticleConfig>) {
        if cur.len() == n {
            out.push(ParticleConfig::new(cur.clone()).unwrap());
            return;
        }
        for x in (lo..=top).rev() {
            cur.push(x);
            rec(n, lo, x - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, lo, hi, &mut Vec::new(), &mut out);
    out
}

/// Weakly increasing sequences of length `n` with entries in `lo..=hi`.
fn weak_increasing(n: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in lo..=hi {
        for mut rest in weak_increasing(n - 1, first, hi) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Admissible (final, initial) pairs with `t_i > t0_i`, every particle
/// displaced by at most `max_jump`, and total span `max t - min t0 <= span`.
pub fn admissible_pairs(n: usize, span: i64, max_jump: i64) -> Vec<(SpaceTimeConfig, SpaceTimeConfig)> {
    let mut out = Vec::new();
    let starts = configs_in(n, -(n as i64), 0);
    for x0 in &starts {
        for t0 in weak_increasing(n, 0, 1) {
            for t in weak_increasing(n, 1, span) {
                if t.iter().zip(&t0).any(|(a, b)| a <= b) {
                    continue;
                }
                let init = SpaceTimeConfig::new(x0.coords().iter().copied().zip(t0.iter().copied()).collect());
                let mut disp = vec![0i64; n];
                loop {
                    let xs: Vec<i64> = x0.coords().iter().zip(&disp).map(|(a, d)| a + d).collect();
                    let fin = SpaceTimeConfig::new(xs.into_iter().zip(t.iter().copied()).collect());
                    if is_admissible(&fin) && is_admissible(&init) {
                        out.push((fin, init.clone()));
                    }
                    let mut k = 0;
                    loop {
                        if k == n {
                            break;
                        }
                        disp[k] += 1;
                        if disp[k] <= max_jump.min(t[k] - t0[k]) {
                            break;
                        }
                        disp[k] = 0;
                        k += 1;
                    }
                    if k == n {
                        break;
                    }
                }
            }
        }
    }
    out
}
