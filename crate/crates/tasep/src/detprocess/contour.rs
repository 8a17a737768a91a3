//! Numerical contour integrals for Psi, Phi, the phi-convolution and the
//! kernel. Trapezoidal rule on circles, node count doubled to convergence.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::ModelParams;

use super::KernelIndex;

/// Circle geometry. The outer circle is centred at 1/2 with radius
/// `1/2 + delta` and encloses 0 and 1; the inner circle is centred at 1.
/// `delta` is reduced to `p/(2q)` when needed so that the pole at `-p/q`
/// stays outside. Keeping the outer circle far from 0 matters: the summand
/// carries `(p/w + q)^tau`, and near the origin that factor is large enough
/// for cancellation to swamp the result at moderate `tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourGeometry {
    pub delta: f64,
    pub tol: f64,
    pub min_nodes: usize,
    pub max_nodes: usize,
}

impl Default for ContourGeometry {
    fn default() -> Self {
        ContourGeometry {
            delta: 1.0,
            tol: 1e-10,
            min_nodes: 32,
            max_nodes: 1 << 15,
        }
    }
}

impl ContourGeometry {
    fn delta_eff(&self, params: &ModelParams<f64>) -> f64 {
        self.delta.min(0.5 * params.p / params.q)
    }

    /// (centre, radius) of the circle around {0, 1}.
    pub fn outer(&self, params: &ModelParams<f64>) -> (f64, f64) {
        (0.5, 0.5 + self.delta_eff(params))
    }

    /// (centre, radius) of the circle around 1, inside the outer one.
    pub fn inner(&self, params: &ModelParams<f64>) -> (f64, f64) {
        let d = self.delta_eff(params);
        (1.0, (0.5 * d).min(0.25 * (1.0 + params.p / params.q)))
    }
}

/// Trapezoid sum and the mean absolute value of the summand.
fn circle_sum<F: Fn(Complex64) -> Complex64>(f: &F, c: f64, r: f64, n: usize) -> (Complex64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for k in 0..n {
        let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
        let z = Complex64::new(c, 0.0) + e * r;
        let v = f(z) * e * r;
        mag += v.norm();
        acc += v;
    }
    (acc / n as f64, mag / n as f64)
}

/// Successive estimates agree to `tol`, or to within rounding of the summand
/// magnitude when that is the larger floor.
fn settled(diff: f64, value: Complex64, scale: f64, tol: f64) -> bool {
    diff < tol * value.norm().max(1.0) || diff < ROUNDING_FLOOR * scale
}

const ROUNDING_FLOOR: f64 = 1e3 * f64::EPSILON;

/// `(1/2 pi i) \oint f(z) dz` on a circle, doubling nodes until successive
/// estimates agree. Returns the value and the last difference.
///
/// When `p` is small the circle passes within `p/(2q)` of the origin and
/// high-order poles there make the summand large; the achievable accuracy is
/// then set by rounding rather than by `tol`.
pub fn circle_integral<F: Fn(Complex64) -> Complex64>(
    f: F,
    centre: f64,
    radius: f64,
    geom: &ContourGeometry,
) -> Result<(Complex64, f64)> {
    let mut n = geom.min_nodes;
    let (mut prev, _) = circle_sum(&f, centre, radius, n);
    while n < geom.max_nodes {
        n *= 2;
        let (cur, scale) = circle_sum(&f, centre, radius, n);
        let diff = (cur - prev).norm();
        if settled(diff, cur, scale, geom.tol) {
            return Ok((cur, diff));
        }
        prev = cur;
    }
    Err(Error::NonConvergence(format!(
        "contour quadrature did not settle with {n} nodes"
    )))
}

fn cpow(z: Complex64, e: i64) -> Complex64 {
    match i32::try_from(e) {
        Ok(e) => z.powi(e),
        Err(_) => z.powf(e as f64),
    }
}

/// Psi_k(tau) as a contour integral around {0, 1}.
pub fn psi_contour(
    k: i64,
    tau: i64,
    m: i64,
    params: &ModelParams<f64>,
    geom: &ContourGeometry,
) -> Result<f64> {
    let (p, q) = (params.p, params.q);
    let one = Complex64::new(1.0, 0.0);
    let f = |w: Complex64| cpow(w * q + p, tau) * cpow(w - one, k) * cpow(w, m - k - 2 - tau);
    let (c, r) = geom.outer(params);
    Ok(circle_integral(f, c, r, geom)?.0.re)
}

/// Phi_j(tau) as a contour integral around 1.
pub fn phi_cap_contour(
    j: i64,
    tau: i64,
    m: i64,
    params: &ModelParams<f64>,
    geom: &ContourGeometry,
) -> Result<f64> {
    if j < 0 {
        return Ok(0.0);
    }
    let (p, q) = (params.p, params.q);
    let one = Complex64::new(1.0, 0.0);
    let f = |v: Complex64| {
        cpow(v * q + p, -tau - 1) * cpow(v, tau + 1) * cpow(v - one, -j - 1) * cpow(v, j - m - 1) * p
    };
    let (c, r) = geom.inner(params);
    Ok(circle_integral(f, c, r, geom)?.0.re)
}

/// `p \oint dz/z^2 ((z-1)/z)^(n1-n2) (q + p/z)^(tau1-tau2-1)` around {0, 1},
/// for `n2 > n1`; zero otherwise.
pub fn phi_conv_contour(
    n1: i64,
    n2: i64,
    tau1: i64,
    tau2: i64,
    params: &ModelParams<f64>,
    geom: &ContourGeometry,
) -> Result<f64> {
    if n2 <= n1 {
        return Ok(0.0);
    }
    let (p, q) = (params.p, params.q);
    let one = Complex64::new(1.0, 0.0);
    let f = |z: Complex64| {
        let zi = one / z;
        zi * zi * p * cpow((z - one) * zi, n1 - n2) * cpow(zi * p + q, tau1 - tau2 - 1)
    };
    let (c, r) = geom.outer(params);
    Ok(circle_integral(f, c, r, geom)?.0.re)
}

/// Kernel by the double-contour representation minus the single-contour
/// phi term. The w-circle encloses 0 and the whole v-circle.
pub fn kernel_contour(
    a: KernelIndex,
    b: KernelIndex,
    m: i64,
    params: &ModelParams<f64>,
    geom: &ContourGeometry,
) -> Result<f64> {
    let (p, q) = (params.p, params.q);
    let one = Complex64::new(1.0, 0.0);
    let (cw, rw) = geom.outer(params);
    let (cv, rv) = geom.inner(params);
    let aw = |w: Complex64| {
        let wi = one / w;
        cpow(wi * p + q, a.tau) * cpow((w - one) * wi, a.n) * cpow(w, m) * wi
    };
    let bv = |v: Complex64| {
        let vi = one / v;
        cpow(v, -m) * vi / (cpow(vi * p + q, b.tau + 1) * cpow((v - one) * vi, b.n))
    };
    let nodes = |c: f64, r: f64, n: usize| -> Vec<(Complex64, Complex64)> {
        (0..n)
            .map(|k| {
                let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
                (Complex64::new(c, 0.0) + e * r, e * r / n as f64)
            })
            .collect()
    };
    let double = |nv: usize, nw: usize| -> (Complex64, f64) {
        let vs: Vec<(Complex64, Complex64, Complex64)> = nodes(cv, rv, nv)
            .into_iter()
            .map(|(v, dv)| (v, dv, bv(v)))
            .collect();
        let ws: Vec<(Complex64, Complex64)> = nodes(cw, rw, nw)
            .into_iter()
            .map(|(w, dw)| (w, dw * aw(w)))
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for &(v, dv, bvv) in &vs {
            let mut inner = Complex64::new(0.0, 0.0);
            for &(w, wa) in &ws {
                let t = wa / (w - v);
                mag += (t * bvv * dv).norm();
                inner += t;
            }
            acc += inner * bvv * dv;
        }
        (acc * p, mag * p)
    };
    let mut nv = geom.min_nodes.max(16);
    let mut nw = 4 * nv;
    let (mut prev, _) = double(nv, nw);
    let mut done = None;
    while nw < geom.max_nodes {
        nv *= 2;
        nw *= 2;
        let (cur, scale) = double(nv, nw);
        if settled((cur - prev).norm(), cur, scale, geom.tol) {
            done = Some(cur);
            break;
        }
        prev = cur;
    }
    let Some(dbl) = done else {
        return Err(Error::NonConvergence(
            "double contour quadrature did not settle".into(),
        ));
    };
    let single = phi_conv_contour(a.n, b.n, a.tau, b.tau, params, geom)?;
    Ok(dbl.re - single)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_separates_poles() {
        let g = ContourGeometry::default();
        for p in [0.01, 0.05, 1.0 / 3.0, 0.5, 0.9] {
            let m = ModelParams::float(p).unwrap();
            let (c, r) = g.outer(&m);
            let pole = -p / (1.0 - p);
            assert!((pole - c).abs() > r);
            assert!(c - r < 0.0 && c + r > 1.0);
            let (ci, ri) = g.inner(&m);
            assert!(ci + ri < c + r && ci - ri > 0.0);
        }
    }

    #[test]
    fn residue_of_simple_pole() {
        let g = ContourGeometry::default();
        let (v, _) = circle_integral(|z| Complex64::new(1.0, 0.0) / (z - 0.3), 0.5, 0.6, &g).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
