//! Hydrodynamics, scaling constants, the Airy function, the extended Airy2
//! kernel, and the rescaled-kernel comparison.

pub mod airy;
pub mod quad;

use serde::{Deserialize, Serialize};

pub use airy::{airy_ai, airy_ai_prime, airy_pair};

use crate::detprocess::{kernel_m, KernelIndex};
use crate::error::{Error, Result};
use crate::scalar::{ModelParams, Rational, Scalar};
use num_traits::Signed;

/// Stationary current `p rho (1 - rho) / (1 - p rho)`.
pub fn current(rho: f64, params: &ModelParams<f64>) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParams(format!("density {rho} outside [0, 1]")));
    }
    let p = params.p;
    Ok(p * rho * (1.0 - rho) / (1.0 - p * rho))
}

/// Macroscopic density at `x/t` from step initial condition.
pub fn density_profile(v: f64, params: &ModelParams<f64>) -> f64 {
    let (p, q) = (params.p, params.q);
    if v < -p / q {
        1.0
    } else if v >= p {
        0.0
    } else {
        (1.0 - (q / (1.0 - v)).sqrt()) / p
    }
}

/// Most probable jump-off time per unit scale, `(sqrt(q nu) + sqrt(gamma))^2 / p`.
pub fn omega_nu(nu: f64, gamma: f64, params: &ModelParams<f64>) -> Result<f64> {
    if nu < 0.0 || gamma < 0.0 {
        return Err(Error::InvalidParams(format!("need nu, gamma >= 0, got {nu}, {gamma}")));
    }
    Ok(((params.q * nu).sqrt() + gamma.sqrt()).powi(2) / params.p)
}

/// Parameters of the saddle-point analysis. `gamma = (x + N) / L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingContext {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub nu: f64,
}

impl ScalingContext {
    pub fn new(params: &ModelParams<f64>, gamma: f64, nu: f64) -> Result<Self> {
        if !(gamma > 0.0) || !(nu > 0.0) {
            return Err(Error::InvalidParams(format!(
                "scaling needs gamma > 0 and nu > 0, got {gamma}, {nu}"
            )));
        }
        Ok(ScalingContext {
            p: params.p,
            q: params.q,
            gamma,
            nu,
        })
    }

    pub fn omega_at(&self, nu: f64) -> f64 {
        ((self.q * nu).sqrt() + self.gamma.sqrt()).powi(2) / self.p
    }

    pub fn w0_at(&self, nu: f64) -> f64 {
        1.0 + (nu / (self.q * self.gamma)).sqrt()
    }

    pub fn w0(&self) -> f64 {
        self.w0_at(self.nu)
    }

    /// `f_nu(w) = omega(nu) g(w) + nu h(w) + gamma ln w`.
    pub fn f_at(&self, nu: f64, w: f64) -> f64 {
        self.omega_at(nu) * self.g(w) + nu * self.h(w) + self.gamma * w.ln()
    }

    pub fn g(&self, w: f64) -> f64 {
        (self.q + self.p / w).ln()
    }

    pub fn h(&self, w: f64) -> f64 {
        (1.0 - 1.0 / w).ln()
    }

    /// First three derivatives of `f_nu` at `w`, analytically.
    pub fn f_derivatives(&self, w: f64) -> [f64; 3] {
        let (p, q) = (self.p, self.q);
        let a = q * w + p;
        let g = [q / a - 1.0 / w, -q * q / (a * a) + 1.0 / (w * w), 2.0 * q.powi(3) / a.powi(3) - 2.0 / w.powi(3)];
        let h = [
            1.0 / (w - 1.0) - 1.0 / w,
            -1.0 / (w - 1.0).powi(2) + 1.0 / (w * w),
            2.0 / (w - 1.0).powi(3) - 2.0 / w.powi(3),
        ];
        let l = [1.0 / w, -1.0 / (w * w), 2.0 / w.powi(3)];
        let om = self.omega_at(self.nu);
        [0, 1, 2].map(|k| om * g[k] + self.nu * h[k] + self.gamma * l[k])
    }

    /// `kappa_h` with the `nu` dependence, from derivatives at the saddle.
    pub fn kappa_h_tilde(&self) -> f64 {
        let w0p = 0.5 / (self.nu * self.q * self.gamma).sqrt();
        let f3 = self.f_derivatives(self.w0())[2];
        w0p * f3.cbrt() / 2f64.cbrt()
    }

    /// `kappa_t` with the `nu` dependence, from derivatives at the saddle.
    pub fn kappa_t_tilde(&self) -> f64 {
        let w = self.w0();
        let g1 = self.q / (self.q * w + self.p) - 1.0 / w;
        let f3 = self.f_derivatives(w)[2];
        -2f64.cbrt() * g1 / f3.cbrt()
    }

    /// Closed form of [`Self::kappa_h_tilde`].
    pub fn kappa_h_tilde_closed(&self) -> f64 {
        let (q, g, nu) = (self.q, self.gamma, self.nu);
        nu.powf(-2.0 / 3.0) * q.powf(1.0 / 6.0) * g.cbrt()
            / (2.0 * (nu.sqrt() + (g * q).sqrt()).cbrt() * (g.sqrt() + (nu * q).sqrt()).cbrt())
    }

    /// Closed form of [`Self::kappa_t_tilde`].
    pub fn kappa_t_tilde_closed(&self) -> f64 {
        let (p, q, g, nu) = (self.p, self.q, self.gamma, self.nu);
        p * nu.powf(1.0 / 6.0) * q.powf(-1.0 / 6.0) * g.powf(1.0 / 6.0)
            / ((nu.sqrt() + (g * q).sqrt()).powf(2.0 / 3.0) * (g.sqrt() + (nu * q).sqrt()).powf(2.0 / 3.0))
    }

    /// Horizontal scaling constant for the scale `L`.
    pub fn kappa_h(&self) -> f64 {
        let (q, g) = (self.q, self.gamma);
        q.powf(1.0 / 6.0) * g.cbrt() / (2.0 * (1.0 + (q * g).sqrt()).cbrt() * (g.sqrt() + q.sqrt()).cbrt())
    }

    /// Time scaling constant for the scale `L`.
    pub fn kappa_t(&self) -> f64 {
        let (p, q, g) = (self.p, self.q, self.gamma);
        p * q.powf(-1.0 / 6.0) * g.powf(1.0 / 6.0)
            / ((1.0 + (q * g).sqrt()).powf(2.0 / 3.0) * (g.sqrt() + q.sqrt()).powf(2.0 / 3.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub w0: f64,
    pub kappa_h: f64,
    pub kappa_t: f64,
    /// `|f'(w0)|` and `|f''(w0)|` by eighth-order central differences.
    pub residuals: [f64; 2],
}

/// Eighth-order central differences for the first and second derivative.
pub fn central_derivatives<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> (f64, f64) {
    const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    const D2: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
    let f0 = f(x);
    let mut d1 = 0.0;
    let mut d2 = -205.0 / 72.0 * f0;
    for (k, (a, b)) in D1.iter().zip(&D2).enumerate() {
        let s = (k + 1) as f64 * h;
        let (fp, fm) = (f(x + s), f(x - s));
        d1 += a * (fp - fm);
        d2 += b * (fp + fm);
    }
    (d1 / h, d2 / (h * h))
}

/// `w0`, `kappa_h`, `kappa_t` and the double-critical-point residuals.
pub fn scaling_constants(ctx: &ScalingContext) -> Result<ScalingConstants> {
    let w0 = ctx.w0();
    let (d1, d2) = central_derivatives(|w| ctx.f_at(ctx.nu, w), w0, 1e-2);
    let residuals = [d1.abs(), d2.abs()];
    if residuals.iter().any(|r| *r > 1e-8) {
        return Err(Error::NonConvergence(format!(
            "w0 = {w0} is not a double critical point: residuals {residuals:?}"
        )));
    }
    Ok(ScalingConstants {
        w0,
        kappa_h: ctx.kappa_h(),
        kappa_t: ctx.kappa_t(),
        residuals,
    })
}

/// Tolerance requested from the Airy2 quadratures.
pub const AIRY2_TOL: f64 = 1e-10;

/// Arguments below this are not reached by any integration range.
const AIRY_FLOOR: f64 = -400.0;

/// Extended Airy2 kernel.
pub fn airy2_kernel(xi1: f64, zeta1: f64, xi2: f64, zeta2: f64) -> Result<f64> {
    let d = xi2 - xi1;
    let prod = |l: f64| (l * d).exp() * airy_ai(l + zeta1) * airy_ai(l + zeta2);
    if d <= 0.0 {
        let hi = (16.0 - zeta1.min(zeta2)).max(1.0);
        Ok(quad::integrate(prod, 0.0, hi, AIRY2_TOL)?.0)
    } else {
        // |Ai Ai| <= 0.3 on the negative axis; stop where exp(l d) bounds it by 1e-12
        let lo = -(12.0 * 10f64.ln() / d);
        if lo + zeta1.max(zeta2) < AIRY_FLOOR {
            return Err(Error::NonConvergence(format!(
                "xi gap {d} too small for the left-branch integral"
            )));
        }
        Ok(-quad::integrate(prod, lo, 0.0, AIRY2_TOL)?.0)
    }
}

/// `Ai'(z)^2 - z Ai(z)^2`, the equal-time equal-argument kernel.
pub fn airy2_diagonal(zeta: f64) -> f64 {
    let (a, d) = airy_pair(zeta);
    d * d - zeta * a * a
}

/// Gaussian side of the Johansson identity, `tau' > tau`.
pub fn johansson_gaussian(tau: f64, tau_p: f64, xi: f64, xi_p: f64) -> f64 {
    let d = tau_p - tau;
    (-(xi - xi_p).powi(2) / (4.0 * d) - d * (xi + xi_p) / 2.0 + d.powi(3) / 12.0).exp()
        / (4.0 * std::f64::consts::PI * d).sqrt()
}

/// Integral side of the Johansson identity,
/// `\int exp(-lambda (tau - tau')) Ai(xi + lambda) Ai(xi' + lambda) d lambda`.
pub fn johansson_integral(tau: f64, tau_p: f64, xi: f64, xi_p: f64) -> Result<f64> {
    let d = tau_p - tau;
    if !(d > 0.0) {
        return Err(Error::InvalidParams("need tau' > tau".into()));
    }
    let f = |l: f64| (l * d).exp() * airy_ai(xi + l) * airy_ai(xi_p + l);
    let lo = -(12.0 * 10f64.ln() / d) - 2.0;
    let hi = (16.0 - xi.min(xi_p)).max(1.0);
    let (a, _) = quad::integrate(f, lo, 0.0, AIRY2_TOL)?;
    let (b, _) = quad::integrate(f, 0.0, hi, AIRY2_TOL)?;
    Ok(a + b)
}

/// Lattice indices `n = floor(L + u L^(2/3))`, `tau = floor(L omega(1 + u L^(-1/3)) + L^(1/3) s)`.
pub fn scaled_index(l: f64, u: f64, s: f64, ctx: &ScalingContext) -> KernelIndex {
    let n = (l + u * l.powf(2.0 / 3.0)).floor() as i64;
    let nu = 1.0 + u * l.powf(-1.0 / 3.0);
    let tau = (l * ctx.omega_at(nu) + l.cbrt() * s).floor() as i64;
    KernelIndex::new(n, tau)
}

/// Natural log of a positive rational of any size.
fn rational_ln(r: &Rational) -> Option<f64> {
    if Scalar::is_zero(r) || r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let ln_big = |v: &num_bigint::BigInt| {
        let bits = v.bits() as i64;
        let shift = (bits - 60).max(0);
        let top: num_bigint::BigInt = v >> shift as usize;
        let t: f64 = num_traits::ToPrimitive::to_f64(&top).unwrap();
        t.ln() + shift as f64 * std::f64::consts::LN_2
    };
    Some(ln_big(n) - ln_big(d))
}

/// `L^(1/3) K(n1,tau1; n2,tau2) / A_12` at the scaled points, with
/// `x + N = round(gamma L)` and the exact kernel.
pub fn rescaled_kernel(
    l: f64,
    (u1, s1): (f64, f64),
    (u2, s2): (f64, f64),
    ctx: &ScalingContext,
    params: &ModelParams<Rational>,
) -> Result<f64> {
    let m = (ctx.gamma * l).round() as i64;
    let a = scaled_index(l, u1, s1, ctx);
    let b = scaled_index(l, u2, s2, ctx);
    if a.n < 1 || b.n < 1 {
        return Err(Error::InvalidParams("scaled label below 1".into()));
    }
    let k = kernel_m(a, b, m, params);
    let nu1 = 1.0 + u1 * l.powf(-1.0 / 3.0);
    let nu2 = 1.0 + u2 * l.powf(-1.0 / 3.0);
    let (w1, w2) = (ctx.w0_at(nu1), ctx.w0_at(nu2));
    let ln_a = l * (ctx.f_at(nu1, w1) - ctx.f_at(nu2, w2)) + l.cbrt() * (s1 * ctx.g(w1) - s2 * ctx.g(w2));
    let sign = if k.is_negative() { -1.0 } else { 1.0 };
    match rational_ln(&k.abs()) {
        Some(mag) => Ok(sign * (mag - ln_a + l.ln() / 3.0).exp()),
        None => Ok(0.0),
    }
}

/// One-point diagonal comparison against `kappa_t K_Airy2(kappa_t s)`.
///
/// `s_eff` is the time offset measured from the lattice point actually used:
/// `(tau - L omega(n/L)) / L^(1/3)` with the floored `n` and `tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalComparison {
    pub l: f64,
    pub u: f64,
    pub s: f64,
    pub n: i64,
    pub tau: i64,
    pub s_eff: f64,
    pub scaled_kernel: f64,
    pub limit_nominal: f64,
    pub limit_effective: f64,
}

impl DiagonalComparison {
    pub fn deviation_nominal(&self) -> f64 {
        (self.scaled_kernel - self.limit_nominal).abs()
    }

    pub fn deviation_effective(&self) -> f64 {
        (self.scaled_kernel - self.limit_effective).abs()
    }
}

pub fn diagonal_comparison(
    l: f64,
    u: f64,
    s: f64,
    ctx: &ScalingContext,
    params: &ModelParams<Rational>,
) -> Result<DiagonalComparison> {
    let idx = scaled_index(l, u, s, ctx);
    let scaled_kernel = rescaled_kernel(l, (u, s), (u, s), ctx, params)?;
    let s_eff = (idx.tau as f64 - l * ctx.omega_at(idx.n as f64 / l)) / l.cbrt();
    let kt = ctx.kappa_t();
    Ok(DiagonalComparison {
        l,
        u,
        s,
        n: idx.n,
        tau: idx.tau,
        s_eff,
        scaled_kernel,
        limit_nominal: kt * airy2_diagonal(kt * s),
        limit_effective: kt * airy2_diagonal(kt * s_eff),
    })
}

/// Defaults used for the hydrodynamic and scaling helpers.
pub fn default_context(params: &ModelParams<f64>) -> ScalingContext {
    ScalingContext::new(params, 1.0, 1.0).expect("unit gamma and nu are valid")
}
