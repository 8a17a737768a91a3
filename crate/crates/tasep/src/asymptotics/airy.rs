//! Airy function and its derivative.
//!
//! Maclaurin series for `|z| <= 6`. Beyond that, the defining integral
//! `Ai(z) = (1/2 pi i) \int exp(t^3/3 - z t) dt` is taken along the vertical
//! line `Re t = c`, which is an admissible deformation of the contour for any
//! `c > 0`. For `z > 6` the choice `c = sqrt(z)` is the steepest-descent path
//! through the saddle; for `z < -6` a small `c` keeps the integrand modest.
//! The trapezoid rule on that line converges geometrically.

use num_complex::Complex64;

pub const AI0: f64 = 0.355_028_053_887_817_24;
pub const AIP0: f64 = -0.258_819_403_792_806_8;

const SERIES_RADIUS: f64 = 6.0;

fn series(z: f64) -> (f64, f64) {
    // y = sum c_n z^n with c_2 = 0 and c_n = c_{n-3} / ((n-1) n)
    let mut c = [AI0, AIP0, 0.0];
    let mut ai = AI0 + AIP0 * z;
    let mut aip = AIP0;
    let mut zprev = z * z; // z^(n-1)
    let mut small = 0;
    for n in 3..400usize {
        let cn = c[n % 3] / ((n - 1) * n) as f64;
        c[n % 3] = cn;
        let td = n as f64 * cn * zprev;
        zprev *= z;
        let t = cn * zprev;
        ai += t;
        aip += td;
        if t.abs() < 1e-18 && td.abs() < 1e-18 {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    (ai, aip)
}

fn line_integral(z: f64, c: f64) -> (f64, f64) {
    let phi = |t: Complex64| t * t * t / 3.0 - t * z;
    let peak = phi(Complex64::new(c, 0.0)).re;
    let y_max = ((40.0 + peak.max(0.0)) / c).sqrt();
    let eval = |h: f64| -> (f64, f64) {
        let k_max = (y_max / h).ceil() as usize;
        let mut a = 0.0;
        let mut d = 0.0;
        for k in 0..=k_max {
            let t = Complex64::new(c, k as f64 * h);
            let e = phi(t).exp();
            let w = if k == 0 { 1.0 } else { 2.0 };
            a += w * e.re;
            d -= w * (t * e).re;
        }
        (a * h / (2.0 * std::f64::consts::PI), d * h / (2.0 * std::f64::consts::PI))
    };
    let mut h = 0.1;
    let mut prev = eval(h);
    loop {
        h *= 0.5;
        let cur = eval(h);
        let scale = 1e-14 * (1.0 + peak.exp());
        if ((cur.0 - prev.0).abs() < scale && (cur.1 - prev.1).abs() < scale) || h < 1e-5 {
            return cur;
        }
        prev = cur;
    }
}

/// Line offset for negative arguments: the integrand peaks at
/// `exp(c |z|)`, so `c` shrinks with `|z|` to bound the cancellation.
fn small_shift(z: f64) -> f64 {
    0.25f64.min(5.0 / z.abs())
}

/// `(Ai(z), Ai'(z))`.
pub fn airy_pair(z: f64) -> (f64, f64) {
    if z.abs() <= SERIES_RADIUS {
        series(z)
    } else if z > 0.0 {
        line_integral(z, z.sqrt())
    } else {
        line_integral(z, small_shift(z))
    }
}

pub fn airy_ai(z: f64) -> f64 {
    airy_pair(z).0
}

pub fn airy_ai_prime(z: f64) -> f64 {
    airy_pair(z).1
}
