//! Determinants: fraction-free Bareiss elimination for rationals, partially
//! pivoted LU for floats.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact determinant. Rows are cleared of denominators, the integer matrix is
/// reduced by Bareiss, and the row scalings are divided back out.
pub fn det_rational(m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    if n == 0 {
        return BigRational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in &m {
        assert_eq!(row.len(), n, "determinant of a non-square matrix");
        let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        a.push(row.iter().map(|v| v.numer() * (&l / v.denom())).collect());
        scale *= l;
    }
    BigRational::new(bareiss(a), scale)
}

/// Bareiss elimination on an integer matrix; every division is exact.
pub fn bareiss(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut flip = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    flip = !flip;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if flip {
        -d
    } else {
        d
    }
}

/// LU with partial pivoting.
pub fn det_f64(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for k in 0..n {
        let (piv, maxv) = (k..n)
            .map(|r| (r, a[r][k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if maxv == 0.0 {
            return 0.0;
        }
        if piv != k {
            a.swap(k, piv);
            det = -det;
        }
        let pivot = a[k][k];
        det *= pivot;
        let (top, rest) = a.split_at_mut(k + 1);
        let prow = &top[k];
        for row in rest.iter_mut() {
            let f = row[k] / pivot;
            if f != 0.0 {
                for j in k + 1..n {
                    row[j] -= f * prow[j];
                }
            }
        }
    }
    det
}

/// Osborne balancing: returns `d` such that `diag(d) A diag(d)^-1` has
/// comparable off-diagonal row and column norms. The determinant is unchanged.
pub fn osborne_scaling(a: &[Vec<f64>], sweeps: usize) -> Vec<f64> {
    let n = a.len();
    let mut d = vec![1.0f64; n];
    for _ in 0..sweeps {
        let mut changed = false;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += (a[j][i] * d[j] / d[i]).abs();
                    r += (a[i][j] * d[i] / d[j]).abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let f = (c / r).sqrt();
            if (f - 1.0).abs() > 0.05 {
                d[i] *= f;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    d
}
