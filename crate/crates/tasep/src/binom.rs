//! Generalized binomial coefficients with memoized Pascal rows.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub const DEFAULT_PASCAL_CAP: usize = 512;

/// Pascal rows `0..cap` are cached on first use; larger rows are computed
/// multiplicatively on demand.
pub struct BinomialTable {
    cap: usize,
    rows: RwLock<Vec<Vec<BigInt>>>,
}

impl BinomialTable {
    pub fn with_cap(cap: usize) -> Self {
        BinomialTable {
            cap,
            rows: RwLock::new(vec![vec![BigInt::one()]]),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// C(a, b) for integer `a`, `b`: zero for `b < 0`, and
    /// `(-1)^b C(b-a-1, b)` for negative `a`.
    pub fn get(&self, a: i64, b: i64) -> BigInt {
        if b < 0 {
            return BigInt::zero();
        }
        if a < 0 {
            let v = self.nonneg(b - a - 1, b);
            return if b % 2 == 0 { v } else { -v };
        }
        self.nonneg(a, b)
    }

    fn nonneg(&self, a: i64, b: i64) -> BigInt {
        debug_assert!(a >= 0 && b >= 0);
        if b > a {
            return BigInt::zero();
        }
        let b = b.min(a - b);
        let (au, bu) = (a as usize, b as usize);
        if au >= self.cap {
            return direct(a, b);
        }
        {
            let rows = self.rows.read().expect("binomial table poisoned");
            if au < rows.len() {
                return rows[au][bu].clone();
            }
        }
        let mut rows = self.rows.write().expect("binomial table poisoned");
        while rows.len() <= au {
            let prev = rows.last().expect("row 0 present");
            let mut next = Vec::with_capacity(prev.len() + 1);
            next.push(BigInt::one());
            for w in prev.windows(2) {
                next.push(&w[0] + &w[1]);
            }
            next.push(BigInt::one());
            rows.push(next);
        }
        rows[au][bu].clone()
    }
}

fn direct(a: i64, b: i64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..b {
        acc *= BigInt::from(a - i);
        acc /= BigInt::from(i + 1);
    }
    acc
}

fn table() -> &'static BinomialTable {
    static TABLE: OnceLock<BinomialTable> = OnceLock::new();
    TABLE.get_or_init(|| BinomialTable::with_cap(DEFAULT_PASCAL_CAP))
}

/// Generalized binomial coefficient from the shared table.
pub fn binom(a: i64, b: i64) -> BigInt {
    table().get(a, b)
}

/// Floating-point C(a, b) for `a >= 0`, by the multiplicative formula.
pub fn binom_f64(a: i64, b: i64) -> f64 {
    if b < 0 || (a >= 0 && b > a) {
        return 0.0;
    }
    if a < 0 {
        let v = binom_f64(b - a - 1, b);
        return if b % 2 == 0 { v } else { -v };
    }
    let b = b.min(a - b);
    let mut acc = 1.0f64;
    for i in 0..b {
        acc = acc * (a - i) as f64 / (i + 1) as f64;
    }
    acc
}
