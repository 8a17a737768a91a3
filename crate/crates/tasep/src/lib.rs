//! Discrete-time TASEP with backward sequential update: exact transition
//! weights, determinantal Green functions, boundary measures, the signed
//! determinantal process behind the current distribution, Fredholm
//! determinants, Monte Carlo, and the Airy2 scaling regime.

pub mod asymptotics;
pub mod binom;
pub mod boundary;
pub mod cli;
pub mod detprocess;
pub mod error;
pub mod fcore;
pub mod fredholm;
pub mod green;
pub mod linalg;
pub mod mc;
pub mod oracle;
pub mod scalar;

pub use error::{Error, Result};
pub use fcore::{f_n, f_tilde, FIndex};
pub use scalar::{ModelParams, Rational, Scalar};
