//! Numerical laboratory for the central limit theorems satisfied by the
//! L² modulus of continuity of Brownian local time.
//!
//! The crate has four layers:
//!
//! * [`path_sim`] — Brownian-motion and simple-random-walk simulation with
//!   exact occupation bookkeeping, producing gridded local-time fields.
//! * [`functionals`] — the path functionals built from those fields:
//!   self-intersection local time, intersection local time, the L² modulus,
//!   the polymer Hamiltonian, and the normalized CLT statistics.
//! * [`kac`] — exact and quadrature-based moment predictions: potential
//!   densities, difference-operator integrals, Kac moments at exponential
//!   times, and the predicted limit-law moments.
//! * [`verify`] — distributional and moment comparisons between simulated
//!   statistics and the predicted limit laws.

pub mod functionals;
pub mod kac;
pub mod path_sim;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod verify;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("probe width {h} is not a positive integer multiple of the bin width {bin_width}")]
    ProbeAlignment { h: f64, bin_width: f64 },
    #[error("quadrature failed to converge: estimate {value} with error {error} exceeds tolerance {tol}")]
    QuadratureNonConvergence { value: f64, error: f64, tol: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed field dump: {0}")]
    BadDump(String),
}

pub type Result<T> = std::result::Result<T, Error>;
