//! Simulator for decentralized stochastic quasi-Newton optimization.
//!
//! `n` simulated nodes on an undirected connected graph cooperate to minimize a
//! finite-sum objective `F(x) = (1/n) Σ f_i(x)`. Each node mixes its decision
//! variable with its neighbors through a doubly stochastic matrix, tracks the
//! network-average gradient with a dynamic-average-consensus recursion fed by
//! variance-reduced stochastic gradients, and scales its search direction with a
//! locally built Hessian-inverse approximation:
//!
//! * damped regularized limited-memory DFP ([`curvature::dfp`]), which produces
//!   an explicit `d x d` matrix with eigenvalues strictly above the
//!   regularization level, or
//! * damped limited-memory BFGS ([`curvature::bfgs`]), applied matrix-free via
//!   the classical two-loop recursion.
//!
//! Both engines keep a bounded FIFO window of `M` damped curvature pairs and
//! come with closed-form eigenvalue bounds that the runtime can audit on every
//! iteration. The [`harness`] module exposes the `dqn-sim` CLI for running
//! single experiments, parameter sweeps, and full eigenvalue-bound
//! verification, writing per-iteration CSV traces.

pub mod curvature;
pub mod framework;
pub mod harness;
pub mod network;
pub mod numerics;
pub mod problems;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {max_asym:.3e})")]
    NotSymmetric { max_asym: f64 },
    #[error("matrix is not positive definite: pivot {pivot} is {value:.3e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    InvalidInput(String),
    #[error(
        "connectivity ratio {varrho} too small for n = {n}: needs at least {min_edges} edges \
         (minimum feasible varrho is {min_varrho})"
    )]
    GraphTooSparse {
        n: usize,
        varrho: f64,
        min_edges: usize,
        min_varrho: f64,
    },
    #[error("malformed dataset line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("Newton did not reach gradient norm {tol:.3e} in {max_iters} iterations (last {last:.3e})")]
    NewtonNonConvergence {
        tol: f64,
        max_iters: usize,
        last: f64,
    },
    #[error("diverged: non-finite state at node {node}, iteration {iteration}")]
    Diverged { node: usize, iteration: usize },
    #[error("internal invariant violation: {0}")]
    Internal(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
