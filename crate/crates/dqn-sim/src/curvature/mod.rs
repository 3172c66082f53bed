//! Local Hessian-inverse approximation engines.
//!
//! Both engines consume curvature pairs `(s, y) = (x^{k+1} - x^k,
//! g^{k+1} - g^k)` built from the node's own iterates and gradient
//! approximations, damp `y` so the curvature inner product stays bounded
//! below, and keep a FIFO window of at most `M` admitted pairs. Damping is
//! applied once, at pair-creation time, against that iteration's scalar
//! initialization; stored pairs are never re-damped.

pub mod bfgs;
pub mod dfp;

use std::collections::VecDeque;

/// One admitted curvature record.
///
/// `s_hat` is the regularized variable variation used by DFP (`s - rho y`);
/// BFGS pairs leave it `None` and damp against `s` directly.
#[derive(Debug, Clone)]
pub struct CurvaturePair {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub s_hat: Option<Vec<f64>>,
    pub y_hat: Vec<f64>,
    pub theta: f64,
    /// Scalar initialization h0 at the creating iteration.
    pub h0: f64,
}

impl CurvaturePair {
    /// The variation vector the engine pairs with `y_hat`: `s_hat` for DFP,
    /// `s` for BFGS.
    pub fn variation(&self) -> &[f64] {
        self.s_hat.as_deref().unwrap_or(&self.s)
    }
}

/// Bounded FIFO window of admitted pairs, oldest first.
#[derive(Debug, Clone)]
pub struct CurvatureMemory {
    window: VecDeque<CurvaturePair>,
    capacity: usize,
}

impl CurvatureMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "memory size must be at least 1");
        CurvatureMemory {
            window: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Admits a pair, evicting the oldest when full.
    pub fn push(&mut self, pair: CurvaturePair) {
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(pair);
    }

    /// Oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &CurvaturePair> {
        self.window.iter()
    }

    pub fn newest(&self) -> Option<&CurvaturePair> {
        self.window.back()
    }
}

/// Pair rejection rule shared by both engines: drop steps that are zero
/// relative to the iterate scale.
pub(crate) fn step_too_small(s: &[f64], x_old: &[f64]) -> bool {
    crate::numerics::norm(s) <= 1e-12 * crate::numerics::norm(x_old).max(1.0)
}
