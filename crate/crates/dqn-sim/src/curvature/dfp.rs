//! Damped regularized limited-memory DFP.
//!
//! Each outer iteration rebuilds an explicit `d x d` Hessian-inverse
//! approximation from a clamped scalar initialization and the stored damped
//! pairs, applying the rank-two DFP update plus a `rho I` regularization per
//! pair. The rebuild-from-scratch structure is what keeps the eigenvalues
//! inside the closed-form `[M1, M2]` band returned by [`bounds`].

use super::{step_too_small, CurvatureMemory, CurvaturePair};
use crate::numerics::{dot, norm, sub, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfpParams {
    /// Per-update regularization added as `rho I`.
    pub rho: f64,
    pub epsilon: f64,
    /// Scalar initialization clamp floor.
    pub beta: f64,
    /// Scalar initialization clamp ceiling.
    pub bcal: f64,
    /// Cap factor for the damping coefficient.
    pub ltilde: f64,
    /// Memory window size.
    pub memory: usize,
}

impl DfpParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rho >= 0.0
            && self.epsilon >= 0.0
            && self.beta > 0.0
            && self.bcal >= self.beta
            && self.ltilde > 0.0
            && self.memory >= 1
            && [self.rho, self.epsilon, self.beta, self.bcal, self.ltilde]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid DFP parameters: {self:?}")))
        }
    }
}

/// Scalar initialization: clamp of `s^T s / s^T y + rho` into `[beta, bcal]`.
/// Nonpositive or numerically zero `s^T y` hits the clamp floor.
pub fn initial_scalar(s: &[f64], y: &[f64], params: &DfpParams) -> f64 {
    let sy = dot(s, y);
    if sy <= 1e-300 {
        return params.beta;
    }
    (dot(s, s) / sy + params.rho).max(params.beta).min(params.bcal)
}

/// Damping coefficient for a candidate pair, with the scalar inverse
/// `1 / (h0 + epsilon)` standing in for `(H^{(0)} + eps I)^{-1}`.
pub fn damping_theta(s_hat: &[f64], y: &[f64], h0: f64, params: &DfpParams) -> f64 {
    let inv = 1.0 / (h0 + params.epsilon);
    let quad = inv * dot(s_hat, s_hat);
    let sy = dot(s_hat, y);
    let theta_tilde = if sy <= 0.25 * quad {
        0.75 * quad / (quad - sy)
    } else {
        1.0
    };
    let ny = norm(y);
    if ny <= 1e-300 {
        theta_tilde
    } else {
        theta_tilde.min(params.ltilde * norm(s_hat) / ny)
    }
}

/// Builds a damped pair from consecutive iterates, or rejects it.
///
/// Rejection happens when the step is zero relative to the iterate scale or
/// the regularized variation `s - rho y` vanishes.
pub fn make_pair(
    x_new: &[f64],
    x_old: &[f64],
    g_new: &[f64],
    g_old: &[f64],
    params: &DfpParams,
) -> Option<CurvaturePair> {
    let s = sub(x_new, x_old);
    if step_too_small(&s, x_old) {
        return None;
    }
    let y = sub(g_new, g_old);
    let mut s_hat = s.clone();
    for (sh, yi) in s_hat.iter_mut().zip(&y) {
        *sh -= params.rho * yi;
    }
    if norm(&s_hat) <= 1e-300 {
        return None;
    }
    let h0 = initial_scalar(&s, &y, params);
    let theta = damping_theta(&s_hat, &y, h0, params);
    let inv = 1.0 / (h0 + params.epsilon);
    let y_hat: Vec<f64> = y
        .iter()
        .zip(&s_hat)
        .map(|(yi, shi)| theta * yi + (1.0 - theta) * inv * shi)
        .collect();
    Some(CurvaturePair {
        s,
        y,
        s_hat: Some(s_hat),
        y_hat,
        theta,
        h0,
    })
}

/// Rebuilds the explicit Hessian-inverse approximation from the memory.
///
/// Starts from `h0 I` computed on the newest pair's raw `(s, y)`, then
/// replays the stored pairs oldest to newest with the rank-two DFP update
/// plus `rho I`.
pub fn build(memory: &CurvatureMemory, params: &DfpParams) -> Result<Matrix> {
    let newest = memory
        .newest()
        .ok_or_else(|| Error::Internal("DFP build on empty memory".into()))?;
    let d = newest.s.len();
    let h0 = initial_scalar(&newest.s, &newest.y, params);
    let mut h = Matrix::scaled_identity(d, h0);

    for pair in memory.iter() {
        let s_hat = pair.variation();
        let y_hat = &pair.y_hat;
        let sy = dot(s_hat, y_hat);
        if sy <= 0.0 {
            return Err(Error::Internal(format!(
                "DFP denominator s_hat^T y_hat = {sy:.3e} <= 0 for an admitted pair"
            )));
        }
        let hy = h.matvec(y_hat);
        let yhy = dot(y_hat, &hy);
        if yhy <= 0.0 {
            return Err(Error::Internal(format!(
                "DFP denominator y_hat^T H y_hat = {yhy:.3e} <= 0"
            )));
        }
        h.add_outer(1.0 / sy, s_hat, s_hat);
        h.add_outer(-1.0 / yhy, &hy, &hy);
        h.add_diag(params.rho);
        // The rank-two update is symmetric in exact arithmetic; re-symmetrize
        // to keep roundoff from accumulating over the window.
        symmetrize(&mut h);
    }
    Ok(h)
}

fn symmetrize(h: &mut Matrix) {
    let d = h.rows();
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = avg;
            h[(j, i)] = avg;
        }
    }
}

/// Closed-form eigenvalue bounds `(M1, M2)` for any matrix built from
/// admitted pairs with these parameters.
pub fn bounds(params: &DfpParams) -> (f64, f64) {
    let DfpParams {
        rho,
        epsilon,
        beta,
        bcal,
        ltilde,
        memory,
    } = *params;
    let m = memory as f64;
    let omega = 4.0 * (bcal + epsilon) * (ltilde + 1.0 / (beta + epsilon));
    let m1 = rho
        + (1.0 + omega).powi(-2 * memory as i32)
            / (1.0 / beta + 1.0 / (4.0 * (bcal + epsilon)));
    let m2 = bcal + m * (4.0 * bcal + 4.0 * epsilon + rho);
    (m1, m2)
}

/// `H g`.
pub fn apply(h: &Matrix, g: &[f64]) -> Vec<f64> {
    h.matvec(g)
}
