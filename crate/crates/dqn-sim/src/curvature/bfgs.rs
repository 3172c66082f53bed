//! Damped limited-memory BFGS.
//!
//! The production path never forms the approximation explicitly: [`two_loop`]
//! computes `H g` in O(Md) time from the stored damped pairs. The explicit
//! recursion [`explicit`] exists for the eigenvalue audit and as the test
//! oracle for the two-loop path. There is no `rho I` regularization here;
//! positive definiteness comes from the damping alone.

use super::{step_too_small, CurvatureMemory, CurvaturePair};
use crate::numerics::{axpy, dot, norm, scaled, sub, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsParams {
    pub epsilon: f64,
    pub beta: f64,
    pub bcal: f64,
    pub ltilde: f64,
    pub memory: usize,
}

impl BfgsParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.epsilon >= 0.0
            && self.beta > 0.0
            && self.bcal >= self.beta
            && self.ltilde > 0.0
            && self.memory >= 1
            && [self.epsilon, self.beta, self.bcal, self.ltilde]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid BFGS parameters: {self:?}")))
        }
    }
}

/// Scalar initialization: clamp of `s^T y / y^T y` into `[beta, bcal]`.
/// Degenerate `y` or nonpositive curvature hits the clamp floor.
pub fn initial_scalar(s: &[f64], y: &[f64], params: &BfgsParams) -> f64 {
    let yy = dot(y, y);
    if yy <= 1e-300 {
        return params.beta;
    }
    let sy = dot(s, y);
    if sy <= 0.0 {
        return params.beta;
    }
    (sy / yy).max(params.beta).min(params.bcal)
}

/// Builds a damped pair from consecutive iterates, or rejects a zero step.
pub fn make_pair(
    x_new: &[f64],
    x_old: &[f64],
    g_new: &[f64],
    g_old: &[f64],
    params: &BfgsParams,
) -> Option<CurvaturePair> {
    let s = sub(x_new, x_old);
    if step_too_small(&s, x_old) {
        return None;
    }
    let y = sub(g_new, g_old);
    let h0 = initial_scalar(&s, &y, params);
    let inv = 1.0 / (h0 + params.epsilon);
    let quad = inv * dot(&s, &s);
    let sy = dot(&s, &y);
    let theta_tilde = if sy <= 0.25 * quad {
        0.75 * quad / (quad - sy)
    } else {
        1.0
    };
    let ny = norm(&y);
    let theta = if ny <= 1e-300 {
        theta_tilde
    } else {
        theta_tilde.min(params.ltilde * norm(&s) / ny)
    };
    let y_hat: Vec<f64> = y
        .iter()
        .zip(&s)
        .map(|(yi, si)| theta * yi + (1.0 - theta) * inv * si)
        .collect();
    Some(CurvaturePair {
        s,
        y,
        s_hat: None,
        y_hat,
        theta,
        h0,
    })
}

/// Matrix-free `H g` by the standard two-loop recursion over the window.
///
/// `h0` is the scalar initialization for this iteration (from the newest
/// pair's raw differences); an empty memory returns `h0 g`.
pub fn two_loop(memory: &CurvatureMemory, h0: f64, g: &[f64]) -> Result<Vec<f64>> {
    let mut q = g.to_vec();
    let mut alphas = vec![0.0; memory.len()];
    let pairs: Vec<&CurvaturePair> = memory.iter().collect();

    for (idx, pair) in pairs.iter().enumerate().rev() {
        let sy = dot(&pair.s, &pair.y_hat);
        if sy <= 0.0 {
            return Err(Error::Internal(format!(
                "BFGS denominator s^T y_hat = {sy:.3e} <= 0 for a stored pair"
            )));
        }
        let alpha = dot(&pair.s, &q) / sy;
        alphas[idx] = alpha;
        axpy(-alpha, &pair.y_hat, &mut q);
    }

    let mut r = scaled(&q, h0);

    for (idx, pair) in pairs.iter().enumerate() {
        let sy = dot(&pair.s, &pair.y_hat);
        let beta = dot(&pair.y_hat, &r) / sy;
        axpy(alphas[idx] - beta, &pair.s, &mut r);
    }
    Ok(r)
}

/// Explicit recursion `(I - s y_hat^T / s^T y_hat) H (...) + s s^T / s^T y_hat`
/// over the window. Audit and test path only; the direction computation uses
/// [`two_loop`].
pub fn explicit(memory: &CurvatureMemory, h0: f64, dim: usize) -> Result<Matrix> {
    let mut h = Matrix::scaled_identity(dim, h0);
    for pair in memory.iter() {
        let sy = dot(&pair.s, &pair.y_hat);
        if sy <= 0.0 {
            return Err(Error::Internal(format!(
                "BFGS denominator s^T y_hat = {sy:.3e} <= 0 for a stored pair"
            )));
        }
        // V = I - y_hat s^T / sy;  H <- V^T H V + s s^T / sy
        let hy = h.matvec(&pair.y_hat);
        // (I - s y_hat^T / sy) H = H - s (H y_hat)^T / sy
        let mut vt_h = h.clone();
        vt_h.add_outer(-1.0 / sy, &pair.s, &hy);
        // ... (I - y_hat s^T / sy) = M - (M y_hat) s^T / sy
        let my = vt_h.matvec(&pair.y_hat);
        let mut next = vt_h;
        next.add_outer(-1.0 / sy, &my, &pair.s);
        next.add_outer(1.0 / sy, &pair.s, &pair.s);
        // Symmetric in exact arithmetic.
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (next[(i, j)] + next[(j, i)]);
                next[(i, j)] = avg;
                next[(j, i)] = avg;
            }
        }
        h = next;
    }
    Ok(h)
}

/// Closed-form eigenvalue bounds `(M1, M2)`.
///
/// For large `M` and the clamp ceiling of 1e4 the upper bound overflows to
/// infinity; that is the honest value of the formula, the bound is vacuous
/// there.
pub fn bounds(params: &BfgsParams) -> (f64, f64) {
    let BfgsParams {
        epsilon,
        beta,
        bcal,
        ltilde,
        memory,
    } = *params;
    let m = memory as f64;
    let omega = 4.0 * (bcal + epsilon) * (ltilde + 1.0 / (beta + epsilon));
    let m1 = 1.0 / (1.0 / beta + m * omega * omega / (4.0 * (bcal + epsilon)));
    let m2 = (1.0 + omega).powf(2.0 * m) * (bcal + 1.0 / (ltilde * (omega + 2.0)));
    (m1, m2)
}
