//! Objective oracles and data handling.
//!
//! A [`GlobalProblem`] is `F(x) = (1/n) Σ f_i(x)` where each [`LocalProblem`]
//! `f_i` is the mean of `m_i` sample costs. Two losses are supported:
//!
//! * least squares: `f_i(x) = 1/2 ||A_i x - b_i||^2`, with sample cost
//!   `f_{i,l}(x) = (m_i / 2) (a_l^T x - b_l)^2` so the mean of sample costs
//!   equals the local cost;
//! * l2-regularized logistic regression with unit-norm features and labels in
//!   {-1, +1}; the `iota/2 ||x||^2` term is carried by every sample cost so
//!   node averages match the global objective.

mod libsvm;
mod synth;

pub use libsvm::{load_libsvm, normalize_samples, partition, Dataset};
pub use synth::{synth_least_squares, synth_logistic, SpectrumSpec};

use crate::numerics::{self, axpy, dot, solve_spd, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    LeastSquares,
    Logistic { iota: f64 },
}

/// Per-node dataset with gradient and Hessian oracles.
#[derive(Debug, Clone)]
pub struct LocalProblem {
    pub node_id: usize,
    /// m_i x d feature matrix: rows of A_i, or normalized logistic features.
    features: Matrix,
    /// b_i for least squares, labels in {-1, +1} for logistic.
    targets: Vec<f64>,
    loss: Loss,
}

impl LocalProblem {
    pub fn new(node_id: usize, features: Matrix, targets: Vec<f64>, loss: Loss) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::InvalidInput(format!(
                "node {node_id} has no samples"
            )));
        }
        if features.rows() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                got: targets.len(),
            });
        }
        if let Loss::Logistic { .. } = loss {
            for (l, &t) in targets.iter().enumerate() {
                if t != 1.0 && t != -1.0 {
                    return Err(Error::InvalidInput(format!(
                        "node {node_id} sample {l}: logistic label must be +/-1, got {t}"
                    )));
                }
            }
        }
        Ok(LocalProblem {
            node_id,
            features,
            targets,
            loss,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.features.rows()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn local_cost(&self, x: &[f64]) -> f64 {
        let m = self.sample_count() as f64;
        match self.loss {
            Loss::LeastSquares => {
                let mut acc = 0.0;
                for l in 0..self.sample_count() {
                    let r = dot(self.features.row(l), x) - self.targets[l];
                    acc += 0.5 * r * r;
                }
                acc
            }
            Loss::Logistic { iota } => {
                let mut acc = 0.0;
                for l in 0..self.sample_count() {
                    let z = -dot(self.features.row(l), x) * self.targets[l];
                    acc += ln_1p_exp(z);
                }
                acc / m + 0.5 * iota * dot(x, x)
            }
        }
    }

    /// Exact local gradient; equals the mean of the sample gradients.
    pub fn full_grad(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let m = self.sample_count();
        let mut g = vec![0.0; d];
        match self.loss {
            Loss::LeastSquares => {
                // A_i^T (A_i x - b_i)
                for l in 0..m {
                    let r = dot(self.features.row(l), x) - self.targets[l];
                    axpy(r, self.features.row(l), &mut g);
                }
            }
            Loss::Logistic { iota } => {
                for l in 0..m {
                    let p = self.targets[l];
                    let z = -p * dot(self.features.row(l), x);
                    axpy(-p * sigmoid(z), self.features.row(l), &mut g);
                }
                let inv_m = 1.0 / m as f64;
                for v in &mut g {
                    *v *= inv_m;
                }
                axpy(iota, x, &mut g);
            }
        }
        g
    }

    /// Gradient of the `l`-th sample cost, 0-indexed.
    pub fn sample_grad(&self, l: usize, x: &[f64]) -> Result<Vec<f64>> {
        if l >= self.sample_count() {
            return Err(Error::InvalidInput(format!(
                "sample index {l} out of range for node {} (m = {})",
                self.node_id,
                self.sample_count()
            )));
        }
        let mut g = vec![0.0; self.dim()];
        match self.loss {
            Loss::LeastSquares => {
                // f_{i,l} = (m_i/2)(a_l^T x - b_l)^2
                let r = dot(self.features.row(l), x) - self.targets[l];
                axpy(self.sample_count() as f64 * r, self.features.row(l), &mut g);
            }
            Loss::Logistic { iota } => {
                let p = self.targets[l];
                let z = -p * dot(self.features.row(l), x);
                axpy(-p * sigmoid(z), self.features.row(l), &mut g);
                axpy(iota, x, &mut g);
            }
        }
        Ok(g)
    }

    pub fn local_hessian(&self, x: &[f64]) -> Matrix {
        let d = self.dim();
        let m = self.sample_count();
        let mut h = Matrix::zeros(d, d);
        match self.loss {
            Loss::LeastSquares => {
                h = self.features.gram();
            }
            Loss::Logistic { iota } => {
                for l in 0..m {
                    let p = self.targets[l];
                    let z = -p * dot(self.features.row(l), x);
                    let s = sigmoid(z);
                    let w = s * (1.0 - s);
                    h.add_outer(w, self.features.row(l), self.features.row(l));
                }
                h.scale(1.0 / m as f64);
                h.add_diag(iota);
            }
        }
        h
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        1.0 / (1.0 + e)
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn ln_1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// The finite-sum objective over all nodes.
#[derive(Debug, Clone)]
pub struct GlobalProblem {
    pub locals: Vec<LocalProblem>,
    pub dim: usize,
    pub x_star: Option<Vec<f64>>,
}

impl GlobalProblem {
    pub fn new(locals: Vec<LocalProblem>) -> Result<Self> {
        let dim = locals
            .first()
            .map(LocalProblem::dim)
            .ok_or_else(|| Error::InvalidInput("no local problems".into()))?;
        let loss = locals[0].loss();
        for p in &locals {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            if p.loss() != loss {
                return Err(Error::InvalidInput(
                    "all local problems must share the loss kind".into(),
                ));
            }
        }
        Ok(GlobalProblem {
            locals,
            dim,
            x_star: None,
        })
    }

    pub fn n(&self) -> usize {
        self.locals.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.locals.iter().map(|p| p.local_cost(x)).sum::<f64>() / self.n() as f64
    }

    /// Gradient of F: mean of the local gradients.
    pub fn full_grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for p in &self.locals {
            let gi = p.full_grad(x);
            axpy(1.0, &gi, &mut g);
        }
        let inv_n = 1.0 / self.n() as f64;
        for v in &mut g {
            *v *= inv_n;
        }
        g
    }

    pub fn full_hessian(&self, x: &[f64]) -> Matrix {
        let mut h = Matrix::zeros(self.dim, self.dim);
        for p in &self.locals {
            h.add_assign(&p.local_hessian(x));
        }
        h.scale(1.0 / self.n() as f64);
        h
    }

    /// Centralized Newton reference solution; stores the result in `x_star`.
    pub fn centralized_newton(&mut self, tol: f64) -> Result<Vec<f64>> {
        let max_iters = 100;
        let mut x = vec![0.0; self.dim];
        for _ in 0..max_iters {
            let g = self.full_grad(&x);
            if numerics::norm(&g) <= tol {
                self.x_star = Some(x.clone());
                return Ok(x);
            }
            let h = self.full_hessian(&x);
            let step = solve_spd(&h, &g)?;
            axpy(-1.0, &step, &mut x);
        }
        let g = self.full_grad(&x);
        let last = numerics::norm(&g);
        if last <= tol {
            self.x_star = Some(x.clone());
            return Ok(x);
        }
        Err(Error::NewtonNonConvergence {
            tol,
            max_iters,
            last,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_logistic(seed: u64, n: usize, m: usize, d: usize) -> GlobalProblem {
        synth_logistic(n, m, d, 0.001, seed).unwrap()
    }

    #[test]
    fn ls_gradient_zero_at_truth_without_noise() {
        // b = A x_true exactly: residual is zero at x_true.
        let features = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, -1.0], vec![0.5, 0.5]]).unwrap();
        let x_true = vec![2.0, -1.0];
        let targets = features.matvec(&x_true);
        let p = LocalProblem::new(0, features, targets, Loss::LeastSquares).unwrap();
        assert!(norm(&p.full_grad(&x_true)) < 1e-14);
    }

    #[test]
    fn logistic_gradient_at_origin() {
        // sigmoid(0) = 1/2, so the sample gradient at x = 0 is -p o / 2.
        let features = Matrix::from_rows(&[vec![0.6, 0.8]]).unwrap();
        let p = LocalProblem::new(0, features, vec![1.0], Loss::Logistic { iota: 0.0 }).unwrap();
        let g = p.sample_grad(0, &[0.0, 0.0]).unwrap();
        assert!((g[0] + 0.3).abs() < 1e-15);
        assert!((g[1] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn sample_index_out_of_range() {
        let features = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let p = LocalProblem::new(0, features, vec![0.5], Loss::LeastSquares).unwrap();
        assert!(p.sample_grad(1, &[0.0]).is_err());
    }

    fn central_difference(p: &LocalProblem, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|j| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                (p.local_cost(&xp) - p.local_cost(&xm)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let spec = SpectrumSpec {
            dim: 5,
            lambda_min: 0.1,
            lambda_max: 1.0,
            seed: 4,
        };
        let ls = synth_least_squares(3, 10, &spec).unwrap();
        let lg = toy_logistic(8, 3, 12, 5);
        for gp in [&ls, &lg] {
            for _ in 0..20 {
                let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
                for p in &gp.locals {
                    let g = p.full_grad(&x);
                    let fd = central_difference(p, &x);
                    for (a, b) in g.iter().zip(&fd) {
                        assert!((a - b).abs() < 1e-5, "{a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn full_grad_is_mean_of_sample_grads() {
        let lg = toy_logistic(5, 2, 9, 4);
        let spec = SpectrumSpec {
            dim: 4,
            lambda_min: 0.2,
            lambda_max: 2.0,
            seed: 1,
        };
        let ls = synth_least_squares(2, 8, &spec).unwrap();
        let x = vec![0.3, -0.4, 0.1, 0.9];
        for gp in [&lg, &ls] {
            for p in &gp.locals {
                let mut mean = vec![0.0; 4];
                for l in 0..p.sample_count() {
                    axpy(1.0, &p.sample_grad(l, &x).unwrap(), &mut mean);
                }
                for v in &mut mean {
                    *v /= p.sample_count() as f64;
                }
                let g = p.full_grad(&x);
                for (a, b) in g.iter().zip(&mean) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mean_decomposition_of_global_gradient() {
        let gp = toy_logistic(2, 4, 6, 3);
        let x = vec![0.2, 0.5, -0.1];
        let g = gp.full_grad(&x);
        let mut mean = vec![0.0; 3];
        for p in &gp.locals {
            axpy(1.0, &p.full_grad(&x), &mut mean);
        }
        for v in &mut mean {
            *v /= gp.n() as f64;
        }
        for (a, b) in g.iter().zip(&mean) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn newton_matches_normal_equations() {
        let spec = SpectrumSpec {
            dim: 6,
            lambda_min: 0.5,
            lambda_max: 3.0,
            seed: 11,
        };
        let mut gp = synth_least_squares(4, 10, &spec).unwrap();
        let x = gp.centralized_newton(1e-12).unwrap();

        // Oracle: solve the stacked normal equations directly.
        let mut ata = Matrix::zeros(6, 6);
        let mut atb = vec![0.0; 6];
        for p in &gp.locals {
            ata.add_assign(&p.features.gram());
            for l in 0..p.sample_count() {
                axpy(p.targets[l], p.features.row(l), &mut atb);
            }
        }
        let want = solve_spd(&ata, &atb).unwrap();
        for (a, b) in x.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn newton_one_step_on_quadratic() {
        let spec = SpectrumSpec {
            dim: 4,
            lambda_min: 0.3,
            lambda_max: 1.5,
            seed: 2,
        };
        let mut gp = synth_least_squares(2, 10, &spec).unwrap();
        // One Newton step from zero already solves the quadratic.
        let g0 = gp.full_grad(&[0.0; 4]);
        let h0 = gp.full_hessian(&[0.0; 4]);
        let step = solve_spd(&h0, &g0).unwrap();
        let one_step: Vec<f64> = step.iter().map(|v| -v).collect();
        assert!(norm(&gp.full_grad(&one_step)) <= 1e-10);
        let x = gp.centralized_newton(1e-12).unwrap();
        for (a, b) in x.iter().zip(&one_step) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn newton_on_logistic_toy_set() {
        let mut gp = toy_logistic(3, 2, 25, 4);
        let x = gp.centralized_newton(1e-12).unwrap();
        assert!(norm(&gp.full_grad(&x)) <= 1e-12);
        assert_eq!(gp.x_star.as_deref(), Some(x.as_slice()));
    }
}
