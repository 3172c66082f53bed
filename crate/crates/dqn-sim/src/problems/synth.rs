//! Synthetic problem generators.

use super::{GlobalProblem, LocalProblem, Loss};
use crate::numerics::{dot, norm, Matrix};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Target spectrum for the stacked least-squares Gram matrix A^T A.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumSpec {
    pub dim: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub seed: u64,
}

/// Least-squares data with a prescribed spectrum of A^T A.
///
/// The stacked matrix is built as `A = Q S^{1/2} V^T` with `Q` an
/// orthonormalized Gaussian `nm x d` matrix and `V` a random orthogonal
/// `d x d` basis, so the eigenvalues of `A^T A` are exactly the requested
/// ones: the two extremes plus `d - 2` uniform draws between them. Rows are
/// split evenly into per-node blocks and `b_i = A_i x_true + noise` with
/// noise scale 1e-2.
pub fn synth_least_squares(n: usize, m: usize, spec: &SpectrumSpec) -> Result<GlobalProblem> {
    let d = spec.dim;
    if n * m < d {
        return Err(Error::InvalidInput(format!(
            "need n*m >= d, got {n}*{m} < {d}"
        )));
    }
    if !(spec.lambda_min > 0.0 && spec.lambda_max >= spec.lambda_min) {
        return Err(Error::InvalidInput(
            "spectrum needs 0 < lambda_min <= lambda_max".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut eigs = vec![spec.lambda_min];
    for _ in 0..d.saturating_sub(2) {
        eigs.push(rng.gen_range(spec.lambda_min..=spec.lambda_max));
    }
    if d >= 2 {
        eigs.push(spec.lambda_max);
    }

    let q = orthonormal_columns(n * m, d, &mut rng);
    let v = orthonormal_columns(d, d, &mut rng);

    // A = Q diag(sqrt(eigs)) V^T
    let mut a = Matrix::zeros(n * m, d);
    for r in 0..n * m {
        for c in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += q[(r, k)] * eigs[k].sqrt() * v[(c, k)];
            }
            a[(r, c)] = acc;
        }
    }

    let x_true: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let noise_scale = 1e-2;

    let mut locals = Vec::with_capacity(n);
    for i in 0..n {
        let rows: Vec<Vec<f64>> = (i * m..(i + 1) * m).map(|r| a.row(r).to_vec()).collect();
        let features = Matrix::from_rows(&rows)?;
        let targets: Vec<f64> = (0..m)
            .map(|l| {
                dot(features.row(l), &x_true)
                    + noise_scale * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        locals.push(LocalProblem::new(i, features, targets, Loss::LeastSquares)?);
    }
    GlobalProblem::new(locals)
}

/// Synthetic logistic regression data, a desk-scale stand-in for the LIBSVM
/// datasets: unit-norm Gaussian features, labels from a noisy ground-truth
/// separator, even split over nodes.
pub fn synth_logistic(n: usize, m: usize, d: usize, iota: f64, seed: u64) -> Result<GlobalProblem> {
    if iota <= 0.0 {
        return Err(Error::InvalidInput("logistic needs iota > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_true: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();

    let mut locals = Vec::with_capacity(n);
    for i in 0..n {
        let mut rows = Vec::with_capacity(m);
        let mut labels = Vec::with_capacity(m);
        for _ in 0..m {
            let mut o: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let no = norm(&o);
            o.iter_mut().for_each(|v| *v /= no);
            let margin = dot(&o, &x_true) + 0.1 * rng.sample::<f64, _>(StandardNormal);
            labels.push(if margin >= 0.0 { 1.0 } else { -1.0 });
            rows.push(o);
        }
        let features = Matrix::from_rows(&rows)?;
        locals.push(LocalProblem::new(i, features, labels, Loss::Logistic { iota })?);
    }
    GlobalProblem::new(locals)
}

/// Orthonormalizes a seeded Gaussian matrix column by column (modified
/// Gram-Schmidt with one reorthogonalization pass).
fn orthonormal_columns(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut q = Matrix::zeros(rows, cols);
    for j in 0..cols {
        let mut col: Vec<f64> = (0..rows).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for _pass in 0..2 {
            for k in 0..j {
                let proj: f64 = (0..rows).map(|r| q[(r, k)] * col[r]).sum();
                for r in 0..rows {
                    col[r] -= proj * q[(r, k)];
                }
            }
        }
        let nc = norm(&col);
        for r in 0..rows {
            q[(r, j)] = col[r] / nc;
        }
    }
    q
}
