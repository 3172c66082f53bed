//! Decentralized outer loop: consensus mixing, variance-reduced local
//! gradients, gradient tracking, and pluggable direction oracles.
//!
//! Semantics are synchronous rounds: within one iteration every node reads
//! only previous-iteration snapshots of its neighbors, so node updates are
//! order-independent and run in parallel between barriers. Determinism is
//! defined by seeds, not scheduling: each node owns a node-id-salted RNG
//! stream and a single-threaded execution produces bit-identical results.

use crate::curvature::{bfgs, dfp, CurvatureMemory, CurvaturePair};
use crate::network::MixingMatrix;
use crate::numerics::{self, axpy, dot, norm, sub};
use crate::problems::GlobalProblem;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// First-order baseline: d = g. Same framework, no curvature.
    Identity,
    Dfp(dfp::DfpParams),
    Bfgs(bfgs::BfgsParams),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Identity => "identity",
            Method::Dfp(_) => "dfp",
            Method::Bfgs(_) => "bfgs",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Step size alpha.
    pub alpha: f64,
    /// Checkpoint refresh period T.
    pub period: usize,
    /// Per-node batch size b_i.
    pub batch: usize,
    pub method: Method,
    pub iterations: usize,
    pub seed: u64,
    /// Eigenvalue audit cadence; 0 disables audits.
    pub audit_every: usize,
    /// Replace the variance-reduced gradient with the exact local gradient.
    /// Consumes the same RNG draws so trajectories stay comparable.
    pub exact_gradient: bool,
    /// Negative-control hook: report a corrupted eigenvalue at node 0 on
    /// audit iterations so the audit machinery can be exercised end to end.
    pub corrupt_audit: bool,
}

impl RunConfig {
    pub fn validate(&self, gp: &GlobalProblem) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("step size must be positive, got {}", self.alpha)));
        }
        if self.period == 0 {
            return Err(Error::Config("checkpoint period must be >= 1".into()));
        }
        if self.batch == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        for p in &gp.locals {
            if self.batch > p.sample_count() {
                return Err(Error::Config(format!(
                    "batch size {} exceeds node {}'s sample count {}",
                    self.batch,
                    p.node_id,
                    p.sample_count()
                )));
            }
        }
        match &self.method {
            Method::Identity => Ok(()),
            Method::Dfp(p) => p.validate(),
            Method::Bfgs(p) => p.validate(),
        }
    }

    fn memory_capacity(&self) -> usize {
        match &self.method {
            Method::Identity => 1,
            Method::Dfp(p) => p.memory,
            Method::Bfgs(p) => p.memory,
        }
    }
}

/// Per-node state across iterations.
pub struct NodeState {
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    pub v: Vec<f64>,
    pub tau: Vec<f64>,
    pub grad_at_tau: Vec<f64>,
    pub memory: CurvatureMemory,
    rng: ChaCha8Rng,
    grad_evals: u64,
    pair_stats: PairStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairStats {
    pub admitted: u64,
    pub rejected: u64,
    /// Admitted pairs whose theta fell outside (0, 1].
    pub theta_violations: u64,
    /// Admitted pairs violating the damped curvature floor.
    pub curvature_violations: u64,
}

impl PairStats {
    fn merge(&mut self, other: &PairStats) {
        self.admitted += other.admitted;
        self.rejected += other.rejected;
        self.theta_violations += other.theta_violations;
        self.curvature_violations += other.curvature_violations;
    }
}

/// Initializes every node at `x0` with exact local gradients.
pub fn init_states(gp: &GlobalProblem, x0: &[f64], cfg: &RunConfig) -> Result<Vec<NodeState>> {
    if x0.len() != gp.dim {
        return Err(Error::DimensionMismatch {
            expected: gp.dim,
            got: x0.len(),
        });
    }
    Ok(gp
        .locals
        .iter()
        .map(|p| {
            let g = p.full_grad(x0);
            NodeState {
                x: x0.to_vec(),
                g: g.clone(),
                v: g.clone(),
                tau: x0.to_vec(),
                grad_at_tau: g,
                memory: CurvatureMemory::new(cfg.memory_capacity()),
                rng: ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(
                    0x9E37_79B9_7F4A_7C15u64.wrapping_mul(p.node_id as u64 + 1),
                )),
                grad_evals: p.sample_count() as u64,
                pair_stats: PairStats::default(),
            }
        })
        .collect())
}

/// One synchronous round for iteration `k` (producing the `k+1` states).
pub fn step(
    states: &mut [NodeState],
    mixing: &MixingMatrix,
    gp: &GlobalProblem,
    cfg: &RunConfig,
    k: usize,
) -> Result<()> {
    let x_snap: Vec<Vec<f64>> = states.iter().map(|s| s.x.clone()).collect();
    let g_snap: Vec<Vec<f64>> = states.iter().map(|s| s.g.clone()).collect();
    let refresh = (k + 1).is_multiple_of(cfg.period);

    states
        .par_iter_mut()
        .enumerate()
        .map(|(i, st)| -> Result<()> {
            let p = &gp.locals[i];
            let d_dim = gp.dim;

            // (a) direction from the memory as of the end of step k-1
            let direction = compute_direction(st, &cfg.method)?;

            // (b) mix and descend
            let mut x_new = vec![0.0; d_dim];
            for (j, xj) in x_snap.iter().enumerate() {
                let w = mixing.w[(i, j)];
                if w != 0.0 {
                    axpy(w, xj, &mut x_new);
                }
            }
            axpy(-cfg.alpha, &direction, &mut x_new);

            // (c) checkpoint refresh
            if refresh {
                st.tau = x_new.clone();
                st.grad_at_tau = p.full_grad(&st.tau);
                st.grad_evals += p.sample_count() as u64;
            }

            // (d) variance-reduced stochastic gradient on a fresh batch
            let m = p.sample_count();
            let batch = rand::seq::index::sample(&mut st.rng, m, cfg.batch);
            let v_new = if cfg.exact_gradient {
                p.full_grad(&x_new)
            } else {
                let mut acc = vec![0.0; d_dim];
                for l in batch.iter() {
                    let gx = p.sample_grad(l, &x_new)?;
                    let gt = p.sample_grad(l, &st.tau)?;
                    for ((a, b), c) in acc.iter_mut().zip(gx).zip(gt) {
                        *a += b - c;
                    }
                }
                let inv_b = 1.0 / cfg.batch as f64;
                for (a, t) in acc.iter_mut().zip(&st.grad_at_tau) {
                    *a = *a * inv_b + t;
                }
                acc
            };
            st.grad_evals += 2 * cfg.batch as u64;

            // (e) gradient tracking
            let mut g_new = vec![0.0; d_dim];
            for (j, gj) in g_snap.iter().enumerate() {
                let w = mixing.w[(i, j)];
                if w != 0.0 {
                    axpy(w, gj, &mut g_new);
                }
            }
            axpy(1.0, &v_new, &mut g_new);
            axpy(-1.0, &st.v, &mut g_new);

            if !(is_finite(&x_new) && is_finite(&g_new) && is_finite(&v_new)) {
                return Err(Error::Diverged {
                    node: i,
                    iteration: k + 1,
                });
            }

            // (f) curvature pair from the step just taken
            admit_pair(st, &x_new, &g_new, &cfg.method);

            st.x = x_new;
            st.g = g_new;
            st.v = v_new;
            Ok(())
        })
        .collect::<Result<Vec<()>>>()?;
    Ok(())
}

fn is_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn compute_direction(st: &NodeState, method: &Method) -> Result<Vec<f64>> {
    match method {
        Method::Identity => Ok(st.g.clone()),
        Method::Dfp(p) => {
            if st.memory.is_empty() {
                Ok(st.g.clone())
            } else {
                let h = dfp::build(&st.memory, p)?;
                Ok(dfp::apply(&h, &st.g))
            }
        }
        Method::Bfgs(p) => {
            if st.memory.is_empty() {
                Ok(st.g.clone())
            } else {
                let newest = st.memory.newest().unwrap();
                let h0 = bfgs::initial_scalar(&newest.s, &newest.y, p);
                bfgs::two_loop(&st.memory, h0, &st.g)
            }
        }
    }
}

fn admit_pair(st: &mut NodeState, x_new: &[f64], g_new: &[f64], method: &Method) {
    let (pair, epsilon) = match method {
        Method::Identity => return,
        Method::Dfp(p) => (dfp::make_pair(x_new, &st.x, g_new, &st.g, p), p.epsilon),
        Method::Bfgs(p) => (bfgs::make_pair(x_new, &st.x, g_new, &st.g, p), p.epsilon),
    };
    match pair {
        None => st.pair_stats.rejected += 1,
        Some(pair) => {
            st.pair_stats.admitted += 1;
            if !(pair.theta > 0.0 && pair.theta <= 1.0) {
                st.pair_stats.theta_violations += 1;
            }
            if !curvature_floor_holds(&pair, epsilon) {
                st.pair_stats.curvature_violations += 1;
            }
            st.memory.push(pair);
        }
    }
}

/// The curvature floor inequality for an admitted pair, checked with one-ulp-scale
/// slack for the damped boundary case where equality holds in exact
/// arithmetic.
pub fn curvature_floor_holds(pair: &CurvaturePair, epsilon: f64) -> bool {
    let var = pair.variation();
    let lhs = dot(var, &pair.y_hat);
    let rhs = 0.25 * dot(var, var) / (pair.h0 + epsilon);
    lhs >= rhs - 1e-12 * rhs.abs()
}

/// Per-iteration audit result aggregated over nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRow {
    pub min_eig: f64,
    pub max_eig: f64,
    pub bound_m1: f64,
    pub bound_m2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditViolation {
    pub node: usize,
    pub iteration: usize,
    pub eigenvalue: f64,
    pub bound: f64,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub epochs: f64,
    pub relative_error: f64,
    pub audit: Option<AuditRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunOutcome {
    Completed,
    Diverged { node: usize, iteration: usize },
}

/// Full run artifact: per-iteration records plus audit and pair diagnostics.
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub sigma: f64,
    pub outcome: RunOutcome,
    pub violations: Vec<AuditViolation>,
    pub pair_stats: PairStats,
    /// Largest relative deviation of mean(g) from mean(v) seen on any
    /// iteration.
    pub tracking_max_rel: f64,
    pub final_x: Vec<Vec<f64>>,
}

impl Trace {
    pub fn final_relative_error(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.relative_error)
    }

    pub fn final_epochs(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.epochs)
    }

    /// First epoch count at which the relative error drops to `target`.
    pub fn epochs_to_reach(&self, target: f64) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.relative_error <= target)
            .map(|r| r.epochs)
    }
}

/// Runs the configured method from `x0 = 0` and records the trace.
///
/// Requires `gp.x_star` (see [`GlobalProblem::centralized_newton`]).
pub fn run(gp: &GlobalProblem, mixing: &MixingMatrix, cfg: &RunConfig) -> Result<Trace> {
    cfg.validate(gp)?;
    let x_star = gp
        .x_star
        .as_ref()
        .ok_or_else(|| Error::Config("run requires a precomputed x_star".into()))?
        .clone();
    if mixing.n() != gp.n() {
        return Err(Error::DimensionMismatch {
            expected: gp.n(),
            got: mixing.n(),
        });
    }

    let x0 = vec![0.0; gp.dim];
    let mut states = init_states(gp, &x0, cfg)?;
    let n = gp.n() as f64;
    let denom = n * dot(&sub(&x0, &x_star), &sub(&x0, &x_star));

    let mut trace = Trace {
        records: Vec::with_capacity(cfg.iterations + 1),
        sigma: mixing.sigma,
        outcome: RunOutcome::Completed,
        violations: Vec::new(),
        pair_stats: PairStats::default(),
        tracking_max_rel: 0.0,
        final_x: Vec::new(),
    };
    trace.records.push(TraceRecord {
        iteration: 0,
        epochs: epochs(&states, gp),
        relative_error: relative_error(&states, &x_star, denom),
        audit: None,
    });

    let mut tracking_scale = 0.0f64;
    for k in 0..cfg.iterations {
        if let Err(e) = step(&mut states, mixing, gp, cfg, k) {
            match e {
                Error::Diverged { node, iteration } => {
                    trace.outcome = RunOutcome::Diverged { node, iteration };
                    break;
                }
                other => return Err(other),
            }
        }

        // Tracking identity: mean(g) must equal mean(v) up to rounding.
        // Rounding drift in the mixing products accumulates in mean(g) and
        // scales with the largest iterate magnitude seen so far, so the
        // deviation is measured against that running scale.
        let mut mean_g = vec![0.0; gp.dim];
        let mut mean_v = vec![0.0; gp.dim];
        let mut scale = 0.0f64;
        for st in &states {
            axpy(1.0, &st.g, &mut mean_g);
            axpy(1.0, &st.v, &mut mean_v);
            scale += norm(&st.g).max(norm(&st.v));
        }
        for (a, b) in mean_g.iter_mut().zip(&mut mean_v) {
            *a /= n;
            *b /= n;
        }
        tracking_scale = tracking_scale.max(scale / n);
        let dev = norm(&sub(&mean_g, &mean_v)) / tracking_scale.max(f64::MIN_POSITIVE);
        trace.tracking_max_rel = trace.tracking_max_rel.max(dev);

        let audit = if cfg.audit_every > 0 && (k + 1) % cfg.audit_every == 0 {
            audit_states(&states, cfg, k + 1, &mut trace.violations)?
        } else {
            None
        };

        trace.records.push(TraceRecord {
            iteration: k + 1,
            epochs: epochs(&states, gp),
            relative_error: relative_error(&states, &x_star, denom),
            audit,
        });
    }

    for st in &states {
        trace.pair_stats.merge(&st.pair_stats);
        trace.final_x.push(st.x.clone());
    }
    Ok(trace)
}

fn epochs(states: &[NodeState], gp: &GlobalProblem) -> f64 {
    states
        .iter()
        .zip(&gp.locals)
        .map(|(st, p)| st.grad_evals as f64 / p.sample_count() as f64)
        .sum::<f64>()
        / states.len() as f64
}

fn relative_error(states: &[NodeState], x_star: &[f64], denom: f64) -> f64 {
    let num: f64 = states
        .iter()
        .map(|st| {
            let d = sub(&st.x, x_star);
            dot(&d, &d)
        })
        .sum();
    num / denom
}

/// Builds the explicit approximation for every node and checks positivity
/// plus the closed-form bounds.
fn audit_states(
    states: &[NodeState],
    cfg: &RunConfig,
    iteration: usize,
    violations: &mut Vec<AuditViolation>,
) -> Result<Option<AuditRow>> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (bound_m1, bound_m2, strict_floor) = match &cfg.method {
        Method::Identity => (1.0, 1.0, 0.0),
        Method::Dfp(p) => {
            let (m1, m2) = dfp::bounds(p);
            (m1, m2, p.rho)
        }
        Method::Bfgs(p) => {
            let (m1, m2) = bfgs::bounds(p);
            (m1, m2, 0.0)
        }
    };

    let mut audited_any = false;
    for (i, st) in states.iter().enumerate() {
        let eigs = match &cfg.method {
            Method::Identity => {
                audited_any = true;
                (1.0, 1.0)
            }
            Method::Dfp(p) => {
                if st.memory.is_empty() {
                    continue;
                }
                audited_any = true;
                let h = dfp::build(&st.memory, p)?;
                let e = numerics::sym_eigs(&h)?;
                (e.min(), e.max())
            }
            Method::Bfgs(p) => {
                if st.memory.is_empty() {
                    continue;
                }
                audited_any = true;
                let newest = st.memory.newest().unwrap();
                let h0 = bfgs::initial_scalar(&newest.s, &newest.y, p);
                let h = bfgs::explicit(&st.memory, h0, st.x.len())?;
                let e = numerics::sym_eigs(&h)?;
                (e.min(), e.max())
            }
        };
        let (min_e, mut max_e) = eigs;
        if cfg.corrupt_audit && i == 0 {
            // Test hook: pretend node 0's approximation blew past the bound.
            max_e = bound_m2 * 10.0 + 1.0;
        }
        if min_e <= strict_floor && !matches!(cfg.method, Method::Identity) {
            violations.push(AuditViolation {
                node: i,
                iteration,
                eigenvalue: min_e,
                bound: strict_floor,
                kind: "lambda_min above regularization floor".into(),
            });
        }
        let slack = 1e-9;
        if min_e < bound_m1 * (1.0 - slack) - slack {
            violations.push(AuditViolation {
                node: i,
                iteration,
                eigenvalue: min_e,
                bound: bound_m1,
                kind: "lambda_min below M1".into(),
            });
        }
        if max_e > bound_m2 * (1.0 + slack) {
            violations.push(AuditViolation {
                node: i,
                iteration,
                eigenvalue: max_e,
                bound: bound_m2,
                kind: "lambda_max above M2".into(),
            });
        }
        lo = lo.min(min_e);
        hi = hi.max(max_e);
    }
    Ok(audited_any.then_some(AuditRow {
        min_eig: lo,
        max_eig: hi,
        bound_m1,
        bound_m2,
    }))
}
