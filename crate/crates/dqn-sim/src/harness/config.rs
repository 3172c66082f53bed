//! Declarative experiment description and its resolution into runnable
//! pieces.
//!
//! A config names a problem, a network, a run schedule, and one parameter
//! block per curvature method. Resolution order elsewhere in the harness is
//! preset, then TOML file, then command-line overrides; this module only
//! knows how to turn a finished [`ExperimentConfig`] into a
//! [`GlobalProblem`], a mixing matrix, and a [`RunConfig`].

use crate::curvature::{bfgs::BfgsParams, dfp::DfpParams};
use crate::framework::{Method, RunConfig};
use crate::network::{
    cycle_graph, metropolis_weights, random_connected_graph, star_graph, MixingMatrix, Topology,
};
use crate::problems::{
    load_libsvm, normalize_samples, partition, synth_least_squares, synth_logistic, GlobalProblem,
    SpectrumSpec,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub network: NetworkConfig,
    pub run: RunSectionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dfp: Option<MethodConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bfgs: Option<MethodConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Synthetic least squares with a prescribed spectrum.
    LeastSquares,
    /// Synthetic regularized logistic regression.
    Logistic,
    /// Regularized logistic regression on a LIBSVM-format file.
    Libsvm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_node: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    /// L2 regularization weight for logistic losses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iota: Option<f64>,
    /// Dataset file for `kind = "libsvm"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Scale each sample to unit norm (libsvm only; defaults to true).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    /// Seed for data synthesis and the shuffle-split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct NetworkConfig {
    pub nodes: usize,
    /// "random", "cycle", or "star".
    pub topology: String,
    /// Connectivity ratio for random graphs: the realized edge count is
    /// the nearest integer to this fraction of all possible edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connectivity: Option<f64>,
    /// Load the graph from an edge-list file instead of generating one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_list: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunSectionConfig {
    /// "identity", "dfp", or "bfgs".
    pub method: String,
    pub iterations: usize,
    pub seed: u64,
    /// Checkpoint refresh period; defaults to ceil(m / b) so one refresh
    /// costs about one pass over the smallest local dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    /// 0 disables eigenvalue audits.
    #[serde(default)]
    pub audit_every: usize,
    /// Step size for the identity method; curvature methods carry their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    /// Batch size as a fraction of the smallest local sample count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_ratio: Option<f64>,
}

fn default_bcal() -> f64 {
    1e4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct MethodConfig {
    pub alpha: f64,
    /// DFP regularization level; ignored by BFGS.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub epsilon: f64,
    pub beta: f64,
    #[serde(default = "default_bcal")]
    pub bcal: f64,
    pub ltilde: f64,
    pub memory: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_ratio: Option<f64>,
}

/// Everything needed to call [`crate::framework::run`].
pub struct Experiment {
    pub problem: GlobalProblem,
    pub topology: Topology,
    pub mixing: MixingMatrix,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Resolves the config into a runnable experiment. Solves for the
    /// centralized minimizer as part of problem construction.
    pub fn build(&self) -> Result<Experiment> {
        let mut problem = self.build_problem()?;
        problem.centralized_newton(1e-10)?;
        let topology = self.build_topology()?;
        if topology.n() != problem.n() {
            return Err(Error::Config(format!(
                "network has {} nodes but the problem has {}",
                topology.n(),
                problem.n()
            )));
        }
        let mixing = metropolis_weights(&topology);
        let run = self.build_run(&problem)?;
        Ok(Experiment {
            problem,
            topology,
            mixing,
            run,
        })
    }

    fn build_problem(&self) -> Result<GlobalProblem> {
        let p = &self.problem;
        let n = self.network.nodes;
        let seed = p.seed.unwrap_or(1);
        match p.kind {
            ProblemKind::LeastSquares => {
                let spec = SpectrumSpec {
                    dim: p.dim.ok_or_else(|| missing("problem.dim"))?,
                    lambda_min: p.lambda_min.ok_or_else(|| missing("problem.lambda-min"))?,
                    lambda_max: p.lambda_max.ok_or_else(|| missing("problem.lambda-max"))?,
                    seed,
                };
                let m = p
                    .samples_per_node
                    .ok_or_else(|| missing("problem.samples-per-node"))?;
                synth_least_squares(n, m, &spec)
            }
            ProblemKind::Logistic => synth_logistic(
                n,
                p.samples_per_node
                    .ok_or_else(|| missing("problem.samples-per-node"))?,
                p.dim.ok_or_else(|| missing("problem.dim"))?,
                p.iota.unwrap_or(1e-3),
                seed,
            ),
            ProblemKind::Libsvm => {
                let path = p.path.as_ref().ok_or_else(|| {
                    Error::Config(
                        "problem.path is required for libsvm problems; set it in a --config file"
                            .into(),
                    )
                })?;
                let mut ds = load_libsvm(path)?;
                if p.normalize.unwrap_or(true) {
                    normalize_samples(&mut ds);
                }
                partition(&ds, n, p.iota.unwrap_or(1e-3), seed)
            }
        }
    }

    fn build_topology(&self) -> Result<Topology> {
        let net = &self.network;
        if let Some(path) = &net.edge_list {
            let text = std::fs::read_to_string(path)?;
            let t = Topology::from_edge_list(&text)?;
            return Ok(t);
        }
        match net.topology.as_str() {
            "random" => random_connected_graph(
                net.nodes,
                net.connectivity
                    .ok_or_else(|| missing("network.connectivity"))?,
                net.seed.unwrap_or(1),
            ),
            "cycle" => cycle_graph(net.nodes),
            "star" => star_graph(net.nodes),
            other => Err(Error::Config(format!(
                "unknown topology `{other}` (expected random, cycle, or star)"
            ))),
        }
    }

    fn method_block(&self) -> Result<Option<&MethodConfig>> {
        match self.run.method.as_str() {
            "identity" => Ok(None),
            "dfp" => self
                .dfp
                .as_ref()
                .map(Some)
                .ok_or_else(|| missing("[dfp] parameter block")),
            "bfgs" => self
                .bfgs
                .as_ref()
                .map(Some)
                .ok_or_else(|| missing("[bfgs] parameter block")),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected identity, dfp, or bfgs)"
            ))),
        }
    }

    /// Batch size: explicit count wins, then a ratio of the smallest local
    /// sample count, rounded and clamped to at least one sample.
    fn resolve_batch(&self, problem: &GlobalProblem) -> Result<usize> {
        let block = self.method_block()?;
        let explicit = self
            .run
            .batch
            .or_else(|| block.and_then(|b| b.batch));
        if let Some(b) = explicit {
            return Ok(b);
        }
        let ratio = self
            .run
            .batch_ratio
            .or_else(|| block.and_then(|b| b.batch_ratio))
            .ok_or_else(|| missing("run.batch or run.batch-ratio"))?;
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::Config(format!(
                "batch-ratio must be in (0, 1], got {ratio}"
            )));
        }
        let m_min = problem
            .locals
            .iter()
            .map(|p| p.sample_count())
            .min()
            .unwrap_or(1);
        Ok(((ratio * m_min as f64).round() as usize).clamp(1, m_min))
    }

    fn build_run(&self, problem: &GlobalProblem) -> Result<RunConfig> {
        let batch = self.resolve_batch(problem)?;
        let m_min = problem
            .locals
            .iter()
            .map(|p| p.sample_count())
            .min()
            .unwrap_or(1);
        let period = self.run.period.unwrap_or(m_min.div_ceil(batch));

        let block = self.method_block()?;
        let (method, alpha) = match self.run.method.as_str() {
            "identity" => (
                Method::Identity,
                self.run
                    .alpha
                    .ok_or_else(|| missing("run.alpha for the identity method"))?,
            ),
            "dfp" => {
                let b = block.unwrap();
                let params = DfpParams {
                    rho: b.rho.ok_or_else(|| missing("dfp.rho"))?,
                    epsilon: b.epsilon,
                    beta: b.beta,
                    bcal: b.bcal,
                    ltilde: b.ltilde,
                    memory: b.memory,
                };
                (Method::Dfp(params), self.run.alpha.unwrap_or(b.alpha))
            }
            "bfgs" => {
                let b = block.unwrap();
                let params = BfgsParams {
                    epsilon: b.epsilon,
                    beta: b.beta,
                    bcal: b.bcal,
                    ltilde: b.ltilde,
                    memory: b.memory,
                };
                (Method::Bfgs(params), self.run.alpha.unwrap_or(b.alpha))
            }
            _ => unreachable!("method_block validated the name"),
        };

        Ok(RunConfig {
            alpha,
            period,
            batch,
            method,
            iterations: self.run.iterations,
            seed: self.run.seed,
            audit_every: self.run.audit_every,
            exact_gradient: false,
            corrupt_audit: false,
        })
    }
}

fn missing(what: &str) -> Error {
    Error::Config(format!("missing {what}"))
}
