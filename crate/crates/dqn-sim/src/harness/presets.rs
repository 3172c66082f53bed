//! Named experiment presets.
//!
//! Synthetic presets are self-contained. Dataset presets (covtype, cod-rna,
//! a6a, a9a, ijcnn1-*) carry tuned method parameters but no data file; point
//! `problem.path` at a local LIBSVM file through a `--config` overlay.

use super::config::{
    ExperimentConfig, MethodConfig, NetworkConfig, ProblemConfig, ProblemKind, RunSectionConfig,
};
use crate::{Error, Result};

pub const PRESET_NAMES: &[&str] = &[
    "ls-kappa10",
    "ls-kappa2000",
    "covtype",
    "cod-rna",
    "a6a",
    "a9a",
    "ijcnn1-batch",
    "ijcnn1-memory",
    "ijcnn1-topology",
];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "ls-kappa10" => Ok(least_squares(0.1, 1.0, dfp_ls(3.0, 0.04, 10), bfgs_ls(3.0, 0.04, 20, 10))),
        "ls-kappa2000" => Ok(least_squares(0.001, 2.0, dfp_ls(5.0, 0.01, 15), bfgs_ls(37.0, 0.01, 50, 15))),
        "covtype" => Ok(logistic_dataset(
            method(0.32, Some(0.01), 0.02, 0.002, 50.0, 3, 0.10),
            method(0.37, None, 0.001, 0.002, 50.0, 3, 0.10),
        )),
        "cod-rna" => Ok(logistic_dataset(
            method(0.30, Some(0.0002), 0.03, 0.002, 50.0, 20, 0.08),
            method(0.35, None, 100.0, 0.002, 50.0, 40, 0.10),
        )),
        "a6a" => Ok(logistic_dataset(
            method(0.38, Some(0.01), 0.005, 0.015, 20.0, 40, 0.10),
            method(0.38, None, 30.0, 1.2, 20.0, 50, 0.10),
        )),
        "a9a" => Ok(logistic_dataset(
            method(0.38, Some(0.001), 0.1, 0.5, 50.0, 50, 0.06),
            method(0.35, None, 30.0, 0.5, 20.0, 50, 0.10),
        )),
        "ijcnn1-batch" => Ok(logistic_dataset(
            method(0.32, Some(0.005), 0.005, 0.1, 50.0, 50, 0.10),
            method(0.31, None, 0.005, 0.1, 50.0, 50, 0.10),
        )),
        "ijcnn1-memory" => Ok(logistic_dataset(
            method(0.32, Some(0.004), 0.005, 0.001, 50.0, 50, 0.06),
            method(0.31, None, 0.002, 0.1, 50.0, 50, 0.06),
        )),
        "ijcnn1-topology" => Ok(logistic_dataset(
            method(0.32, Some(0.005), 0.005, 0.1, 50.0, 50, 0.06),
            method(0.31, None, 0.002, 0.1, 50.0, 50, 0.06),
        )),
        other => Err(Error::Config(format!(
            "unknown preset `{other}`; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

fn dfp_ls(epsilon: f64, beta: f64, batch: usize) -> MethodConfig {
    MethodConfig {
        alpha: 0.6,
        rho: Some(1e-5),
        epsilon,
        beta,
        bcal: 1e4,
        ltilde: 10.0,
        memory: 20,
        batch: Some(batch),
        batch_ratio: None,
    }
}

fn bfgs_ls(epsilon: f64, beta: f64, memory: usize, batch: usize) -> MethodConfig {
    MethodConfig {
        alpha: 0.6,
        rho: None,
        epsilon,
        beta,
        bcal: 1e4,
        ltilde: 10.0,
        memory,
        batch: Some(batch),
        batch_ratio: None,
    }
}

fn method(
    alpha: f64,
    rho: Option<f64>,
    epsilon: f64,
    beta: f64,
    ltilde: f64,
    memory: usize,
    batch_ratio: f64,
) -> MethodConfig {
    MethodConfig {
        alpha,
        rho,
        epsilon,
        beta,
        bcal: 1e4,
        ltilde,
        memory,
        batch: None,
        batch_ratio: Some(batch_ratio),
    }
}

fn least_squares(
    lambda_min: f64,
    lambda_max: f64,
    dfp: MethodConfig,
    bfgs: MethodConfig,
) -> ExperimentConfig {
    ExperimentConfig {
        problem: ProblemConfig {
            kind: ProblemKind::LeastSquares,
            samples_per_node: Some(500),
            dim: Some(8),
            lambda_min: Some(lambda_min),
            lambda_max: Some(lambda_max),
            iota: None,
            path: None,
            normalize: None,
            seed: Some(1),
        },
        network: twenty_node_random(),
        run: default_run(),
        dfp: Some(dfp),
        bfgs: Some(bfgs),
    }
}

fn logistic_dataset(dfp: MethodConfig, bfgs: MethodConfig) -> ExperimentConfig {
    ExperimentConfig {
        problem: ProblemConfig {
            kind: ProblemKind::Libsvm,
            samples_per_node: None,
            dim: None,
            lambda_min: None,
            lambda_max: None,
            iota: Some(1e-3),
            path: None,
            normalize: Some(true),
            seed: Some(1),
        },
        network: twenty_node_random(),
        run: default_run(),
        dfp: Some(dfp),
        bfgs: Some(bfgs),
    }
}

fn twenty_node_random() -> NetworkConfig {
    NetworkConfig {
        nodes: 20,
        topology: "random".into(),
        connectivity: Some(0.5),
        edge_list: None,
        seed: Some(1),
    }
}

fn default_run() -> RunSectionConfig {
    RunSectionConfig {
        method: "dfp".into(),
        iterations: 2000,
        seed: 1,
        period: None,
        audit_every: 0,
        alpha: None,
        batch: None,
        batch_ratio: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_round_trips() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
            assert_eq!(cfg, back, "{name}");
            assert!(cfg.dfp.is_some() && cfg.bfgs.is_some(), "{name}");
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn synthetic_presets_build() {
        for name in ["ls-kappa10", "ls-kappa2000"] {
            let cfg = preset(name).unwrap();
            let exp = cfg.build().unwrap();
            assert_eq!(exp.problem.n(), 20);
            assert_eq!(exp.problem.dim, 8);
        }
    }
}
