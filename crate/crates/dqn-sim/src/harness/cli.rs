//! The `dqn-sim` command line.
//!
//! Three subcommands share one override surface:
//!
//! * `run` executes a single experiment and writes the CSV trace,
//! * `sweep` repeats an experiment over a list of values for one parameter,
//! * `verify` runs with eigenvalue audits forced on and fails loudly on any
//!   bound violation.
//!
//! A base config comes from `--preset` or a `--config` TOML file; individual
//! flags then override fields of that base. Exit codes: 0 success, 2 bad
//! config or usage, 3 divergence, 4 audit violation.

use super::config::ExperimentConfig;
use super::{csv, presets};
use crate::framework::{self, RunOutcome, Trace};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "dqn-sim",
    version,
    about = "Simulator for decentralized stochastic quasi-Newton optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write its CSV trace.
    Run(RunArgs),
    /// Repeat an experiment over a list of values for one parameter.
    Sweep(SweepArgs),
    /// Run with per-iteration eigenvalue audits and report any violation.
    Verify(RunArgs),
}

#[derive(Debug, Args, Clone)]
struct CommonArgs {
    /// TOML experiment config (mutually exclusive with --preset).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset; defaults to ls-kappa10 when no config is given.
    #[arg(long)]
    preset: Option<String>,
    /// identity, dfp, or bfgs.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Connectivity ratio for random topologies.
    #[arg(long)]
    connectivity: Option<f64>,
    /// random, cycle, or star.
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    bcal: Option<f64>,
    #[arg(long)]
    ltilde: Option<f64>,
    #[arg(long)]
    memory: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    batch_ratio: Option<f64>,
    #[arg(long)]
    period: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Audit cadence; 0 disables audits.
    #[arg(long)]
    audit_every: Option<usize>,
    /// Suppress the timestamp comment so output is byte-reproducible.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads for the per-node loop (default: rayon's choice).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, hide = true)]
    corrupt_audit: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Parameter to vary: alpha, batch, batch-ratio, memory, period,
    /// connectivity, topology, or seed. Topology values are `cycle`, `star`,
    /// or `random:R` with connectivity ratio R.
    #[arg(long)]
    param: String,
    /// Comma-separated values for the swept parameter.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    /// Directory for per-value CSV traces (default: summaries only).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` and executes; returns the process exit code.
pub fn main_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn main() -> i32 {
    main_from(std::env::args_os())
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Diverged { .. } => EXIT_DIVERGED,
        _ => EXIT_CONFIG,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => run_cmd(args, false),
        Command::Verify(args) => run_cmd(args, true),
        Command::Sweep(args) => sweep_cmd(args),
    }
}

fn resolve_config(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "--config and --preset are mutually exclusive".into(),
            ))
        }
        (Some(path), None) => ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)?,
        (None, Some(name)) => presets::preset(name)?,
        (None, None) => presets::preset("ls-kappa10")?,
    };
    apply_overrides(&mut cfg, common)?;
    Ok(cfg)
}

fn apply_overrides(cfg: &mut ExperimentConfig, c: &CommonArgs) -> Result<()> {
    if let Some(m) = &c.method {
        cfg.run.method = m.clone();
    }
    if let Some(n) = c.nodes {
        cfg.network.nodes = n;
    }
    if let Some(t) = &c.topology {
        cfg.network.topology = t.clone();
    }
    if let Some(v) = c.connectivity {
        cfg.network.connectivity = Some(v);
    }
    if let Some(v) = c.iters {
        cfg.run.iterations = v;
    }
    if let Some(v) = c.seed {
        cfg.run.seed = v;
    }
    if let Some(v) = c.period {
        cfg.run.period = Some(v);
    }
    if let Some(v) = c.audit_every {
        cfg.run.audit_every = v;
    }
    if let Some(v) = c.alpha {
        cfg.run.alpha = Some(v);
    }
    if let Some(v) = c.batch {
        cfg.run.batch = Some(v);
        cfg.run.batch_ratio = None;
    }
    if let Some(v) = c.batch_ratio {
        cfg.run.batch_ratio = Some(v);
        cfg.run.batch = None;
    }

    let wants_block_override = c.rho.is_some()
        || c.epsilon.is_some()
        || c.beta.is_some()
        || c.bcal.is_some()
        || c.ltilde.is_some()
        || c.memory.is_some();
    if wants_block_override {
        let block = match cfg.run.method.as_str() {
            "dfp" => cfg.dfp.as_mut(),
            "bfgs" => cfg.bfgs.as_mut(),
            _ => None,
        }
        .ok_or_else(|| {
            Error::Config(format!(
                "method `{}` has no parameter block to override",
                cfg.run.method
            ))
        })?;
        if let Some(v) = c.rho {
            block.rho = Some(v);
        }
        if let Some(v) = c.epsilon {
            block.epsilon = v;
        }
        if let Some(v) = c.beta {
            block.beta = v;
        }
        if let Some(v) = c.bcal {
            block.bcal = v;
        }
        if let Some(v) = c.ltilde {
            block.ltilde = v;
        }
        if let Some(v) = c.memory {
            block.memory = v;
        }
    }
    Ok(())
}

fn execute(cfg: &ExperimentConfig, common: &CommonArgs) -> Result<Trace> {
    let mut exp = cfg.build()?;
    exp.run.corrupt_audit = common.corrupt_audit;
    let trace = match common.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            pool.install(|| framework::run(&exp.problem, &exp.mixing, &exp.run))?
        }
        None => framework::run(&exp.problem, &exp.mixing, &exp.run)?,
    };
    Ok(trace)
}

fn write_out(trace: &Trace, out: &Option<PathBuf>, deterministic: bool) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            csv::write_trace(&mut f, trace, deterministic)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            csv::write_trace(&mut lock, trace, deterministic)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn trace_exit_code(trace: &Trace) -> i32 {
    if let RunOutcome::Diverged { node, iteration } = trace.outcome {
        eprintln!("diverged: non-finite state at node {node}, iteration {iteration}");
        return EXIT_DIVERGED;
    }
    if !trace.violations.is_empty() {
        for v in &trace.violations {
            eprintln!(
                "audit violation at node {}, iteration {}: {} (eigenvalue {:.6e}, bound {:.6e})",
                v.node, v.iteration, v.kind, v.eigenvalue, v.bound
            );
        }
        return EXIT_AUDIT;
    }
    EXIT_OK
}

fn run_cmd(args: RunArgs, verify: bool) -> Result<i32> {
    let mut cfg = resolve_config(&args.common)?;
    if verify && args.common.audit_every.is_none() {
        cfg.run.audit_every = 1;
    }
    if verify && cfg.run.audit_every == 0 {
        return Err(Error::Config("verify needs audit-every >= 1".into()));
    }
    let trace = execute(&cfg, &args.common)?;
    write_out(&trace, &args.out, args.common.deterministic)?;
    let code = trace_exit_code(&trace);
    if verify {
        if code == EXIT_OK {
            eprintln!(
                "verify: all audited eigenvalues within bounds over {} iterations",
                trace.records.len().saturating_sub(1)
            );
        } else {
            eprintln!("verify: FAILED with {} violation(s)", trace.violations.len());
        }
    } else {
        let audit = if cfg.run.audit_every == 0 {
            "off".to_string()
        } else if trace.violations.is_empty() {
            "pass".to_string()
        } else {
            format!("FAIL ({} violations)", trace.violations.len())
        };
        eprintln!(
            "final relative error {:.6e} after {:.2} epochs, sigma {:.4}, audit {audit}",
            trace.final_relative_error(),
            trace.final_epochs(),
            trace.sigma
        );
    }
    Ok(code)
}

fn apply_sweep_value(cfg: &mut ExperimentConfig, param: &str, value: &str) -> Result<()> {
    let bad = |what: &str| Error::Config(format!("bad {what} value `{value}`"));
    match param {
        "alpha" => cfg.run.alpha = Some(value.parse().map_err(|_| bad("alpha"))?),
        "batch" => {
            cfg.run.batch = Some(value.parse().map_err(|_| bad("batch"))?);
            cfg.run.batch_ratio = None;
        }
        "memory" => {
            let m: usize = value.parse().map_err(|_| bad("memory"))?;
            if let Some(b) = cfg.dfp.as_mut() {
                b.memory = m;
            }
            if let Some(b) = cfg.bfgs.as_mut() {
                b.memory = m;
            }
        }
        "batch-ratio" => {
            let r: f64 = value.parse().map_err(|_| bad("batch-ratio"))?;
            cfg.run.batch_ratio = Some(r);
            cfg.run.batch = None;
        }
        "period" => cfg.run.period = Some(value.parse().map_err(|_| bad("period"))?),
        "topology" => match value.split_once(':') {
            Some(("random", r)) => {
                cfg.network.topology = "random".into();
                cfg.network.connectivity = Some(r.parse().map_err(|_| bad("connectivity"))?);
            }
            None if value == "cycle" || value == "star" => {
                cfg.network.topology = value.into();
            }
            _ => return Err(bad("topology")),
        },
        "connectivity" => {
            cfg.network.topology = "random".into();
            cfg.network.connectivity = Some(value.parse().map_err(|_| bad("connectivity"))?);
        }
        "seed" => cfg.run.seed = value.parse().map_err(|_| bad("seed"))?,
        other => {
            return Err(Error::Config(format!(
                "cannot sweep `{other}`; supported: alpha, batch, batch-ratio, memory, period, \
                 connectivity, topology, seed"
            )))
        }
    }
    Ok(())
}

fn sweep_cmd(args: SweepArgs) -> Result<i32> {
    let base = resolve_config(&args.common)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
    }
    let mut worst = EXIT_OK;
    let mut summary = String::from("param,value,sigma,final_relative_error,epochs\n");
    for value in &args.values {
        let mut cfg = base.clone();
        apply_sweep_value(&mut cfg, &args.param, value)?;
        let trace = execute(&cfg, &args.common)?;
        if let Some(dir) = &args.out {
            let path = dir.join(format!("sweep-{}-{}.csv", args.param, value.replace(':', "-")));
            let mut f = std::fs::File::create(path)?;
            csv::write_trace(&mut f, &trace, args.common.deterministic)?;
        }
        summary.push_str(&format!(
            "{},{},{},{},{}\n",
            args.param,
            value,
            trace.sigma,
            trace.final_relative_error(),
            trace.final_epochs()
        ));
        println!(
            "{}={} final_relative_error={:.6e} epochs={:.2} sigma={:.4}",
            args.param,
            value,
            trace.final_relative_error(),
            trace.final_epochs(),
            trace.sigma
        );
        worst = worst.max(trace_exit_code(&trace));
    }
    if let Some(dir) = &args.out {
        std::fs::write(dir.join("summary.csv"), summary)?;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common_from(args: &[&str]) -> CommonArgs {
        let mut full = vec!["dqn-sim", "run"];
        full.extend_from_slice(args);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Run(r) => r.common,
            _ => unreachable!(),
        }
    }

    #[test]
    fn overrides_reach_method_block() {
        let common = common_from(&[
            "--preset",
            "ls-kappa10",
            "--method",
            "bfgs",
            "--epsilon",
            "7.5",
            "--memory",
            "9",
            "--alpha",
            "0.1",
        ]);
        let cfg = resolve_config(&common).unwrap();
        let b = cfg.bfgs.as_ref().unwrap();
        assert_eq!(b.epsilon, 7.5);
        assert_eq!(b.memory, 9);
        assert_eq!(cfg.run.alpha, Some(0.1));
        assert_eq!(cfg.dfp.as_ref().unwrap().epsilon, 3.0, "other block untouched");
    }

    #[test]
    fn config_and_preset_conflict() {
        let common = common_from(&["--preset", "ls-kappa10", "--config", "/tmp/x.toml"]);
        assert!(resolve_config(&common).is_err());
    }

    #[test]
    fn unknown_preset_is_config_error() {
        let code = main_from(["dqn-sim", "run", "--preset", "no-such-preset"]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn sweep_value_dispatch() {
        let mut cfg = presets::preset("ls-kappa10").unwrap();
        apply_sweep_value(&mut cfg, "memory", "7").unwrap();
        assert_eq!(cfg.dfp.as_ref().unwrap().memory, 7);
        assert_eq!(cfg.bfgs.as_ref().unwrap().memory, 7);
        apply_sweep_value(&mut cfg, "connectivity", "0.3").unwrap();
        assert_eq!(cfg.network.connectivity, Some(0.3));
        assert!(apply_sweep_value(&mut cfg, "nope", "1").is_err());
        assert!(apply_sweep_value(&mut cfg, "alpha", "abc").is_err());
    }
}
