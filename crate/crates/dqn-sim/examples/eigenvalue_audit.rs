//! Runtime verification of the curvature engines' eigenvalue guarantees.
//!
//! Both engines come with closed-form bounds [M1, M2] that hold for every
//! Hessian-inverse approximation built from admitted pairs, no matter what
//! data the run produces. This example audits every tenth iteration and
//! prints the observed eigenvalue envelope against the bounds.

use dqn_sim::framework;
use dqn_sim::harness::presets::preset;

fn main() -> dqn_sim::Result<()> {
    for method in ["dfp", "bfgs"] {
        let mut cfg = preset("ls-kappa10")?;
        cfg.run.method = method.into();
        cfg.run.audit_every = 10;
        cfg.run.iterations = 500;
        let exp = cfg.build()?;
        let trace = framework::run(&exp.problem, &exp.mixing, &exp.run)?;

        let audits: Vec<_> = trace.records.iter().filter_map(|r| r.audit).collect();
        let lo = audits.iter().map(|a| a.min_eig).fold(f64::INFINITY, f64::min);
        let hi = audits.iter().map(|a| a.max_eig).fold(0.0f64, f64::max);
        let (m1, m2) = (audits[0].bound_m1, audits[0].bound_m2);
        println!("{method}: audited {} iterations over 20 nodes", audits.len());
        println!("  observed eigenvalues in [{lo:.4e}, {hi:.4e}]");
        println!("  guaranteed bounds     [{m1:.4e}, {m2:.4e}]");
        println!("  violations: {}", trace.violations.len());
    }
    Ok(())
}
