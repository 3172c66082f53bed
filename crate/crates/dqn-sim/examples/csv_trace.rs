//! Writing a per-iteration CSV trace, the same format the CLI emits.
//!
//! Columns: iteration, epochs, relative_error, then the audit columns
//! min_eig, max_eig, bound_m1, bound_m2 (empty on iterations that were not
//! audited). A `# sigma=` comment records the network's contraction factor.

use dqn_sim::framework;
use dqn_sim::harness::csv;
use dqn_sim::harness::presets::preset;

fn main() -> dqn_sim::Result<()> {
    let mut cfg = preset("ls-kappa10")?;
    cfg.run.iterations = 40;
    cfg.run.audit_every = 20;
    let exp = cfg.build()?;
    let trace = framework::run(&exp.problem, &exp.mixing, &exp.run)?;

    let text = csv::trace_to_string(&trace, true);
    for line in text.lines().take(8) {
        println!("{line}");
    }
    println!("... {} rows total", trace.records.len());
    Ok(())
}
