//! Decentralized damped DFP on a synthetic least-squares problem.
//!
//! Twenty nodes on a random graph (half of all possible edges) share a
//! stacked regression problem whose Gram matrix has condition number 10.
//! Run with `cargo run --example least_squares_dfp`.

use dqn_sim::framework;
use dqn_sim::harness::presets::preset;

fn main() -> dqn_sim::Result<()> {
    let cfg = preset("ls-kappa10")?;
    let exp = cfg.build()?;
    println!(
        "n = {}, d = {}, sigma = {:.4}, alpha = {}, batch = {}, period = {}",
        exp.problem.n(),
        exp.problem.dim,
        exp.mixing.sigma,
        exp.run.alpha,
        exp.run.batch,
        exp.run.period
    );

    let trace = framework::run(&exp.problem, &exp.mixing, &exp.run)?;
    for target in [1e-2, 1e-4, 1e-8, 1e-12] {
        match trace.epochs_to_reach(target) {
            Some(e) => println!("relative error {target:.0e} reached after {e:.1} epochs"),
            None => println!("relative error {target:.0e} not reached"),
        }
    }
    println!(
        "final relative error {:.3e} after {:.1} epochs ({} curvature pairs admitted)",
        trace.final_relative_error(),
        trace.final_epochs(),
        trace.pair_stats.admitted
    );
    Ok(())
}
