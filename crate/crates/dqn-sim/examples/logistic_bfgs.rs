//! Matrix-free damped BFGS on synthetic logistic regression.
//!
//! Builds the problem and network directly from library calls instead of a
//! preset, which is the typical embedding path.

use dqn_sim::curvature::bfgs::BfgsParams;
use dqn_sim::framework::{run, Method, RunConfig};
use dqn_sim::network::{metropolis_weights, random_connected_graph};
use dqn_sim::problems::synth_logistic;

fn main() -> dqn_sim::Result<()> {
    let mut problem = synth_logistic(20, 200, 15, 1e-3, 7)?;
    problem.centralized_newton(1e-10)?;

    let topology = random_connected_graph(20, 0.4, 7)?;
    let mixing = metropolis_weights(&topology);

    let cfg = RunConfig {
        alpha: 0.3,
        period: 17,
        batch: 12,
        method: Method::Bfgs(BfgsParams {
            epsilon: 0.01,
            beta: 0.1,
            bcal: 1e4,
            ltilde: 50.0,
            memory: 30,
        }),
        iterations: 3000,
        seed: 7,
        audit_every: 0,
        exact_gradient: false,
        corrupt_audit: false,
    };

    let trace = run(&problem, &mixing, &cfg)?;
    println!("sigma = {:.4}", trace.sigma);
    for r in trace.records.iter().step_by(500) {
        println!(
            "iteration {:5}  epochs {:7.2}  relative error {:.3e}",
            r.iteration, r.epochs, r.relative_error
        );
    }
    println!(
        "final: relative error {:.3e}, tracking deviation {:.1e}",
        trace.final_relative_error(),
        trace.tracking_max_rel
    );
    Ok(())
}
