//! How the graph's contraction factor shapes convergence speed.
//!
//! Runs the same logistic problem over a cycle, a star, and random graphs of
//! increasing density, printing sigma next to the epochs needed to reach a
//! fixed accuracy. Denser graphs mix faster (smaller sigma) and finish in
//! fewer epochs.

use dqn_sim::curvature::dfp::DfpParams;
use dqn_sim::framework::{run, Method, RunConfig};
use dqn_sim::network::{cycle_graph, metropolis_weights, random_connected_graph, star_graph, Topology};
use dqn_sim::problems::synth_logistic;

fn main() -> dqn_sim::Result<()> {
    let mut problem = synth_logistic(20, 100, 22, 1e-3, 1)?;
    problem.centralized_newton(1e-10)?;

    // Step sizes are tuned per topology; sparse graphs need smaller steps.
    let setups: Vec<(&str, Topology, f64)> = vec![
        ("cycle", cycle_graph(20)?, 0.06),
        ("star", star_graph(20)?, 0.15),
        ("random 0.2", random_connected_graph(20, 0.2, 1)?, 0.2),
        ("random 0.3", random_connected_graph(20, 0.3, 1)?, 0.25),
        ("random 0.5", random_connected_graph(20, 0.5, 1)?, 0.4),
    ];

    println!("{:<12} {:>7} {:>16}", "topology", "sigma", "epochs to 1e-6");
    for (name, topology, alpha) in setups {
        let mixing = metropolis_weights(&topology);
        let cfg = RunConfig {
            alpha,
            period: 17,
            batch: 6,
            method: Method::Dfp(DfpParams {
                rho: 0.005,
                epsilon: 0.005,
                beta: 0.1,
                bcal: 1e4,
                ltilde: 50.0,
                memory: 50,
            }),
            iterations: 6000,
            seed: 1,
            audit_every: 0,
            exact_gradient: false,
            corrupt_audit: false,
        };
        let trace = run(&problem, &mixing, &cfg)?;
        match trace.epochs_to_reach(1e-6) {
            Some(e) => println!("{name:<12} {:>7.4} {e:>16.1}", trace.sigma),
            None => println!("{name:<12} {:>7.4} {:>16}", trace.sigma, "not reached"),
        }
    }
    Ok(())
}
