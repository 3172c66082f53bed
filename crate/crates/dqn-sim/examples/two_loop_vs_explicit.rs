//! The two-loop recursion against the explicit BFGS recursion.
//!
//! The production path computes `H g` without ever forming `H`; the explicit
//! form exists for audits and as a cross-check. This example builds a random
//! memory window, applies both, and prints the agreement along with timing
//! at a dimension where the O(Md) vs O(d^2) gap starts to show.

use dqn_sim::curvature::bfgs::{self, BfgsParams};
use dqn_sim::curvature::CurvatureMemory;
use dqn_sim::numerics::{norm, sub};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() -> dqn_sim::Result<()> {
    let d = 400;
    let params = BfgsParams {
        epsilon: 0.1,
        beta: 0.01,
        bcal: 1e4,
        ltilde: 20.0,
        memory: 15,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut gauss = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen::<f64>() - 0.5).collect() };

    let mut mem = CurvatureMemory::new(params.memory);
    let mut x = gauss(d);
    let mut g = gauss(d);
    while mem.len() < params.memory {
        let x2 = gauss(d);
        let g2 = gauss(d);
        if let Some(pair) = bfgs::make_pair(&x2, &x, &g2, &g, &params) {
            mem.push(pair);
        }
        x = x2;
        g = g2;
    }

    let grad = gauss(d);
    let newest = mem.newest().unwrap();
    let h0 = bfgs::initial_scalar(&newest.s, &newest.y, &params);

    let t0 = Instant::now();
    let fast = bfgs::two_loop(&mem, h0, &grad)?;
    let t_fast = t0.elapsed();

    let t0 = Instant::now();
    let h = bfgs::explicit(&mem, h0, d)?;
    let slow = h.matvec(&grad);
    let t_slow = t0.elapsed();

    println!("d = {d}, M = {}", params.memory);
    println!("two-loop:  {:>10.1?}", t_fast);
    println!("explicit:  {:>10.1?}", t_slow);
    println!(
        "||two_loop - explicit*g|| / ||g|| = {:.2e}",
        norm(&sub(&fast, &slow)) / norm(&grad)
    );
    Ok(())
}
