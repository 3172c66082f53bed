//! End-to-end acceptance checks. Each test prints one `criterion N: PASS` or
//! `criterion N: FAIL` line (run with `--nocapture` to see them on success).

use dqn_sim::curvature::{bfgs, CurvatureMemory};
use dqn_sim::framework::{self, RunConfig, RunOutcome, Trace};
use dqn_sim::harness::config::{
    ExperimentConfig, NetworkConfig, ProblemConfig, ProblemKind, RunSectionConfig,
};
use dqn_sim::harness::presets::preset;
use dqn_sim::numerics::{self, norm, sub};
use dqn_sim::problems::{synth_least_squares, synth_logistic, SpectrumSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

fn report(n: usize, ok: bool, detail: &str) {
    println!("criterion {n}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn run_preset(name: &str, method: &str, audit_every: usize, seed: u64) -> Trace {
    let mut cfg = preset(name).unwrap();
    cfg.run.method = method.into();
    cfg.run.audit_every = audit_every;
    cfg.run.seed = seed;
    let exp = cfg.build().unwrap();
    framework::run(&exp.problem, &exp.mixing, &exp.run).unwrap()
}

#[test]
fn criterion_1_two_loop_matches_explicit() {
    let start = Instant::now();
    let params = bfgs::BfgsParams {
        epsilon: 0.5,
        beta: 0.04,
        bcal: 1e3,
        ltilde: 10.0,
        memory: 10,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    let mut states = 0usize;
    while states < 1000 {
        let d = rng.gen_range(1..=20);
        let target = rng.gen_range(1..=10usize);
        let mut mem = CurvatureMemory::new(10);
        let mut x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let mut g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        while mem.len() < target {
            let x2: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let g2: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            if let Some(pair) = bfgs::make_pair(&x2, &x, &g2, &g, &params) {
                mem.push(pair);
            }
            x = x2;
            g = g2;
        }
        let grad: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let newest = mem.newest().unwrap();
        let h0 = bfgs::initial_scalar(&newest.s, &newest.y, &params);
        let fast = bfgs::two_loop(&mem, h0, &grad).unwrap();
        let h = bfgs::explicit(&mem, h0, d).unwrap();
        let slow = h.matvec(&grad);
        let tol = 1e-10 * norm(&grad) * numerics::spectral_norm(&h);
        worst = worst.max(norm(&sub(&fast, &slow)) / tol.max(f64::MIN_POSITIVE));
        assert!(norm(&sub(&fast, &slow)) <= tol);
        states += 1;
    }
    let elapsed = start.elapsed();
    report(
        1,
        elapsed.as_secs_f64() < 10.0,
        &format!(
            "1000 states, worst deviation {:.2e} of tolerance, {:.2}s",
            worst,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_2_curvature_inequalities() {
    let mut ok = true;
    let mut detail = String::new();
    for method in ["dfp", "bfgs"] {
        let trace = run_preset("ls-kappa10", method, 0, 1);
        let s = trace.pair_stats;
        ok &= s.admitted > 0 && s.theta_violations == 0 && s.curvature_violations == 0;
        detail.push_str(&format!(
            "{method}: {} pairs, {} theta / {} curvature violations; ",
            s.admitted, s.theta_violations, s.curvature_violations
        ));
    }
    report(2, ok, detail.trim_end_matches("; "));
}

#[test]
fn criterion_3_eigenvalue_bounds_every_iteration() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for method in ["dfp", "bfgs"] {
        let trace = run_preset("ls-kappa10", method, 1, 1);
        ok &= trace.violations.is_empty() && matches!(trace.outcome, RunOutcome::Completed);
        let audited = trace.records.iter().filter(|r| r.audit.is_some()).count();
        detail.push_str(&format!(
            "{method}: {} audited iterations, {} violations; ",
            audited,
            trace.violations.len()
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 300.0;
    detail.push_str(&format!("{:.1}s", elapsed.as_secs_f64()));
    report(3, ok, &detail);
}

#[test]
fn criterion_4_gradient_tracking_identity() {
    let mut worst: f64 = 0.0;
    for (name, method) in [
        ("ls-kappa10", "dfp"),
        ("ls-kappa10", "bfgs"),
        ("ls-kappa2000", "dfp"),
        ("ls-kappa2000", "bfgs"),
    ] {
        worst = worst.max(run_preset(name, method, 0, 1).tracking_max_rel);
    }
    report(
        4,
        worst <= 1e-11,
        &format!("max relative deviation {worst:.2e} over four preset runs"),
    );
}

#[test]
fn criterion_5_variance_reduction_degeneracy() {
    let mut cfg = preset("ls-kappa10").unwrap();
    cfg.run.iterations = 200;
    cfg.run.batch = Some(500);
    cfg.run.period = Some(1);
    let exp = cfg.build().unwrap();
    let stochastic = framework::run(&exp.problem, &exp.mixing, &exp.run).unwrap();
    let exact_cfg = RunConfig {
        exact_gradient: true,
        ..exp.run.clone()
    };
    let exact = framework::run(&exp.problem, &exp.mixing, &exact_cfg).unwrap();
    let ok = stochastic.records == exact.records && stochastic.final_x == exact.final_x;
    report(5, ok, "b=m, T=1 trace bitwise equal to exact-gradient trace");
}

fn epochs_to(trace: &Trace, target: f64) -> f64 {
    trace.epochs_to_reach(target).unwrap_or(f64::INFINITY)
}

#[test]
fn criterion_6_quasi_newton_beats_first_order() {
    let kappa10 = run_preset("ls-kappa10", "dfp", 0, 1);
    let e10 = epochs_to(&kappa10, 1e-8);
    let mut ok = e10 <= 120.0;
    let mut detail = format!("kappa10 dfp reaches 1e-8 at {e10:.1} epochs");

    for seed in 1..=3u64 {
        let dfp = run_preset("ls-kappa2000", "dfp", 0, seed);
        let mut id_cfg = preset("ls-kappa2000").unwrap();
        id_cfg.run.method = "identity".into();
        id_cfg.run.alpha = Some(3.0);
        id_cfg.run.batch = Some(15);
        id_cfg.run.iterations = 100_000;
        id_cfg.run.seed = seed;
        let exp = id_cfg.build().unwrap();
        let id = framework::run(&exp.problem, &exp.mixing, &exp.run).unwrap();
        let (ed, ei) = (epochs_to(&dfp, 1e-8), epochs_to(&id, 1e-8));
        ok &= ed < ei;
        detail.push_str(&format!("; kappa2000 seed {seed}: dfp {ed:.0} vs identity {ei:.0}"));
    }
    report(6, ok, &detail);
}

#[test]
fn criterion_7_condition_number_construction() {
    let mut ok = true;
    let mut detail = String::new();
    for (lo, hi, tol) in [(0.1, 1.0, 1e-9), (0.001, 2.0, 1e-6)] {
        let spec = SpectrumSpec {
            dim: 8,
            lambda_min: lo,
            lambda_max: hi,
            seed: 1,
        };
        let gp = synth_least_squares(20, 500, &spec).unwrap();
        // The Hessian of F is AᵀA / n for stacked least squares.
        let mut gram = gp.full_hessian(&[0.0; 8]);
        gram.scale(gp.n() as f64);
        let e = numerics::sym_eigs(&gram).unwrap();
        let (rl, rh) = ((e.min() - lo).abs() / lo, (e.max() - hi).abs() / hi);
        ok &= rl <= tol && rh <= tol;
        detail.push_str(&format!(
            "kappa {:.0}: extremes off by {rl:.1e}/{rh:.1e}; ",
            hi / lo
        ));
    }
    report(7, ok, detail.trim_end_matches("; "));
}

#[test]
fn criterion_8_gradients_match_finite_differences() {
    let ls = synth_least_squares(
        2,
        30,
        &SpectrumSpec {
            dim: 6,
            lambda_min: 0.5,
            lambda_max: 2.0,
            seed: 9,
        },
    )
    .unwrap();
    let logit = synth_logistic(2, 30, 6, 1e-3, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for gp in [&ls, &logit] {
        for _ in 0..100 {
            let x: Vec<f64> = (0..6).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let p = &gp.locals[rng.gen_range(0..gp.n())];
            let g = p.full_grad(&x);
            let h = 1e-5;
            for j in 0..6 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (p.local_cost(&xp) - p.local_cost(&xm)) / (2.0 * h);
                worst = worst.max((g[j] - fd).abs() / fd.abs().max(1.0));
            }
        }
    }
    report(
        8,
        worst <= 1e-6,
        &format!("worst relative gradient deviation {worst:.2e} over 200 points"),
    );
}

fn topology_surrogate(
    topology: &str,
    connectivity: Option<f64>,
    alpha: f64,
    seed: u64,
) -> (f64, f64) {
    let cfg = ExperimentConfig {
        problem: ProblemConfig {
            kind: ProblemKind::Logistic,
            samples_per_node: Some(100),
            dim: Some(22),
            lambda_min: None,
            lambda_max: None,
            iota: Some(1e-3),
            path: None,
            normalize: None,
            seed: Some(1),
        },
        network: NetworkConfig {
            nodes: 20,
            topology: topology.into(),
            connectivity,
            edge_list: None,
            seed: Some(1),
        },
        run: RunSectionConfig {
            method: "dfp".into(),
            iterations: 6000,
            seed,
            period: None,
            audit_every: 0,
            alpha: Some(alpha),
            batch: None,
            batch_ratio: Some(0.06),
        },
        dfp: Some(dqn_sim::harness::config::MethodConfig {
            alpha,
            rho: Some(0.005),
            epsilon: 0.005,
            beta: 0.1,
            bcal: 1e4,
            ltilde: 50.0,
            memory: 50,
            batch: None,
            batch_ratio: Some(0.06),
        }),
        bfgs: None,
    };
    let exp = cfg.build().unwrap();
    let trace = framework::run(&exp.problem, &exp.mixing, &exp.run).unwrap();
    (trace.sigma, epochs_to(&trace, 1e-6))
}

#[test]
fn criterion_9_topology_ordering() {
    // Per-topology tuned step sizes, as in the source experiments.
    let setups: [(&str, Option<f64>, f64); 5] = [
        ("cycle", None, 0.06),
        ("star", None, 0.15),
        ("random", Some(0.2), 0.2),
        ("random", Some(0.3), 0.25),
        ("random", Some(0.5), 0.4),
    ];
    let mut held = 0usize;
    let mut total = 0usize;
    let mut detail = String::new();
    for seed in 1..=3u64 {
        let mut results: Vec<(f64, f64)> = setups
            .iter()
            .map(|(t, c, a)| topology_surrogate(t, *c, *a, seed))
            .collect();
        // Largest contraction factor first; fewer epochs expected as sigma
        // shrinks.
        results.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        for w in results.windows(2) {
            total += 1;
            if w[1].1 <= w[0].1 {
                held += 1;
            }
        }
        detail.push_str(&format!(
            "seed {seed}: epochs {:?}; ",
            results.iter().map(|r| (r.1 * 10.0).round() / 10.0).collect::<Vec<_>>()
        ));
    }
    let ok = (held as f64) >= 0.8 * total as f64;
    detail.push_str(&format!("{held}/{total} adjacent comparisons held"));
    report(9, ok, &detail);
}

#[test]
fn criterion_10_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_dqn-sim"))
            .args([
                "run",
                "--preset",
                "ls-kappa10",
                "--iters",
                "300",
                "--seed",
                "5",
                "--audit-every",
                "50",
                "--deterministic",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    report(
        10,
        !a.is_empty() && a == b,
        &format!("two CLI runs produced identical {} byte traces", a.len()),
    );
}

// Exercised separately from criterion 10 so the negative control of the
// audit path goes through the real binary as well.
#[test]
fn verify_negative_control_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_dqn-sim"))
        .args([
            "verify",
            "--preset",
            "ls-kappa10",
            "--iters",
            "30",
            "--audit-every",
            "10",
            "--corrupt-audit",
            "--deterministic",
            "--out",
        ])
        .arg(dir.path().join("corrupt.csv"))
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn verify_clean_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_dqn-sim"))
        .args([
            "verify",
            "--preset",
            "ls-kappa10",
            "--method",
            "bfgs",
            "--iters",
            "50",
            "--deterministic",
            "--out",
        ])
        .arg(dir.path().join("clean.csv"))
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}
