use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use proxcg::blocks::{power_smooth_block, zero_smooth_block, L1BoxProx, LpBallLo, ProblemSpec};
use proxcg::csgen::{generate_instance, reformulate};
use proxcg::duality::CsMonitor;
use proxcg::linmap::LinearMap;
use proxcg::solver::{run, step, NoMonitor, SolverConfig, SolverState, StopReason, TRACE_HEADER};

fn cfg(max_iters: usize) -> SolverConfig {
    SolverConfig {
        beta0: 5.0,
        max_iters,
        step_tol: None,
        ..SolverConfig::default()
    }
}

#[test]
fn runs_are_deterministic() {
    let inst = generate_instance(10, 30, 3, 1.5, 9).unwrap();
    let problem = reformulate(&inst).unwrap();
    let go = || {
        let mut mon = CsMonitor::new(problem.dual.clone(), 0.05, 0.005);
        run(&problem.spec, &cfg(500), vec![0.0; 30], vec![0.0; 10], &mut mon).unwrap()
    };
    let (a, b) = (go(), go());
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.state.x, b.state.x);
    assert_eq!(a.stop_reason, b.stop_reason);
}

#[test]
fn iterates_stay_in_their_domains() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for seed in 0..5u64 {
        let (m, n) = (4, 9);
        let data: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let spec = ProblemSpec::new(
            Arc::new(power_smooth_block(0.7, n, 1.0).unwrap()),
            Arc::new(L1BoxProx::new(n, 0.5, 1.0).unwrap()),
            Arc::new(zero_smooth_block(m)),
            Arc::new(LpBallLo::new(m, 0.6, 1.3).unwrap()),
            LinearMap::dense(m, n, data).unwrap(),
            LinearMap::negated_identity(m),
            c,
        )
        .unwrap();
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut s = SolverState::initial(&spec, &cfg(2000), x0, vec![0.0; m]).unwrap();
        for _ in 0..2000 {
            s = step(&s, &spec, &cfg(2000)).unwrap();
            assert!(spec.f2.contains(&s.x), "seed {seed}, t {}", s.t);
            assert!(spec.g2.contains(&s.y), "seed {seed}, t {}", s.t);
            assert!(spec.objective(&s.x, &s.y).is_finite());
        }
    }
}

#[test]
fn cs_run_reduces_infeasibility() {
    let inst = generate_instance(20, 60, 4, 1.5, 2).unwrap();
    let problem = reformulate(&inst).unwrap();
    let out = run(&problem.spec, &cfg(3000), vec![0.0; 60], vec![0.0; 20], &mut NoMonitor).unwrap();
    let recs = &out.trace.records;
    assert_eq!(out.stop_reason, StopReason::IterationCap);
    assert!(recs[3000].feas2 < recs[100].feas2);
    let csv = out.trace.to_csv_string();
    assert!(csv.lines().any(|l| l == TRACE_HEADER));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3002);
}
