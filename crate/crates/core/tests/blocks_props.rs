use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use proxcg::blocks::{
    lo_lp_ball, lp_ball_diameter, power_smooth_block, prox_l1_box, quadratic_smooth_block, zero_smooth_block,
    L1BoxProx, LoBlock, LpBallLo, ProblemSpec, SmoothBlock,
};
use proxcg::linmap::LinearMap;
use proxcg::vecops::{dist2, dot, norm_p};

fn vec_of(n: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, n)
}

proptest! {
    /// ⟨P(u) − P(w), u − w⟩ ≥ ‖P(u) − P(w)‖².
    #[test]
    fn prox_is_firmly_nonexpansive(u in vec_of(5, 4.0), w in vec_of(5, 4.0), gamma in 0.0f64..2.0, r in 0.1f64..3.0) {
        let (pu, pw) = (prox_l1_box(&u, gamma, r), prox_l1_box(&w, gamma, r));
        let d: Vec<f64> = pu.iter().zip(&pw).map(|(a, b)| a - b).collect();
        let e: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - b).collect();
        prop_assert!(dot(&d, &e) >= dot(&d, &d) - 1e-12);
    }

    /// The prox output beats every perturbation inside the box.
    #[test]
    fn prox_minimizes_its_model(u in vec_of(3, 4.0), gamma in 0.01f64..2.0, r in 0.1f64..3.0, z in vec_of(3, 1.0)) {
        let model = |x: &[f64]| {
            x.iter().zip(&u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (2.0 * gamma)
                + x.iter().map(|v| v.abs()).sum::<f64>()
        };
        let p = prox_l1_box(&u, gamma, r);
        let other: Vec<f64> = z.iter().map(|v| v * r).collect();
        prop_assert!(model(&p) <= model(&other) + 1e-12);
    }

    #[test]
    fn lo_is_optimal_on_the_sphere(v in vec_of(4, 3.0), w in vec_of(4, 3.0), sigma in 0.1f64..3.0, pi in 0usize..3) {
        let p = [1.1, 1.5, 2.0][pi];
        let u = lo_lp_ball(&v, sigma, p);
        let nw = norm_p(&w, p);
        prop_assume!(nw > 0.0);
        let feasible: Vec<f64> = w.iter().map(|x| sigma * x / nw).collect();
        prop_assert!(dot(&v, &u) <= dot(&v, &feasible) + 1e-10);
        if v.iter().any(|x| *x != 0.0) {
            prop_assert!((norm_p(&u, p) - sigma).abs() <= 1e-10 * sigma);
        }
    }

    #[test]
    fn lo_is_scale_invariant_in_v_and_linear_in_sigma(v in vec_of(3, 3.0), c in 0.01f64..100.0, sigma in 0.1f64..3.0) {
        let u = lo_lp_ball(&v, sigma, 1.5);
        let scaled = lo_lp_ball(&v.iter().map(|x| c * x).collect::<Vec<_>>(), sigma, 1.5);
        let bigger = lo_lp_ball(&v, 2.0 * sigma, 1.5);
        for i in 0..3 {
            prop_assert!((u[i] - scaled[i]).abs() <= 1e-12 * (1.0 + u[i].abs()));
            prop_assert!((2.0 * u[i] - bigger[i]).abs() <= 1e-12 * (1.0 + u[i].abs()));
        }
    }
}

fn finite_difference_check(block: &dyn SmoothBlock, radius: f64, seed: u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = block.dim();
    for _ in 0..200 {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..radius)).collect();
        let g = block.grad(&x);
        for i in 0..n {
            let h = 1e-6;
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            let fd = (block.eval(&xp) - block.eval(&xm)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "coordinate {i}: {fd} vs {}", g[i]);
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    finite_difference_check(&power_smooth_block(0.5, 4, 2.0).unwrap(), 2.0, 1);
    finite_difference_check(&power_smooth_block(1.0, 3, 2.0).unwrap(), 2.0, 2);
    let q = LinearMap::from_rows(&[vec![1.0, 2.0, 0.0], vec![0.5, -1.0, 3.0]]).unwrap();
    finite_difference_check(&quadratic_smooth_block(q, vec![1.0, -2.0]).unwrap(), 3.0, 3);
}

/// `h(y) ≤ h(x) + ⟨∇h(x), y − x⟩ + M/(1+μ)‖y − x‖^{1+μ}` with the block's own
/// constant, plus convexity, over 10⁵ pairs.
#[test]
fn descent_lemma_and_convexity_hold() {
    let blocks: Vec<Box<dyn SmoothBlock>> = vec![
        Box::new(power_smooth_block(0.5, 3, 2.0).unwrap()),
        Box::new(power_smooth_block(0.3, 2, 1.0).unwrap()),
        Box::new(
            quadratic_smooth_block(LinearMap::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap(), vec![0.0, 1.0])
                .unwrap(),
        ),
    ];
    let radii = [2.0, 1.0, 2.0];
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for (block, r) in blocks.iter().zip(radii) {
        let (mu, m) = (block.holder_exponent(), block.holder_constant());
        let n = block.dim();
        for _ in 0..100_000 / blocks.len() {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-r..r)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-r..r)).collect();
            let gx = block.grad(&x);
            let d = dist2(&x, &y);
            let lin = block.eval(&x) + gx.iter().zip(x.iter().zip(&y)).map(|(g, (a, b))| g * (b - a)).sum::<f64>();
            let hy = block.eval(&y);
            assert!(hy <= lin + m / (1.0 + mu) * d.powf(1.0 + mu) + 1e-12, "descent lemma");
            assert!(hy >= lin - 1e-12, "convexity");
        }
    }
}

#[test]
fn lp_ball_points_respect_the_diameter() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for (n, p) in [(2usize, 1.1), (5, 1.5), (8, 2.0), (20, 1.2)] {
        let sigma = 0.7;
        let diam = lp_ball_diameter(sigma, p, n);
        let ball = LpBallLo::new(n, sigma, p).unwrap();
        for _ in 0..2000 {
            // extreme points via the oracle and random boundary points
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (a, b) = (ball.lo(&v), ball.lo(&w));
            assert!(ball.contains(&a) && ball.contains(&b));
            assert!(dist2(&a, &b) <= diam * (1.0 + 1e-12));
        }
    }
}

#[test]
fn d2_upper_bounds_the_coupling() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let (m, n) = (3, 5);
    let data: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let a = LinearMap::dense(m, n, data).unwrap();
    let spec = ProblemSpec::new(
        Arc::new(zero_smooth_block(n)),
        Arc::new(L1BoxProx::new(n, 1.0, 1.5).unwrap()),
        Arc::new(zero_smooth_block(m)),
        Arc::new(LpBallLo::new(m, 0.8, 1.5).unwrap()),
        a.clone(),
        LinearMap::negated_identity(m),
        vec![0.0; m],
    )
    .unwrap();
    for _ in 0..20_000 {
        let x: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.5 } else { -1.5 }).collect();
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = spec.g2.lo(&v);
        let by = spec.b.apply(&y).unwrap();
        let coupling = dot(&a.apply(&x).unwrap(), &by).abs();
        assert!(coupling <= spec.d2_upper * (1.0 + 1e-12), "{coupling} > {}", spec.d2_upper);
    }
}
