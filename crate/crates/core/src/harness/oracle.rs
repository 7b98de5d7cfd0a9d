//! Brute-force reference oracles.
//!
//! Nothing here calls the closed forms or iterative solvers it is used to
//! check: grids, exhaustive search, Jacobi rotations, quadrature and
//! bisection only.

use crate::csgen::CsInstance;
use crate::error::{Error, Result};

/// Per-coordinate grid minimizer of `(1/2γ)(x − u_i)² + |x|` over
/// `[−R, R]` with spacing `step`; `γ = 0` minimizes `(x − u_i)²` only.
pub fn prox_l1_box_grid(u: &[f64], gamma: f64, radius: f64, step: f64) -> Vec<f64> {
    let count = (2.0 * radius / step).floor() as usize;
    u.iter()
        .map(|&ui| {
            let mut best = (f64::INFINITY, 0.0);
            let mut consider = |x: f64| {
                let val = if gamma > 0.0 {
                    (x - ui) * (x - ui) / (2.0 * gamma) + x.abs()
                } else {
                    (x - ui) * (x - ui)
                };
                if val < best.0 {
                    best = (val, x);
                }
            };
            for i in 0..=count {
                consider(-radius + i as f64 * step);
            }
            consider(radius);
            best.1
        })
        .collect()
}

const MAX_RECENTER: usize = 200;

/// Centered grid refinement search for a minimum.
///
/// Scans `center ± half_width` at spacing `step`, keeps the `keep` best
/// feasible points, then for each refinement round rescans a window of
/// `±step_old` around every kept point at spacing `step_old / 10`, repeating
/// at that spacing while the best value improves.
/// `eval` returns `None` for infeasible points.
pub fn grid_refine_min<F>(
    center: &[f64],
    half_width: f64,
    step: f64,
    rounds: usize,
    keep: usize,
    eval: F,
) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let half = (half_width / step).ceil() as i64;
    let mut kept = scan(center, half, step, keep, &eval);
    if kept.is_empty() {
        return None;
    }
    let mut h = step;
    for _ in 0..rounds {
        let fine = h / 10.0;
        // re-center at this scale until the best value stops improving; a
        // constrained optimum can sit several coarse cells from the best
        // coarse point when the objective is flat along the boundary
        for _ in 0..MAX_RECENTER {
            let before = kept[0].0;
            let mut next: Vec<(f64, Vec<f64>)> = Vec::new();
            for (_, c) in &kept {
                for cand in scan(c, 10, fine, keep, &eval) {
                    insert_best(&mut next, cand, keep);
                }
            }
            for cand in kept {
                insert_best(&mut next, cand, keep);
            }
            kept = next;
            if !(kept[0].0 < before) {
                break;
            }
        }
        h = fine;
    }
    kept.into_iter().next().map(|(v, x)| (x, v))
}

fn insert_best(list: &mut Vec<(f64, Vec<f64>)>, cand: (f64, Vec<f64>), keep: usize) {
    if list.iter().any(|(_, x)| x == &cand.1) {
        return;
    }
    let pos = list.partition_point(|(v, _)| *v <= cand.0);
    if pos < keep {
        list.insert(pos, cand);
        list.truncate(keep);
    }
}

fn scan<F>(center: &[f64], half: i64, step: f64, keep: usize, eval: &F) -> Vec<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let dim = center.len();
    let side = (2 * half + 1) as usize;
    let total = side.pow(dim as u32);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut point = vec![0.0; dim];
    for idx in 0..total {
        let mut rem = idx;
        for d in 0..dim {
            let offset = (rem % side) as i64 - half;
            rem /= side;
            point[d] = center[d] + offset as f64 * step;
        }
        if let Some(v) = eval(&point) {
            if best.len() < keep || v < best[best.len() - 1].0 {
                insert_best(&mut best, (v, point.clone()), keep);
            }
        }
    }
    best
}

fn lp_norm_plain(v: &[f64], p: f64) -> f64 {
    v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Minimizes `⟨v, u⟩` over the ℓ_p sphere of radius `σ` (dims ≤ 3).
///
/// A linear objective attains its minimum over the ball on the boundary, so
/// the sphere is searched in angle coordinates: a direction `d(θ)` on the
/// Euclidean unit sphere (polar angle in 2-D, two spherical angles in 3-D)
/// is scaled to `σ d/‖d‖_p` and the angles are grid-searched with
/// refinement. An axis-aligned grid of the ball itself stalls on the boundary
/// because sliding along it needs sub-grid inward moves.
pub fn lo_bruteforce(v: &[f64], sigma: f64, p: f64, grid_step: f64) -> Vec<f64> {
    let dim = v.len();
    assert!(dim <= 3, "brute-force oracle limited to dims <= 3");
    let onto_sphere = |d: &[f64]| {
        let nd = lp_norm_plain(d, p);
        d.iter().map(|x| sigma * x / nd).collect::<Vec<f64>>()
    };
    let objective = |u: &[f64]| v.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
    match dim {
        0 => Vec::new(),
        1 => [sigma, -sigma]
            .into_iter()
            .map(|u| vec![u])
            .min_by(|a, b| objective(a).total_cmp(&objective(b)))
            .expect("two candidates"),
        _ => {
            let direction = |ang: &[f64]| -> Vec<f64> {
                if dim == 2 {
                    vec![ang[0].cos(), ang[0].sin()]
                } else {
                    vec![ang[1].sin() * ang[0].cos(), ang[1].sin() * ang[0].sin(), ang[1].cos()]
                }
            };
            let eval = |ang: &[f64]| Some(objective(&onto_sphere(&direction(ang))));
            // angular spacing matching a spatial grid step on a sphere of radius σ
            let step = (grid_step / sigma).min(0.5);
            let pi = std::f64::consts::PI;
            let (ang, _) = grid_refine_min(&vec![0.0; dim - 1], pi, step, 6, 4, eval).expect("unconstrained search");
            onto_sphere(&direction(&ang))
        }
    }
}

/// Primal/dual reference for a tiny compressed-sensing instance.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub x_star: Vec<f64>,
    /// `‖x*‖₁` at the best feasible grid point (an upper bound on the optimum).
    pub val: f64,
    /// Dual value at `λ̄` (a lower bound on the optimum).
    pub dual_val: f64,
    pub lambda_bar: Vec<f64>,
    pub method: &'static str,
    /// `val − dual_val`.
    pub tolerance: f64,
}

impl ReferenceSolution {
    pub fn lambda_bar_norm(&self) -> f64 {
        self.lambda_bar.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub const REFERENCE_ROUNDS: usize = 6;
const REFERENCE_KEEP: usize = 6;

/// Solves `min ‖x‖₁ s.t. ‖Ax − b‖_p ≤ σ` (n ≤ 3, m ≤ 2) and its dual by
/// exhaustive angular grids followed by refinement; the optimum is bracketed
/// by weak duality.
///
/// Primal: when `σ < ‖b‖_p` the optimal residual `w = Ax − b` lies on the
/// sphere `‖w‖_p = σ`, and for fixed `w` the ℓ₁-minimal solution of
/// `Ax = b + w` is a basic solution, found by enumerating the `m`-column
/// supports. The sphere is searched by angle (two points when `m = 1`).
///
/// Dual: the objective `−⟨b, λ⟩ − σ‖λ‖_q` is positively homogeneous, so along
/// each direction it is maximized on the boundary of `{‖Aᵀλ‖_∞ ≤ 1}` (or at
/// `λ = 0`). Directions are searched by angle the same way.
///
/// `grid_step` is the coarse angular spacing in radians.
pub fn reference_solve_tiny(inst: &CsInstance, grid_step: f64) -> Result<ReferenceSolution> {
    let (m, n) = (inst.m, inst.n);
    if n > 3 || m > 2 || m == 0 {
        return Err(Error::Oracle(format!("tiny reference needs n <= 3, 1 <= m <= 2, got ({m},{n})")));
    }
    if !(grid_step > 0.0) {
        return Err(Error::Oracle(format!("grid step must be > 0, got {grid_step}")));
    }
    let a: Vec<Vec<f64>> = (0..m).map(|i| (0..n).map(|j| inst.a.entry(i, j)).collect()).collect();
    let b = &inst.b;
    let (sigma, p) = (inst.sigma, inst.p);
    let q = p / (p - 1.0);
    let pi = std::f64::consts::PI;

    // ℓ₁-minimal basic solution of Ax = rhs over all m-column supports
    let supports: Vec<Vec<usize>> = if m == 1 {
        (0..n).map(|j| vec![j]).collect()
    } else {
        (0..n).flat_map(|j| (j + 1..n).map(move |k| vec![j, k])).collect()
    };
    let basic_l1 = |rhs: &[f64]| -> Option<(Vec<f64>, f64)> {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for s in &supports {
            let mut x = vec![0.0; n];
            if m == 1 {
                let a0 = a[0][s[0]];
                if a0.abs() <= 1e-14 {
                    continue;
                }
                x[s[0]] = rhs[0] / a0;
            } else {
                let (a00, a01, a10, a11) = (a[0][s[0]], a[0][s[1]], a[1][s[0]], a[1][s[1]]);
                let det = a00 * a11 - a01 * a10;
                if det.abs() <= 1e-14 {
                    continue;
                }
                x[s[0]] = (a11 * rhs[0] - a01 * rhs[1]) / det;
                x[s[1]] = (a00 * rhs[1] - a10 * rhs[0]) / det;
            }
            let l1: f64 = x.iter().map(|v| v.abs()).sum();
            if best.as_ref().is_none_or(|(_, v)| l1 < *v) {
                best = Some((x, l1));
            }
        }
        best
    };
    let circle = |theta: f64| -> Vec<f64> {
        let d = [theta.cos(), theta.sin()];
        let nd = lp_norm_plain(&d, p);
        d.iter().map(|v| v / nd).collect()
    };

    let (x_star, val) = if lp_norm_plain(b, p) <= sigma {
        (vec![0.0; n], 0.0)
    } else if m == 1 {
        [sigma, -sigma]
            .into_iter()
            .filter_map(|w| basic_l1(&[b[0] + w]))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .ok_or_else(|| Error::Oracle("A has no nonzero column".into()))?
    } else {
        let rhs = |theta: f64| -> Vec<f64> { b.iter().zip(circle(theta)).map(|(bi, wi)| bi + sigma * wi).collect() };
        let eval = |t: &[f64]| basic_l1(&rhs(t[0])).map(|(_, v)| v);
        let (t, _) = grid_refine_min(&[0.0], pi, grid_step, REFERENCE_ROUNDS, REFERENCE_KEEP, eval)
            .ok_or_else(|| Error::Oracle("A is not full row rank".into()))?;
        basic_l1(&rhs(t[0])).expect("support found above")
    };

    // along direction d the largest feasible scale is 1/‖Aᵀd‖_∞
    let ray_value = |d: &[f64]| -> Option<(Vec<f64>, f64)> {
        let atd = (0..n).map(|c| (0..m).map(|i| a[i][c] * d[i]).sum::<f64>().abs()).fold(0.0, f64::max);
        if atd <= 1e-14 {
            return None;
        }
        let lam: Vec<f64> = d.iter().map(|v| v / atd).collect();
        let bl: f64 = b.iter().zip(&lam).map(|(x, y)| x * y).sum();
        let value = -bl - sigma * lp_norm_plain(&lam, q);
        Some((lam, value))
    };
    let boundary = if m == 1 {
        [vec![1.0], vec![-1.0]]
            .iter()
            .filter_map(|d| ray_value(d))
            .max_by(|x, y| x.1.total_cmp(&y.1))
    } else {
        let eval = |t: &[f64]| ray_value(&[t[0].cos(), t[0].sin()]).map(|(_, v)| -v);
        grid_refine_min(&[0.0], pi, grid_step, REFERENCE_ROUNDS, REFERENCE_KEEP, eval)
            .and_then(|(t, _)| ray_value(&[t[0].cos(), t[0].sin()]))
    };
    let (lambda_bar, dual_val) = match boundary {
        Some((lam, v)) if v > 0.0 => (lam, v),
        _ => (vec![0.0; m], 0.0),
    };

    Ok(ReferenceSolution {
        x_star,
        val,
        dual_val,
        lambda_bar,
        method: "angular-grid-refine",
        tolerance: val - dual_val,
    })
}

/// Eigenvalues of a symmetric matrix (row-major, `n × n`) by cyclic Jacobi
/// rotations, ascending.
pub fn jacobi_eigenvalues(mat: &[f64], n: usize) -> Vec<f64> {
    let mut a = mat.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `E|X|^p` under the density `∝ exp(−|x|^p)` by composite Simpson on
/// `[0, 40]` (the density is symmetric).
pub fn ggd_abs_moment_quadrature(p: f64) -> f64 {
    let upper = 40.0;
    let intervals = 400_000;
    let h = upper / intervals as f64;
    let simpson = |f: &dyn Fn(f64) -> f64| {
        let mut s = f(0.0) + f(upper);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    };
    let mass = simpson(&|x: f64| (-x.powf(p)).exp());
    let moment = simpson(&|x: f64| x.powf(p) * (-x.powf(p)).exp());
    moment / mass
}

/// Largest root of `−(β/2)s² + ‖λ̄‖s + τ = 0` by bisection.
pub fn quadratic_root_bisection(beta: f64, lambda_norm: f64, tau: f64) -> f64 {
    let f = |s: f64| -0.5 * beta * s * s + lambda_norm * s + tau;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_on_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let ev = jacobi_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_moment_signature() {
        for p in [1.1, 1.5, 2.0] {
            assert!((ggd_abs_moment_quadrature(p) - 1.0 / p).abs() < 1e-8, "p={p}");
        }
    }

    #[test]
    fn prox_grid_example() {
        let out = prox_l1_box_grid(&[2.0, -0.2, 0.6], 0.5, 1.0, 1e-5);
        for (o, e) in out.iter().zip([1.0, 0.0, 0.1]) {
            assert!((o - e).abs() < 2e-5);
        }
    }

    #[test]
    fn lo_bruteforce_degenerate_direction() {
        let u = lo_bruteforce(&[0.0, 0.0], 1.0, 1.5, 0.05);
        assert!((lp_norm_plain(&u, 1.5) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn tiny_scalar_reference() {
        let inst = CsInstance::from_parts(&[vec![1.0]], vec![1.0], 0.4, 2.0).unwrap();
        let r = reference_solve_tiny(&inst, 0.1).unwrap();
        assert!((r.x_star[0] - 0.6).abs() < 1e-6, "{:?}", r.x_star);
        assert!((r.val - 0.6).abs() < 1e-6);
        assert!(r.tolerance >= 0.0 && r.tolerance <= 1e-5, "{}", r.tolerance);

        let inst = CsInstance::from_parts(&[vec![1.0]], vec![1.0], 1.2, 2.0).unwrap();
        let r = reference_solve_tiny(&inst, 0.1).unwrap();
        assert_eq!(r.val, 0.0);
        assert_eq!(r.x_star, vec![0.0]);
    }

    #[test]
    fn bisection_root() {
        // −s²/2 + s + 1.5 = 0 → s = 3
        assert!((quadratic_root_bisection(1.0, 1.0, 1.5) - 3.0).abs() < 1e-12);
    }
}
