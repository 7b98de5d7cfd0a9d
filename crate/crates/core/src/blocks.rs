//! Problem building blocks.
//!
//! `f = f1 + f2` and `g = g1 + g2`, where `f1`, `g1` are [`SmoothBlock`]s,
//! `f2` is a [`ProxBlock`] and `g2` is an [`LoBlock`]. The domains of `f`
//! and `g` are the domains of `f2` and `g2` and must be bounded.

use std::fmt::Debug;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{check_dim, Error, Result};
use crate::linmap::LinearMap;
use crate::vecops::{abs_pow, dot, norm1, norm2, norm_inf, norm_p};

/// Relative slack used by indicator evaluations and membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Convex function with Hölder-continuous gradient:
/// `‖∇h(x) − ∇h(y)‖ ≤ M‖x − y‖^μ`, `μ ∈ (0, 1]`.
pub trait SmoothBlock: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    fn grad_into(&self, x: &[f64], out: &mut [f64]);
    fn holder_exponent(&self) -> f64;
    fn holder_constant(&self) -> f64;

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.grad_into(x, &mut g);
        g
    }
}

/// Proper closed convex function whose proximal mapping
/// `argmin_x (1/2γ)‖x − u‖² + h(x)` is cheap. `γ = 0` means projection onto
/// the domain.
pub trait ProxBlock: Debug + Send + Sync {
    fn dim(&self) -> usize;
    /// `+∞` outside the domain.
    fn eval(&self, x: &[f64]) -> f64;
    fn prox_into(&self, u: &[f64], gamma: f64, out: &mut [f64]);
    fn contains(&self, x: &[f64]) -> bool;
    /// `sup ‖x‖₂` over the domain.
    fn domain_radius(&self) -> f64;
    /// Upper bound on `sup ‖x₁ − x₂‖₂` over the domain.
    fn domain_diameter(&self) -> f64;

    fn prox(&self, u: &[f64], gamma: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.prox_into(u, gamma, &mut out);
        out
    }
}

/// Proper closed convex function with a cheap linear oracle
/// `argmin_y ⟨v, y⟩ + h(y)`.
pub trait LoBlock: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64]) -> f64;
    fn lo_into(&self, v: &[f64], out: &mut [f64]);
    fn contains(&self, y: &[f64]) -> bool;
    fn domain_radius(&self) -> f64;
    fn domain_diameter(&self) -> f64;

    fn lo(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.lo_into(v, &mut out);
        out
    }
}

// ---------------------------------------------------------------------------
// closed forms

/// Proximal mapping of `γ‖·‖₁ + δ_{‖·‖_∞ ≤ R}`: soft-thresholding followed by
/// clipping to `[−R, R]`.
pub fn prox_l1_box(u: &[f64], gamma: f64, radius: f64) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    prox_l1_box_into(u, gamma, radius, &mut out);
    out
}

pub fn prox_l1_box_into(u: &[f64], gamma: f64, radius: f64, out: &mut [f64]) {
    for (o, &ui) in out.iter_mut().zip(u) {
        let shrunk = (ui.abs() - gamma).max(0.0);
        *o = (ui.signum() * shrunk).clamp(-radius, radius);
    }
}

/// Linear oracle of the ℓ_p ball of radius `σ`, `p ∈ (1, 2]`:
/// `−σ sign(v)∘|v|^{q−1} / ‖v‖_q^{q/p}` with `q = p/(p−1)`, and `0` at `v = 0`.
pub fn lo_lp_ball(v: &[f64], sigma: f64, p: f64) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    lo_lp_ball_into(v, sigma, p, &mut out);
    out
}

pub fn lo_lp_ball_into(v: &[f64], sigma: f64, p: f64, out: &mut [f64]) {
    let scale = norm_inf(v);
    if scale == 0.0 {
        out.fill(0.0);
        return;
    }
    let q = conjugate_exponent(p);
    // direction only matters, so work with v/‖v‖_∞ ∈ [−1, 1]
    let nq = norm_p_scaled(v, scale, q);
    let denom = abs_pow(nq, q / p);
    for (o, &vi) in out.iter_mut().zip(v) {
        let w = vi / scale;
        *o = -sigma * w.signum() * abs_pow(w, q - 1.0) / denom;
    }
}

fn norm_p_scaled(v: &[f64], scale: f64, q: f64) -> f64 {
    let s: f64 = v.iter().map(|x| abs_pow(x / scale, q)).sum();
    abs_pow(s, 1.0 / q)
}

/// `q = p/(p−1)`.
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Upper bound on the ℓ₂ diameter of the ℓ_p ball of radius `σ` in `R^n`.
pub fn lp_ball_diameter(sigma: f64, p: f64, n: usize) -> f64 {
    2.0 * sigma * (n as f64).powf((0.5 - 1.0 / p).max(0.0))
}

// ---------------------------------------------------------------------------
// smooth blocks

#[derive(Debug, Clone)]
pub struct ZeroSmooth {
    dim: usize,
}

pub fn zero_smooth_block(dim: usize) -> ZeroSmooth {
    ZeroSmooth { dim }
}

impl SmoothBlock for ZeroSmooth {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn grad_into(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn holder_exponent(&self) -> f64 {
        1.0
    }
    fn holder_constant(&self) -> f64 {
        0.0
    }
}

/// `Σ |x_i|^{1+μ} / (1+μ)`, gradient `sign(x)∘|x|^μ`.
#[derive(Debug, Clone)]
pub struct PowerSmooth {
    dim: usize,
    mu: f64,
    constant: f64,
}

/// Samples used when estimating the Hölder constant of [`PowerSmooth`].
pub const HOLDER_SAMPLES: usize = 20_000;
pub const HOLDER_INFLATION: f64 = 1.5;

/// Power block on `R^dim` whose Hölder constant is estimated over the box
/// `[−radius, radius]^dim` and inflated by [`HOLDER_INFLATION`].
pub fn power_smooth_block(mu: f64, dim: usize, radius: f64) -> Result<PowerSmooth> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidParameter(format!("Hölder exponent must lie in (0,1], got {mu}")));
    }
    if dim == 0 || !(radius > 0.0) {
        return Err(Error::InvalidParameter("power block needs dim > 0 and radius > 0".into()));
    }
    let mut block = PowerSmooth {
        dim,
        mu,
        constant: 0.0,
    };
    block.constant = HOLDER_INFLATION * estimate_holder_constant(&block, radius, HOLDER_SAMPLES, 0x401d_e4);
    Ok(block)
}

impl PowerSmooth {
    pub fn with_constant(dim: usize, mu: f64, constant: f64) -> Self {
        PowerSmooth { dim, mu, constant }
    }
}

impl SmoothBlock for PowerSmooth {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| abs_pow(*v, 1.0 + self.mu)).sum::<f64>() / (1.0 + self.mu)
    }
    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = v.signum() * abs_pow(*v, self.mu);
        }
    }
    fn holder_exponent(&self) -> f64 {
        self.mu
    }
    fn holder_constant(&self) -> f64 {
        self.constant
    }
}

/// Largest observed `‖∇h(x) − ∇h(y)‖ / ‖x − y‖^μ` over seeded pairs in the
/// box `[−radius, radius]^dim`. Pairs are a mix of independent uniform draws,
/// sign-reflected pairs and close pairs.
pub fn estimate_holder_constant(block: &dyn SmoothBlock, radius: f64, samples: usize, seed: u64) -> f64 {
    let n = block.dim();
    let mu = block.holder_exponent();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    for s in 0..samples {
        let scale = radius * rng.gen::<f64>().powi(2);
        let x: Vec<f64> = (0..n).map(|_| scale * (2.0 * rng.gen::<f64>() - 1.0)).collect();
        let y: Vec<f64> = match s % 3 {
            0 => (0..n).map(|_| radius * (2.0 * rng.gen::<f64>() - 1.0)).collect(),
            1 => x.iter().map(|v| -v).collect(),
            _ => {
                let h = radius * 1e-3 * rng.gen::<f64>();
                x.iter().map(|v| (v + h * (2.0 * rng.gen::<f64>() - 1.0)).clamp(-radius, radius)).collect()
            }
        };
        let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if d == 0.0 {
            continue;
        }
        block.grad_into(&x, &mut gx);
        block.grad_into(&y, &mut gy);
        let gd: f64 = gx.iter().zip(&gy).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        best = best.max(gd / abs_pow(d, mu));
    }
    best
}

/// `½‖Qx − r‖²`, Lipschitz gradient with constant `λ_max(QᵀQ)`.
#[derive(Debug, Clone)]
pub struct QuadraticSmooth {
    q: LinearMap,
    r: Vec<f64>,
    constant: f64,
}

pub fn quadratic_smooth_block(q: LinearMap, r: Vec<f64>) -> Result<QuadraticSmooth> {
    check_dim("quadratic block offset", q.out_dim(), r.len())?;
    let constant = q.lambda_upper();
    Ok(QuadraticSmooth { q, r, constant })
}

impl SmoothBlock for QuadraticSmooth {
    fn dim(&self) -> usize {
        self.q.in_dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let qx = self.q.apply(x).expect("dimension checked by caller");
        0.5 * qx.iter().zip(&self.r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    }
    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        let mut res = self.q.apply(x).expect("dimension checked by caller");
        res.iter_mut().zip(&self.r).for_each(|(a, b)| *a -= b);
        self.q.adjoint_apply_into(&res, out).expect("dimension checked by caller");
    }
    fn holder_exponent(&self) -> f64 {
        1.0
    }
    fn holder_constant(&self) -> f64 {
        self.constant
    }
}

// ---------------------------------------------------------------------------
// prox blocks

/// `w‖x‖₁ + δ_{‖x‖_∞ ≤ R}`. With `w = 0` this is the box indicator.
#[derive(Debug, Clone)]
pub struct L1BoxProx {
    dim: usize,
    weight: f64,
    radius: f64,
}

impl L1BoxProx {
    pub fn new(dim: usize, weight: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || weight < 0.0 || dim == 0 {
            return Err(Error::InvalidParameter("l1-box block needs dim > 0, R > 0, w >= 0".into()));
        }
        Ok(L1BoxProx { dim, weight, radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl ProxBlock for L1BoxProx {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            self.weight * norm1(x)
        } else {
            f64::INFINITY
        }
    }
    fn prox_into(&self, u: &[f64], gamma: f64, out: &mut [f64]) {
        prox_l1_box_into(u, gamma * self.weight, self.radius, out);
    }
    fn contains(&self, x: &[f64]) -> bool {
        norm_inf(x) <= self.radius * (1.0 + MEMBERSHIP_TOL)
    }
    fn domain_radius(&self) -> f64 {
        self.radius * (self.dim as f64).sqrt()
    }
    fn domain_diameter(&self) -> f64 {
        2.0 * self.domain_radius()
    }
}

/// Indicator of a single point; the prox is constant.
#[derive(Debug, Clone)]
pub struct PointProx {
    point: Vec<f64>,
}

impl PointProx {
    pub fn new(point: Vec<f64>) -> Self {
        PointProx { point }
    }
}

impl ProxBlock for PointProx {
    fn dim(&self) -> usize {
        self.point.len()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox_into(&self, _u: &[f64], _gamma: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.point);
    }
    fn contains(&self, x: &[f64]) -> bool {
        x == self.point.as_slice()
    }
    fn domain_radius(&self) -> f64 {
        norm2(&self.point)
    }
    fn domain_diameter(&self) -> f64 {
        0.0
    }
}

// ---------------------------------------------------------------------------
// linear-oracle blocks

/// Indicator of `{‖y‖_p ≤ σ}`, `p ∈ (1, 2]`.
#[derive(Debug, Clone)]
pub struct LpBallLo {
    dim: usize,
    sigma: f64,
    p: f64,
}

impl LpBallLo {
    pub fn new(dim: usize, sigma: f64, p: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(p > 1.0 && p <= 2.0) || dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "lp ball needs dim > 0, sigma > 0, p in (1,2]; got sigma={sigma}, p={p}"
            )));
        }
        Ok(LpBallLo { dim, sigma, p })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl LoBlock for LpBallLo {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, y: &[f64]) -> f64 {
        if self.contains(y) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn lo_into(&self, v: &[f64], out: &mut [f64]) {
        lo_lp_ball_into(v, self.sigma, self.p, out);
    }
    fn contains(&self, y: &[f64]) -> bool {
        norm_p(y, self.p) <= self.sigma * (1.0 + MEMBERSHIP_TOL)
    }
    fn domain_radius(&self) -> f64 {
        0.5 * lp_ball_diameter(self.sigma, self.p, self.dim)
    }
    fn domain_diameter(&self) -> f64 {
        lp_ball_diameter(self.sigma, self.p, self.dim)
    }
}

#[derive(Debug, Clone)]
pub struct PointLo {
    point: Vec<f64>,
}

impl PointLo {
    pub fn new(point: Vec<f64>) -> Self {
        PointLo { point }
    }
}

impl LoBlock for PointLo {
    fn dim(&self) -> usize {
        self.point.len()
    }
    fn eval(&self, y: &[f64]) -> f64 {
        if self.contains(y) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn lo_into(&self, _v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.point);
    }
    fn contains(&self, y: &[f64]) -> bool {
        // convex combinations of the point with itself may round
        y.iter()
            .zip(&self.point)
            .all(|(a, b)| (a - b).abs() <= MEMBERSHIP_TOL * (1.0 + b.abs()))
    }
    fn domain_radius(&self) -> f64 {
        norm2(&self.point)
    }
    fn domain_diameter(&self) -> f64 {
        0.0
    }
}

// ---------------------------------------------------------------------------
// problem

/// `min f1(x) + f2(x) + g1(y) + g2(y)  s.t.  Ax + By = c` together with the
/// derived constants the iteration and the certificates need.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub f1: Arc<dyn SmoothBlock>,
    pub f2: Arc<dyn ProxBlock>,
    pub g1: Arc<dyn SmoothBlock>,
    pub g2: Arc<dyn LoBlock>,
    pub a: LinearMap,
    pub b: LinearMap,
    pub c: Vec<f64>,
    /// Upper estimate of `λ_max(AᵀA)`.
    pub lambda_a: f64,
    /// Upper estimate of `λ_max(BᵀB)`.
    pub lambda_b: f64,
    pub d_f: f64,
    pub d_g: f64,
    /// Upper bound on `sup |⟨Ax, By⟩|` over `dom f × dom g`.
    pub d2_upper: f64,
}

impl ProblemSpec {
    pub fn new(
        f1: Arc<dyn SmoothBlock>,
        f2: Arc<dyn ProxBlock>,
        g1: Arc<dyn SmoothBlock>,
        g2: Arc<dyn LoBlock>,
        a: LinearMap,
        b: LinearMap,
        c: Vec<f64>,
    ) -> Result<Self> {
        check_dim("f1 vs f2", f2.dim(), f1.dim())?;
        check_dim("A input vs f", f2.dim(), a.in_dim())?;
        check_dim("g1 vs g2", g2.dim(), g1.dim())?;
        check_dim("B input vs g", g2.dim(), b.in_dim())?;
        check_dim("B output vs A output", a.out_dim(), b.out_dim())?;
        check_dim("c vs A output", a.out_dim(), c.len())?;
        let lambda_a = a.lambda_upper();
        let lambda_b = b.lambda_upper();
        let d_f = f2.domain_diameter();
        let d_g = g2.domain_diameter();
        if !d_f.is_finite() || !d_g.is_finite() {
            return Err(Error::InvalidParameter("domains of f and g must be bounded".into()));
        }
        let d2_upper = lambda_a.sqrt() * lambda_b.sqrt() * f2.domain_radius() * g2.domain_radius();
        Ok(ProblemSpec {
            f1,
            f2,
            g1,
            g2,
            a,
            b,
            c,
            lambda_a,
            lambda_b,
            d_f,
            d_g,
            d2_upper,
        })
    }

    pub fn x_dim(&self) -> usize {
        self.a.in_dim()
    }

    pub fn y_dim(&self) -> usize {
        self.b.in_dim()
    }

    pub fn mu(&self) -> f64 {
        self.f1.holder_exponent()
    }

    pub fn nu(&self) -> f64 {
        self.g1.holder_exponent()
    }

    pub fn m_f(&self) -> f64 {
        self.f1.holder_constant()
    }

    pub fn m_g(&self) -> f64 {
        self.g1.holder_constant()
    }

    pub fn f_value(&self, x: &[f64]) -> f64 {
        self.f1.eval(x) + self.f2.eval(x)
    }

    pub fn g_value(&self, y: &[f64]) -> f64 {
        self.g1.eval(y) + self.g2.eval(y)
    }

    pub fn objective(&self, x: &[f64], y: &[f64]) -> f64 {
        self.f_value(x) + self.g_value(y)
    }

    /// `Ax + By − c`.
    pub fn residual(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.a.apply(x)?;
        let by = self.b.apply(y)?;
        for ((ri, bi), ci) in r.iter_mut().zip(&by).zip(&self.c) {
            *ri += bi - ci;
        }
        Ok(r)
    }

    pub fn feasibility(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(norm2(&self.residual(x, y)?))
    }

    /// `f(x) + g(y) + (β/2)‖Ax + By − c‖²`.
    pub fn penalty_value(&self, x: &[f64], y: &[f64], beta: f64) -> Result<f64> {
        let r = self.residual(x, y)?;
        Ok(self.objective(x, y) + 0.5 * beta * dot(&r, &r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn prox_examples() {
        assert_eq!(prox_l1_box(&[0.0, 0.0], 0.3, 1.0), vec![0.0, 0.0]);
        // per-coordinate grid minimization of (1/2γ)(x−u)² + |x| on [−1,1]
        // gives (1, 0, 0.1) at grid step 1e-5
        let out = prox_l1_box(&[2.0, -0.2, 0.6], 0.5, 1.0);
        assert!(close(&out, &[1.0, 0.0, 0.1], 1e-12), "{out:?}");
        assert_eq!(prox_l1_box(&[0.3], 0.0, 0.2), vec![0.2]);
    }

    #[test]
    fn lo_examples() {
        assert_eq!(lo_lp_ball(&[0.0, 0.0], 1.0, 1.5), vec![0.0, 0.0]);
        assert!(close(&lo_lp_ball(&[3.0, 4.0], 1.0, 2.0), &[-0.6, -0.8], 1e-15));
        let c = 2f64.powf(1.0 / 3.0);
        assert!(close(&lo_lp_ball(&[1.0, 1.0], 2.0, 1.5), &[-c, -c], 1e-12));
    }

    #[test]
    fn lo_survives_tiny_and_huge_inputs() {
        for s in [1e-300, 1e-150, 1.0, 1e150, 1e300] {
            let u = lo_lp_ball(&[s, -2.0 * s, 0.0], 1.3, 1.1);
            assert!(u.iter().all(|v| v.is_finite()));
            assert!((norm_p(&u, 1.1) - 1.3).abs() < 1e-12);
        }
    }

    #[test]
    fn power_block_examples() {
        let b = PowerSmooth::with_constant(2, 1.0, 1.0);
        assert!((b.eval(&[1.0, -2.0]) - 2.5).abs() < 1e-15);
        assert_eq!(b.grad(&[1.0, -2.0]), vec![1.0, -2.0]);
        let h = PowerSmooth::with_constant(2, 0.5, 1.0);
        assert!((h.eval(&[4.0, 0.0]) - 16.0 / 3.0).abs() < 1e-13);
        assert!(close(&h.grad(&[4.0, 0.0]), &[2.0, 0.0], 1e-14));
        assert!(power_smooth_block(0.0, 2, 1.0).is_err());
        assert!(power_smooth_block(1.5, 2, 1.0).is_err());
    }

    #[test]
    fn quadratic_block_examples() {
        let b = quadratic_smooth_block(LinearMap::identity(2), vec![0.0, 0.0]).unwrap();
        assert!((b.eval(&[1.0, 1.0]) - 1.0).abs() < 1e-15);
        assert_eq!(b.grad(&[1.0, 1.0]), vec![1.0, 1.0]);
        let z = quadratic_smooth_block(LinearMap::zero(2, 2), vec![0.0, 0.0]).unwrap();
        assert_eq!(z.eval(&[3.0, 1.0]), 0.0);
        assert_eq!(z.grad(&[3.0, 1.0]), vec![0.0, 0.0]);
        assert_eq!(z.holder_constant(), 0.0);
        let d = quadratic_smooth_block(LinearMap::diag(&[1.0, 2.0]), vec![0.0, 0.0]).unwrap();
        assert!((d.holder_constant() - 4.0).abs() < 1e-5);
        assert!(d.holder_constant() >= 4.0);
        assert!(quadratic_smooth_block(LinearMap::identity(2), vec![0.0]).is_err());
    }

    #[test]
    fn zero_block_descent_lemma_is_tight() {
        let z = zero_smooth_block(3);
        let x = [1.0, -2.0, 0.5];
        let y = [0.0, 4.0, -1.0];
        assert_eq!(z.eval(&x), 0.0);
        assert_eq!(z.grad(&x), vec![0.0; 3]);
        let slack = z.eval(&x) + dot(&z.grad(&x), &crate::vecops::sub(&y, &x)) - z.eval(&y);
        assert_eq!(slack, 0.0);
        assert_eq!(z.holder_constant(), 0.0);
        assert_eq!(z.holder_exponent(), 1.0);
    }

    #[test]
    fn diameters() {
        let f = L1BoxProx::new(4, 1.0, 2.0).unwrap();
        assert!((f.domain_diameter() - 8.0).abs() < 1e-15);
        let g = LpBallLo::new(9, 1.5, 1.5).unwrap();
        assert!((g.domain_diameter() - 3.0).abs() < 1e-15);
        assert!((lp_ball_diameter(1.0, 4.0, 16) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn problem_spec_validates_dims() {
        let ok = ProblemSpec::new(
            Arc::new(zero_smooth_block(2)),
            Arc::new(L1BoxProx::new(2, 1.0, 1.0).unwrap()),
            Arc::new(zero_smooth_block(3)),
            Arc::new(LpBallLo::new(3, 1.0, 2.0).unwrap()),
            LinearMap::zero(2, 3),
            LinearMap::negated_identity(3),
            vec![0.0; 3],
        );
        assert!(ok.is_ok());
        let bad = ProblemSpec::new(
            Arc::new(zero_smooth_block(2)),
            Arc::new(L1BoxProx::new(2, 1.0, 1.0).unwrap()),
            Arc::new(zero_smooth_block(3)),
            Arc::new(LpBallLo::new(3, 1.0, 2.0).unwrap()),
            LinearMap::zero(2, 3),
            LinearMap::negated_identity(3),
            vec![0.0; 2],
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
    }
}
