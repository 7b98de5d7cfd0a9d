//! Fenchel dual of `min ‖x‖₁ s.t. ‖Ax − b‖_p ≤ σ`:
//!
//! ```text
//!     max  −⟨b, λ⟩ − σ‖λ‖_q    s.t.  ‖Aᵀλ‖_∞ ≤ 1,    q = p/(p−1)
//! ```
//!
//! plus the dual point and relative gap used to stop the iteration on
//! compressed-sensing instances.

use crate::blocks::{conjugate_exponent, ProblemSpec};
use crate::error::{check_dim, Error, Result};
use crate::linmap::LinearMap;
use crate::solver::{Monitor, SolverState, StepReport, StopReason};
use crate::vecops::{dist2, dot, norm1, norm_inf, norm_p};

#[derive(Debug, Clone)]
pub struct CsDualContext {
    pub a: LinearMap,
    pub b: Vec<f64>,
    pub sigma: f64,
    pub p: f64,
    pub q: f64,
}

impl CsDualContext {
    pub fn new(a: LinearMap, b: Vec<f64>, sigma: f64, p: f64) -> Result<Self> {
        check_dim("dual context b", a.out_dim(), b.len())?;
        if !(sigma > 0.0) || !(p > 1.0 && p <= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "dual context needs sigma > 0 and p in (1,2]; got {sigma}, {p}"
            )));
        }
        Ok(CsDualContext {
            a,
            b,
            sigma,
            p,
            q: conjugate_exponent(p),
        })
    }

    /// `−⟨b, λ⟩ − σ‖λ‖_q`, regardless of feasibility.
    pub fn dual_value(&self, lambda: &[f64]) -> f64 {
        -dot(&self.b, lambda) - self.sigma * norm_p(lambda, self.q)
    }

    /// `‖Aᵀλ‖_∞`; the dual constraint is this being at most one.
    pub fn dual_infeasibility(&self, lambda: &[f64]) -> Result<f64> {
        Ok(norm_inf(&self.a.adjoint_apply(lambda)?))
    }

    /// Dual point from `λ̃ = β(Ax − b − y)`, rescaled onto `‖Aᵀλ‖_∞ ≤ 1`.
    pub fn feasible_dual_point(&self, x: &[f64], y: &[f64], beta: f64) -> Result<Vec<f64>> {
        check_dim("dual point y", self.b.len(), y.len())?;
        let mut r = self.a.apply(x)?;
        for ((ri, bi), yi) in r.iter_mut().zip(&self.b).zip(y) {
            *ri -= bi + yi;
        }
        self.feasible_dual_point_from_residual(&r, beta)
    }

    /// Same as [`CsDualContext::feasible_dual_point`] given `r = Ax − b − y`.
    pub fn feasible_dual_point_from_residual(&self, r: &[f64], beta: f64) -> Result<Vec<f64>> {
        check_dim("dual point residual", self.b.len(), r.len())?;
        let lambda: Vec<f64> = r.iter().map(|v| beta * v).collect();
        let s = self.dual_infeasibility(&lambda)?;
        // Aᵀλ̃ = 0 with λ̃ ≠ 0 is impossible for full-row-rank A; leave λ̃ as is
        if s <= 1.0 || s == 0.0 {
            Ok(lambda)
        } else {
            Ok(lambda.into_iter().map(|v| v / s).collect())
        }
    }

    /// Relative duality gap between `‖x‖₁` and the dual value at `λ`.
    pub fn gap_r(&self, x: &[f64], lambda: &[f64]) -> f64 {
        let primal = norm1(x);
        let dual_part = dot(&self.b, lambda) + self.sigma * norm_p(lambda, self.q);
        (primal + dual_part).abs() / primal.max(dual_part.abs()).max(1.0)
    }

    /// `(‖Ax − b‖_p − σ)₊`.
    pub fn feasibility_violation(&self, x: &[f64]) -> Result<f64> {
        let mut r = self.a.apply(x)?;
        r.iter_mut().zip(&self.b).for_each(|(ri, bi)| *ri -= bi);
        Ok((norm_p(&r, self.p) - self.sigma).max(0.0))
    }
}

/// Monitor for reformulated compressed-sensing problems (`B = −I`, `c = b`).
///
/// After the step `t → t+1` it builds `λᵗ` from `(xᵗ, yᵗ, β_t)`, reports
/// `gap_r(t)` with `x^{t+1}` and `dual_value(λᵗ)`, and requests a stop once
/// `gap_r(t) ≤ gap_tol` and `‖Ax^{t+1} − b‖_p − σ ≤ feas_tol_rel·σ`.
pub struct CsMonitor {
    pub ctx: CsDualContext,
    pub gap_tol: f64,
    pub feas_tol_rel: f64,
    /// When false the monitor only reports.
    pub stop_enabled: bool,
    pub reference: Option<(Vec<f64>, Vec<f64>)>,
    /// `‖Ax^{t+1} − b‖_p − σ` from the latest step (may be negative).
    pub last_feas_excess: f64,
}

impl CsMonitor {
    pub fn new(ctx: CsDualContext, gap_tol: f64, feas_tol_rel: f64) -> Self {
        CsMonitor {
            ctx,
            gap_tol,
            feas_tol_rel,
            stop_enabled: true,
            reference: None,
            last_feas_excess: f64::NAN,
        }
    }
}

impl Monitor for CsMonitor {
    fn after_step(&mut self, _spec: &ProblemSpec, prev: &SolverState, next: &SolverState) -> Result<StepReport> {
        // residual = Ax − y − b
        let lambda = self.ctx.feasible_dual_point_from_residual(&prev.residual, prev.beta)?;
        let gap = self.ctx.gap_r(&next.x, &lambda);
        let dual = self.ctx.dual_value(&lambda);
        let axb: Vec<f64> = next.residual.iter().zip(&next.y).map(|(r, y)| r + y).collect();
        let excess = norm_p(&axb, self.ctx.p) - self.ctx.sigma;
        self.last_feas_excess = excess;
        let stop = (self.stop_enabled && gap <= self.gap_tol && excess <= self.feas_tol_rel * self.ctx.sigma)
            .then_some(StopReason::GapAndFeasibility);
        let dist_ref = self
            .reference
            .as_ref()
            .map(|(xr, yr)| (dist2(&next.x, xr).powi(2) + dist2(&next.y, yr).powi(2)).sqrt());
        Ok(StepReport {
            gap_r: Some(gap),
            dual: Some(dual),
            dist_ref,
            stop,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(a: LinearMap, b: Vec<f64>, sigma: f64, p: f64) -> CsDualContext {
        CsDualContext::new(a, b, sigma, p).unwrap()
    }

    #[test]
    fn dual_value_examples() {
        let c = ctx(LinearMap::identity(2), vec![1.0, 0.0], 1.0, 2.0);
        assert_eq!(c.dual_value(&[0.0, 0.0]), 0.0);
        assert_eq!(c.dual_value(&[-1.0, 0.0]), 0.0);
        assert!((c.q * (c.p - 1.0) - c.p).abs() < 1e-12);
    }

    #[test]
    fn dual_point_examples() {
        // Ax − b − y = 0 → zero
        let c = ctx(LinearMap::identity(2), vec![1.0, 2.0], 0.5, 1.5);
        assert_eq!(c.feasible_dual_point(&[1.0, 2.0], &[0.0, 0.0], 3.0).unwrap(), vec![0.0, 0.0]);
        // ‖Aᵀλ̃‖_∞ = 4 → scaled by 1/4
        let lam = c.feasible_dual_point_from_residual(&[2.0, -1.0], 2.0).unwrap();
        assert_eq!(lam, vec![1.0, -0.5]);
        assert_eq!(c.dual_infeasibility(&lam).unwrap(), 1.0);
        // ‖Aᵀλ̃‖_∞ = 0.5 → unchanged
        let lam = c.feasible_dual_point_from_residual(&[0.25, 0.1], 2.0).unwrap();
        assert_eq!(lam, vec![0.5, 0.2]);
    }

    #[test]
    fn gap_examples() {
        let c = ctx(LinearMap::identity(1), vec![1.0], 0.9, 2.0);
        assert_eq!(c.gap_r(&[0.0], &[0.0]), 0.0);
        // ‖x‖₁ = 2, dual value 1 − 0.9 = 0.1
        let g = c.gap_r(&[2.0], &[-1.0]);
        assert!((g - 0.95).abs() < 1e-14);
        assert!(c.gap_r(&[0.1], &[-1.0]) < 1e-14);
    }

    #[test]
    fn rejects_bad_context() {
        assert!(CsDualContext::new(LinearMap::identity(2), vec![1.0], 1.0, 2.0).is_err());
        assert!(CsDualContext::new(LinearMap::identity(1), vec![1.0], 0.0, 2.0).is_err());
        assert!(CsDualContext::new(LinearMap::identity(1), vec![1.0], 1.0, 1.0).is_err());
    }
}
