//! The single-loop proximal-conditional-gradient penalty iteration.
//!
//! One iteration at index `t`:
//!
//! ```text
//!     R      = A x + B y − c
//!     x⁺     = prox_{f2 / L}( x − (∇f1(x) + β_t A*R) / L ),   L = H_t + λ_A β_t
//!     R̃      = A x⁺ + B y − c
//!     u      ∈ argmin_u ⟨∇g1(y) + β_t B*R̃, u⟩ + g2(u)
//!     y⁺     = y + α_t (u − y)
//! ```
//!
//! with `α_t = 2/(t+2)`, `β_t = β₀(t+1)^δ`, `H_0 = H₀` and
//! `H_t = max{H₀, 2M_f/(μ+1)}·t^{1−μ}` for `t ≥ 1`.

use std::io::Write;

use crate::blocks::ProblemSpec;
use crate::error::{check_dim, Error, Result};
use crate::vecops::{all_finite, dist2, norm2};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub beta0: f64,
    pub delta: f64,
    pub h0: f64,
    pub max_iters: usize,
    /// Small-step threshold; `None` disables the criterion.
    pub step_tol: Option<f64>,
    /// Relative dual-gap threshold used by problem-supplied monitors.
    pub gap_tol: f64,
    /// Relative feasibility threshold used by problem-supplied monitors.
    pub feas_tol_rel: f64,
    pub record_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            beta0: 1.0,
            delta: 0.5,
            h0: 1e-4,
            max_iters: 10_000,
            step_tol: Some(1e-6),
            gap_tol: 0.05,
            feas_tol_rel: 0.005,
            record_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta0 > 0.0) {
            return Err(Error::InvalidParameter(format!("beta0 must be > 0, got {}", self.beta0)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.h0 > 0.0) {
            return Err(Error::InvalidParameter(format!("H0 must be > 0, got {}", self.h0)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
}

/// `(α_t, β_t, H_t)` for iteration index `t`.
pub fn schedules(t: usize, cfg: &SolverConfig, mu: f64, m_f: f64) -> Schedule {
    let tf = t as f64;
    let alpha = 2.0 / (tf + 2.0);
    let beta = cfg.beta0 * (cfg.delta * (tf + 1.0).ln()).exp();
    let h = if t == 0 {
        cfg.h0
    } else {
        cfg.h0.max(2.0 * m_f / (mu + 1.0)) * ((1.0 - mu) * tf.ln()).exp()
    };
    Schedule { alpha, beta, h }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub beta: f64,
    pub h: f64,
    pub lambda_a: f64,
    /// `A x + B y − c` at the current iterate.
    pub residual: Vec<f64>,
}

impl SolverState {
    pub fn initial(spec: &ProblemSpec, cfg: &SolverConfig, x0: Vec<f64>, y0: Vec<f64>) -> Result<Self> {
        cfg.validate()?;
        check_dim("x0", spec.x_dim(), x0.len())?;
        check_dim("y0", spec.y_dim(), y0.len())?;
        let residual = spec.residual(&x0, &y0)?;
        let s = schedules(0, cfg, spec.mu(), spec.m_f());
        Ok(SolverState {
            t: 0,
            x: x0,
            y: y0,
            beta: s.beta,
            h: s.h,
            lambda_a: spec.lambda_a,
            residual,
        })
    }

    pub fn alpha(&self) -> f64 {
        2.0 / (self.t as f64 + 2.0)
    }

    pub fn feasibility(&self) -> f64 {
        norm2(&self.residual)
    }
}

/// One iteration from `state` (index `t`) to index `t + 1`.
pub fn step(state: &SolverState, spec: &ProblemSpec, cfg: &SolverConfig) -> Result<SolverState> {
    let t = state.t;
    let alpha = state.alpha();
    let beta = state.beta;
    let n = spec.x_dim();
    let m = spec.y_dim();

    // x-update: prox-gradient step on f1 + (β/2)‖A· + By − c‖² with curvature L
    let mut grad = spec.f1.grad(&state.x);
    let mut atr = vec![0.0; n];
    spec.a.adjoint_apply_into(&state.residual, &mut atr)?;
    let curvature = state.h + state.lambda_a * beta;
    let mut shifted = vec![0.0; n];
    for i in 0..n {
        grad[i] += beta * atr[i];
        shifted[i] = state.x[i] - grad[i] / curvature;
    }
    let mut x_next = vec![0.0; n];
    spec.f2.prox_into(&shifted, 1.0 / curvature, &mut x_next);
    if !all_finite(&x_next) {
        return Err(Error::NonFinite { t, what: "x update" });
    }

    // y-update: conditional-gradient step on g1 + (β/2)‖Ax⁺ + B· − c‖²
    let ax_next = spec.a.apply(&x_next)?;
    let by = spec.b.apply(&state.y)?;
    let r_tilde: Vec<f64> = (0..ax_next.len())
        .map(|i| ax_next[i] + by[i] - spec.c[i])
        .collect();
    let mut direction = spec.g1.grad(&state.y);
    let mut btr = vec![0.0; m];
    spec.b.adjoint_apply_into(&r_tilde, &mut btr)?;
    for (d, v) in direction.iter_mut().zip(&btr) {
        *d += beta * v;
    }
    let mut u = vec![0.0; m];
    spec.g2.lo_into(&direction, &mut u);
    let y_next: Vec<f64> = state
        .y
        .iter()
        .zip(&u)
        .map(|(yi, ui)| yi + alpha * (ui - yi))
        .collect();
    if !all_finite(&y_next) {
        return Err(Error::NonFinite { t, what: "y update" });
    }

    let by_next = spec.b.apply(&y_next)?;
    let residual: Vec<f64> = (0..ax_next.len())
        .map(|i| ax_next[i] + by_next[i] - spec.c[i])
        .collect();
    if !all_finite(&residual) {
        return Err(Error::NonFinite { t, what: "residual" });
    }

    let s = schedules(t + 1, cfg, spec.mu(), spec.m_f());
    Ok(SolverState {
        t: t + 1,
        x: x_next,
        y: y_next,
        beta: s.beta,
        h: s.h,
        lambda_a: state.lambda_a,
        residual,
    })
}

/// `(‖x⁺ − x‖₂, ‖y⁺ − y‖₂)`.
pub fn step_norms(prev: &SolverState, next: &SolverState) -> (f64, f64) {
    (dist2(&prev.x, &next.x), dist2(&prev.y, &next.y))
}

pub fn terminate_small_steps(prev: &SolverState, next: &SolverState, tol: f64) -> bool {
    let (dx, dy) = step_norms(prev, next);
    dx.max(dy) <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    GapAndFeasibility,
    SmallSteps,
    IterationCap,
    User,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::GapAndFeasibility => "gap-and-feasibility",
            StopReason::SmallSteps => "small-steps",
            StopReason::IterationCap => "iteration-cap",
            StopReason::User => "user",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Optional per-step quantities a [`Monitor`] can attach to the trace, plus
/// an optional stop request.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub gap_r: Option<f64>,
    pub dual: Option<f64>,
    pub dist_ref: Option<f64>,
    pub stop: Option<StopReason>,
}

/// Called synchronously after every iteration with the states at `t` and
/// `t + 1`.
pub trait Monitor {
    fn after_step(&mut self, spec: &ProblemSpec, prev: &SolverState, next: &SolverState) -> Result<StepReport>;
}

/// Monitor that reports nothing and never stops.
pub struct NoMonitor;

impl Monitor for NoMonitor {
    fn after_step(&mut self, _: &ProblemSpec, _: &SolverState, _: &SolverState) -> Result<StepReport> {
        Ok(StepReport::default())
    }
}

impl<F> Monitor for F
where
    F: FnMut(&ProblemSpec, &SolverState, &SolverState) -> Result<StepReport>,
{
    fn after_step(&mut self, spec: &ProblemSpec, prev: &SolverState, next: &SolverState) -> Result<StepReport> {
        self(spec, prev, next)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
    pub obj: f64,
    pub feas2: f64,
    /// Norms of the step that produced this iterate; absent at `t = 0`.
    pub dx: Option<f64>,
    pub dy: Option<f64>,
    /// Relative gap and dual value reported by the monitor for the step that
    /// produced this iterate (built from the iterate at `t − 1`).
    pub gap_r: Option<f64>,
    pub dual: Option<f64>,
    pub dist_ref: Option<f64>,
}

pub const TRACE_HEADER: &str = "t,alpha,beta,H,obj,feas2,dx,dy,gap_r,dual,dist_ref";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterTrace {
    pub records: Vec<TraceRecord>,
    /// Emitted as `# key=value` lines ahead of the CSV header.
    pub metadata: Vec<(String, String)>,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl IterTrace {
    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "{TRACE_HEADER}")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                fmt_f64(r.alpha),
                fmt_f64(r.beta),
                fmt_f64(r.h),
                fmt_f64(r.obj),
                fmt_f64(r.feas2),
                fmt_opt(r.dx),
                fmt_opt(r.dy),
                fmt_opt(r.gap_r),
                fmt_opt(r.dual),
                fmt_opt(r.dist_ref),
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SolverState,
    pub trace: IterTrace,
    pub stop_reason: StopReason,
    /// Monitor report for the last executed step (default when none ran).
    pub last_report: StepReport,
    /// Iterate after the first step, when one was taken.
    pub first_iterate: Option<(Vec<f64>, Vec<f64>)>,
}

fn record(spec: &ProblemSpec, state: &SolverState, step: Option<(f64, f64)>, report: &StepReport) -> TraceRecord {
    TraceRecord {
        t: state.t,
        alpha: state.alpha(),
        beta: state.beta,
        h: state.h,
        obj: spec.objective(&state.x, &state.y),
        feas2: state.feasibility(),
        dx: step.map(|s| s.0),
        dy: step.map(|s| s.1),
        gap_r: report.gap_r,
        dual: report.dual,
        dist_ref: report.dist_ref,
    }
}

/// Iterates until the monitor requests a stop, the small-step criterion
/// fires, or `max_iters` steps have been taken. Iterates with
/// `t % record_every == 0` are recorded, starting with `t = 0`.
pub fn run(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    x0: Vec<f64>,
    y0: Vec<f64>,
    monitor: &mut dyn Monitor,
) -> Result<RunOutcome> {
    let mut state = SolverState::initial(spec, cfg, x0, y0)?;
    let mut trace = IterTrace::default();
    trace.push_meta("beta0", cfg.beta0);
    trace.push_meta("delta", cfg.delta);
    trace.push_meta("H0", cfg.h0);
    trace.push_meta("record_every", cfg.record_every);
    trace.push_meta("gap_index", "t-1");
    trace.records.push(record(spec, &state, None, &StepReport::default()));

    let mut last_report = StepReport::default();
    let mut first_iterate = None;
    let stop_reason = loop {
        if state.t >= cfg.max_iters {
            break StopReason::IterationCap;
        }
        let next = step(&state, spec, cfg)?;
        let report = monitor.after_step(spec, &state, &next)?;
        let norms = step_norms(&state, &next);
        let small = cfg.step_tol.is_some_and(|tol| norms.0.max(norms.1) <= tol);
        if next.t % cfg.record_every == 0 {
            trace.records.push(record(spec, &next, Some(norms), &report));
        }
        if next.t == 1 {
            first_iterate = Some((next.x.clone(), next.y.clone()));
        }
        state = next;
        let stop = report.stop;
        last_report = report;
        if let Some(reason) = stop {
            break reason;
        }
        if small {
            break StopReason::SmallSteps;
        }
    };
    trace.push_meta("stop_reason", stop_reason);
    trace.push_meta("iterations", state.t);
    Ok(RunOutcome {
        state,
        trace,
        stop_reason,
        last_report,
        first_iterate,
    })
}
