//! β₀ sweeps over batches of seeded compressed-sensing instances.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csgen::{generate_instance, reformulate, CsInstance, CsProblem};
use crate::duality::CsMonitor;
use crate::error::Result;
use crate::harness::stats::five_number;
use crate::solver::{fmt_f64, run, RunOutcome, SolverConfig, StopReason};

/// Sweep description, read from JSON. Missing fields take the defaults of
/// [`SweepPlan::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepPlan {
    /// `(m, n, k)` triples.
    pub sizes: Vec<(usize, usize, usize)>,
    pub seeds: Vec<u64>,
    pub beta0_grid: Vec<f64>,
    pub delta: f64,
    pub p: f64,
    pub h0: f64,
    pub gap_tol: f64,
    pub feas_tol_rel: f64,
    pub step_tol: f64,
    pub max_iters: usize,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            sizes: vec![(180, 640, 20)],
            seeds: (1..=20).collect(),
            beta0_grid: vec![0.5, 1.0, 10.0, 20.0, 50.0],
            delta: 0.5,
            p: 1.5,
            h0: 1e-4,
            gap_tol: 0.05,
            feas_tol_rel: 0.005,
            step_tol: 1e-6,
            max_iters: 10_000,
        }
    }
}

impl SweepPlan {
    pub fn solver_config(&self, beta0: f64) -> SolverConfig {
        SolverConfig {
            beta0,
            delta: self.delta,
            h0: self.h0,
            max_iters: self.max_iters,
            step_tol: Some(self.step_tol),
            gap_tol: self.gap_tol,
            feas_tol_rel: self.feas_tol_rel,
            record_every: self.max_iters.max(1),
        }
    }
}

/// Outcome of one compressed-sensing solve started at the origin.
#[derive(Debug, Clone)]
pub struct CsRun {
    pub outcome: RunOutcome,
    /// `gap_r` of the last step (`None` when no step was taken).
    pub gap_r: Option<f64>,
    /// `(‖Ax_out − b‖_p − σ)₊`.
    pub feas_violation: f64,
    pub wall_s: f64,
}

/// Solves a reformulated instance from the origin with the gap/feasibility
/// and small-step criteria active.
pub fn solve_cs(inst: &CsInstance, problem: &CsProblem, cfg: &SolverConfig, stop_enabled: bool) -> Result<CsRun> {
    let start = Instant::now();
    let mut monitor = CsMonitor::new(problem.dual.clone(), cfg.gap_tol, cfg.feas_tol_rel);
    monitor.stop_enabled = stop_enabled;
    let outcome = run(
        &problem.spec,
        cfg,
        vec![0.0; inst.n],
        vec![0.0; inst.m],
        &mut monitor,
    )?;
    let feas_violation = problem.dual.feasibility_violation(&outcome.state.x)?;
    Ok(CsRun {
        gap_r: outcome.last_report.gap_r,
        feas_violation,
        wall_s: start.elapsed().as_secs_f64(),
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub size: (usize, usize, usize),
    pub seed: u64,
    pub beta0: f64,
    /// `None` when the solve aborted; the message is kept in `error`.
    pub stop_reason: Option<StopReason>,
    pub iterations: usize,
    pub gap_r: Option<f64>,
    pub feas_violation: Option<f64>,
    pub sigma: f64,
    pub wall_s: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub size: (usize, usize, usize),
    pub beta0: f64,
    pub metric: &'static str,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    pub rows: Vec<RunRow>,
    pub summaries: Vec<SummaryRow>,
}

pub const SWEEP_HEADER: &str =
    "kind,m,n,k,seed,beta0,status,stop_reason,iterations,gap_r,feas_violation,sigma,wall_s,metric,min,q1,median,q3,max";

fn solve_row(plan: &SweepPlan, size: (usize, usize, usize), seed: u64) -> Vec<RunRow> {
    let (m, n, k) = size;
    let failed = |beta0: f64, msg: String| RunRow {
        size,
        seed,
        beta0,
        stop_reason: None,
        iterations: 0,
        gap_r: None,
        feas_violation: None,
        sigma: f64::NAN,
        wall_s: 0.0,
        error: Some(msg),
    };
    let prepared = generate_instance(m, n, k, plan.p, seed).and_then(|inst| reformulate(&inst).map(|p| (inst, p)));
    let (inst, problem) = match prepared {
        Ok(v) => v,
        Err(e) => return plan.beta0_grid.iter().map(|b| failed(*b, e.to_string())).collect(),
    };
    plan.beta0_grid
        .iter()
        .map(|&beta0| match solve_cs(&inst, &problem, &plan.solver_config(beta0), true) {
            Ok(r) => RunRow {
                size,
                seed,
                beta0,
                stop_reason: Some(r.outcome.stop_reason),
                iterations: r.outcome.state.t,
                gap_r: r.gap_r,
                feas_violation: Some(r.feas_violation),
                sigma: inst.sigma,
                wall_s: r.wall_s,
                error: None,
            },
            Err(e) => {
                log::warn!("solve failed for size {size:?}, seed {seed}, beta0 {beta0}: {e}");
                failed(beta0, e.to_string())
            }
        })
        .collect()
}

/// Runs every `(size, seed, β₀)` combination. Rows come back in plan order
/// regardless of scheduling; failed solves are kept as rows.
pub fn run_sweep(plan: &SweepPlan) -> SweepResult {
    if plan.beta0_grid.is_empty() {
        return SweepResult::default();
    }
    let jobs: Vec<((usize, usize, usize), u64)> = plan
        .sizes
        .iter()
        .flat_map(|s| plan.seeds.iter().map(move |seed| (*s, *seed)))
        .collect();
    let rows: Vec<RunRow> = jobs
        .par_iter()
        .map(|(size, seed)| solve_row(plan, *size, *seed))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let mut summaries = Vec::new();
    for size in &plan.sizes {
        for &beta0 in &plan.beta0_grid {
            let group: Vec<&RunRow> = rows
                .iter()
                .filter(|r| r.size == *size && r.beta0 == beta0 && r.error.is_none())
                .collect();
            let metrics: [(&'static str, Vec<f64>); 2] = [
                ("gap_r", group.iter().filter_map(|r| r.gap_r).collect()),
                ("feas_violation", group.iter().filter_map(|r| r.feas_violation).collect()),
            ];
            for (metric, values) in metrics {
                if let Some(f) = five_number(&values) {
                    summaries.push(SummaryRow {
                        size: *size,
                        beta0,
                        metric,
                        min: f.min,
                        q1: f.q1,
                        median: f.median,
                        q3: f.q3,
                        max: f.max,
                    });
                }
            }
        }
    }
    SweepResult { rows, summaries }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, plan: &SweepPlan, mut w: W, with_timing: bool) -> std::io::Result<()> {
        writeln!(w, "# plan={}", serde_json::to_string(plan).expect("plan serializes"))?;
        writeln!(w, "# quantiles=nearest-rank")?;
        writeln!(w, "{SWEEP_HEADER}")?;
        for r in &self.rows {
            let (m, n, k) = r.size;
            let status = if r.error.is_some() { "failed" } else { "ok" };
            let wall = if with_timing { fmt_f64(r.wall_s) } else { String::new() };
            writeln!(
                w,
                "run,{m},{n},{k},{},{},{status},{},{},{},{},{},{wall},,,,,,",
                r.seed,
                r.beta0,
                r.stop_reason.map(|s| s.as_str()).unwrap_or(""),
                r.iterations,
                opt(r.gap_r),
                opt(r.feas_violation),
                if r.sigma.is_nan() { String::new() } else { fmt_f64(r.sigma) },
            )?;
        }
        for s in &self.summaries {
            let (m, n, k) = s.size;
            writeln!(
                w,
                "summary,{m},{n},{k},,{},,,,,,,,{},{},{},{},{},{}",
                s.beta0,
                s.metric,
                fmt_f64(s.min),
                fmt_f64(s.q1),
                fmt_f64(s.median),
                fmt_f64(s.q3),
                fmt_f64(s.max),
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, plan: &SweepPlan, with_timing: bool) -> String {
        let mut buf = Vec::new();
        self.write_csv(plan, &mut buf, with_timing).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn summary(&self, size: (usize, usize, usize), beta0: f64, metric: &str) -> Option<&SummaryRow> {
        self.summaries
            .iter()
            .find(|s| s.size == size && s.beta0 == beta0 && s.metric == metric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_gives_header_only() {
        let plan = SweepPlan {
            beta0_grid: vec![],
            ..SweepPlan::default()
        };
        let res = run_sweep(&plan);
        let csv = res.to_csv_string(&plan, true);
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, vec![SWEEP_HEADER]);
    }

    #[test]
    fn small_sweep_is_deterministic() {
        let plan = SweepPlan {
            sizes: vec![(6, 20, 2)],
            seeds: vec![1, 2, 3],
            beta0_grid: vec![1.0, 20.0],
            max_iters: 300,
            ..SweepPlan::default()
        };
        let a = run_sweep(&plan);
        let b = run_sweep(&plan);
        assert_eq!(a.rows.len(), 6);
        assert_eq!(a.to_csv_string(&plan, false), b.to_csv_string(&plan, false));
        assert_eq!(a.summaries.len(), 4);
        assert!(a.rows.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn plan_json_defaults() {
        let plan: SweepPlan = serde_json::from_str(r#"{"seeds":[1,2],"beta0_grid":[20]}"#).unwrap();
        assert_eq!(plan.sizes, vec![(180, 640, 20)]);
        assert_eq!(plan.seeds, vec![1, 2]);
        assert_eq!(plan.max_iters, 10_000);
    }
}
