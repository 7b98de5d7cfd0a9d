//! Order statistics and log-log slope fits for experiment output.

use crate::error::{Error, Result};
use crate::solver::{IterTrace, TraceRecord};

/// Nearest-rank quantile of sorted data: the value at 1-based rank
/// `⌈p·N⌉` (rank 1 for `p = 0`).
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn five_number(values: &[f64]) -> Option<FiveNumber> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(FiveNumber {
        min: v[0],
        q1: nearest_rank(&v, 0.25),
        median: nearest_rank(&v, 0.5),
        q3: nearest_rank(&v, 0.75),
        max: v[v.len() - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceColumn {
    Obj,
    Feas2,
    Dx,
    Dy,
    GapR,
    Dual,
    DistRef,
}

impl TraceColumn {
    pub fn value(&self, r: &TraceRecord) -> Option<f64> {
        match self {
            TraceColumn::Obj => Some(r.obj),
            TraceColumn::Feas2 => Some(r.feas2),
            TraceColumn::Dx => r.dx,
            TraceColumn::Dy => r.dy,
            TraceColumn::GapR => r.gap_r,
            TraceColumn::Dual => r.dual,
            TraceColumn::DistRef => r.dist_ref,
        }
    }
}

pub const MIN_SLOPE_POINTS: usize = 10;

/// Least-squares slope of `ln value` against `ln(t + 1)` over records with
/// `t_lo ≤ t ≤ t_hi`. Nonpositive or missing values are skipped.
pub fn slope_fit(trace: &IterTrace, column: TraceColumn, t_lo: usize, t_hi: usize) -> Result<f64> {
    let mut points = Vec::new();
    let mut skipped = 0usize;
    for r in trace.records.iter().filter(|r| r.t >= t_lo && r.t <= t_hi) {
        match column.value(r) {
            Some(v) if v > 0.0 && v.is_finite() => points.push(((r.t as f64 + 1.0).ln(), v.ln())),
            _ => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("slope fit skipped {skipped} nonpositive or missing values");
    }
    loglog_slope(&points)
}

/// Ordinary least-squares slope through `(u, v)` points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < MIN_SLOPE_POINTS {
        return Err(Error::InvalidParameter(format!(
            "slope fit needs at least {MIN_SLOPE_POINTS} points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mu = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mu) * (p.0 - mu)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("slope fit needs distinct abscissae".into()));
    }
    Ok(sxy / sxx)
}
