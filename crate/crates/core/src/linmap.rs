//! Linear operators between real Euclidean spaces.
//!
//! A [`LinearMap`] is immutable once built. Dense matrices are stored
//! row-major in a flat buffer; identity-like maps carry no storage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{check_dim, Error, Result};
use crate::vecops::{dot, norm2};

/// Relative inflation applied to power-iteration estimates before they are
/// used as curvature majorizers.
pub const LAMBDA_INFLATION: f64 = 1e-6;
pub const DEFAULT_POWER_TOL: f64 = 1e-10;
pub const DEFAULT_POWER_ITERS: usize = 5000;
pub const DEFAULT_POWER_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone, PartialEq)]
pub enum LinearMap {
    Dense {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    },
    ScaledIdentity {
        dim: usize,
        scale: f64,
    },
    NegatedIdentity {
        dim: usize,
    },
    Zero {
        in_dim: usize,
        out_dim: usize,
    },
}

impl LinearMap {
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("dense map needs positive dims".into()));
        }
        check_dim("dense map data", rows * cols, data.len())?;
        Ok(LinearMap::Dense { rows, cols, data })
    }

    /// Builds a dense map from row slices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim("dense map row", c, row.len())?;
            data.extend_from_slice(row);
        }
        Self::dense(r, c, data)
    }

    pub fn identity(dim: usize) -> Self {
        LinearMap::ScaledIdentity { dim, scale: 1.0 }
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        LinearMap::ScaledIdentity { dim, scale }
    }

    pub fn negated_identity(dim: usize) -> Self {
        LinearMap::NegatedIdentity { dim }
    }

    pub fn zero(in_dim: usize, out_dim: usize) -> Self {
        LinearMap::Zero { in_dim, out_dim }
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            data[i * n + i] = *v;
        }
        LinearMap::Dense {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            LinearMap::Dense { cols, .. } => *cols,
            LinearMap::ScaledIdentity { dim, .. } | LinearMap::NegatedIdentity { dim } => *dim,
            LinearMap::Zero { in_dim, .. } => *in_dim,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            LinearMap::Dense { rows, .. } => *rows,
            LinearMap::ScaledIdentity { dim, .. } | LinearMap::NegatedIdentity { dim } => *dim,
            LinearMap::Zero { out_dim, .. } => *out_dim,
        }
    }

    /// Entry `(i, j)` of the matrix representation.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            LinearMap::Dense { cols, data, .. } => data[i * cols + j],
            LinearMap::ScaledIdentity { scale, .. } => {
                if i == j {
                    *scale
                } else {
                    0.0
                }
            }
            LinearMap::NegatedIdentity { .. } => {
                if i == j {
                    -1.0
                } else {
                    0.0
                }
            }
            LinearMap::Zero { .. } => 0.0,
        }
    }

    pub fn transpose(&self) -> Self {
        match self {
            LinearMap::Dense { rows, cols, data } => {
                let mut t = vec![0.0; rows * cols];
                for i in 0..*rows {
                    for j in 0..*cols {
                        t[j * rows + i] = data[i * cols + j];
                    }
                }
                LinearMap::Dense {
                    rows: *cols,
                    cols: *rows,
                    data: t,
                }
            }
            LinearMap::Zero { in_dim, out_dim } => LinearMap::Zero {
                in_dim: *out_dim,
                out_dim: *in_dim,
            },
            other => other.clone(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.out_dim()];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim("apply input", self.in_dim(), x.len())?;
        check_dim("apply output", self.out_dim(), out.len())?;
        match self {
            LinearMap::Dense { cols, data, .. } => {
                for (o, row) in out.iter_mut().zip(data.chunks_exact(*cols)) {
                    *o = dot(row, x);
                }
            }
            LinearMap::ScaledIdentity { scale, .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = scale * v;
                }
            }
            LinearMap::NegatedIdentity { .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = -v;
                }
            }
            LinearMap::Zero { .. } => out.fill(0.0),
        }
        Ok(())
    }

    pub fn adjoint_apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.in_dim()];
        self.adjoint_apply_into(w, &mut out)?;
        Ok(out)
    }

    pub fn adjoint_apply_into(&self, w: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim("adjoint input", self.out_dim(), w.len())?;
        check_dim("adjoint output", self.in_dim(), out.len())?;
        match self {
            LinearMap::Dense { cols, data, .. } => {
                out.fill(0.0);
                for (wi, row) in w.iter().zip(data.chunks_exact(*cols)) {
                    if *wi == 0.0 {
                        continue;
                    }
                    for (o, a) in out.iter_mut().zip(row) {
                        *o += wi * a;
                    }
                }
            }
            LinearMap::ScaledIdentity { scale, .. } => {
                for (o, v) in out.iter_mut().zip(w) {
                    *o = scale * v;
                }
            }
            LinearMap::NegatedIdentity { .. } => {
                for (o, v) in out.iter_mut().zip(w) {
                    *o = -v;
                }
            }
            LinearMap::Zero { .. } => out.fill(0.0),
        }
        Ok(())
    }

    /// Power-iteration estimate of `λ_max(AᵀA)`.
    ///
    /// Iterates `v ← AᵀAv / ‖AᵀAv‖` from a seeded Gaussian-ish start and stops
    /// when the Rayleigh quotient `‖Av‖²` changes by less than `tol` relative.
    /// The raw estimate is returned; see [`LinearMap::lambda_upper`] for the
    /// inflated value the solver uses.
    pub fn lambda_max_sq(&self, tol: f64, max_iters: usize, seed: u64) -> Result<f64> {
        Ok(self.power_iteration(tol, max_iters, seed)?.0)
    }

    /// `lambda_max_sq` inflated by `1 + LAMBDA_INFLATION`, with default
    /// tolerance, iteration cap and seed.
    pub fn lambda_upper(&self) -> f64 {
        match self {
            LinearMap::ScaledIdentity { scale, .. } => scale * scale,
            LinearMap::NegatedIdentity { .. } => 1.0,
            LinearMap::Zero { .. } => 0.0,
            LinearMap::Dense { .. } => {
                let raw = self
                    .lambda_max_sq(DEFAULT_POWER_TOL, DEFAULT_POWER_ITERS, DEFAULT_POWER_SEED)
                    .expect("default power-iteration tolerance is positive");
                raw * (1.0 + LAMBDA_INFLATION)
            }
        }
    }

    /// Power iteration returning the final estimate together with the
    /// Rayleigh-quotient history (one entry per iteration).
    pub fn power_iteration(&self, tol: f64, max_iters: usize, seed: u64) -> Result<(f64, Vec<f64>)> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("power tolerance must be > 0, got {tol}")));
        }
        if let LinearMap::Zero { .. } = self {
            return Ok((0.0, vec![0.0]));
        }
        let n = self.in_dim();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let nv = norm2(&v);
        v.iter_mut().for_each(|x| *x /= nv);

        let mut av = vec![0.0; self.out_dim()];
        let mut w = vec![0.0; n];
        let mut history = Vec::new();
        let mut prev = f64::NAN;
        for _ in 0..max_iters.max(1) {
            self.apply_into(&v, &mut av)?;
            let rq = dot(&av, &av);
            history.push(rq);
            if rq == 0.0 {
                return Ok((0.0, history));
            }
            if prev.is_finite() && (rq - prev).abs() <= tol * rq {
                return Ok((rq, history));
            }
            prev = rq;
            self.adjoint_apply_into(&av, &mut w)?;
            let nw = norm2(&w);
            if nw == 0.0 {
                return Ok((0.0, history));
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / nw;
            }
        }
        Ok((prev.max(*history.last().unwrap_or(&0.0)), history))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_examples() {
        assert_eq!(LinearMap::identity(3).apply(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(LinearMap::negated_identity(2).apply(&[1.0, -4.0]).unwrap(), vec![-1.0, 4.0]);
        let a = LinearMap::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(a.apply(&[1.0, 1.0]).unwrap(), vec![3.0, 1.0]);
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(
            LinearMap::identity(3).adjoint_apply(&[5.0, 0.0, 1.0]).unwrap(),
            vec![5.0, 0.0, 1.0]
        );
        let a = LinearMap::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(a.adjoint_apply(&[1.0, 0.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(LinearMap::zero(3, 2).adjoint_apply(&[1.0, 2.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = LinearMap::identity(3);
        assert!(matches!(a.apply(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(a.adjoint_apply(&[1.0; 4]), Err(Error::DimensionMismatch { .. })));
        assert!(LinearMap::dense(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn lambda_examples() {
        let id = LinearMap::Dense {
            rows: 4,
            cols: 4,
            data: LinearMap::diag(&[1.0; 4]).transpose().entries(),
        };
        assert!((id.lambda_max_sq(1e-10, 5000, 1).unwrap() - 1.0).abs() < 1e-8);
        let d = LinearMap::diag(&[1.0, 2.0]);
        assert!((d.lambda_max_sq(1e-10, 5000, 1).unwrap() - 4.0).abs() < 1e-6);
        assert_eq!(LinearMap::zero(3, 2).lambda_max_sq(1e-10, 10, 1).unwrap(), 0.0);
        assert!(d.lambda_max_sq(0.0, 10, 1).is_err());
        assert!((LinearMap::identity(4).lambda_upper() - 1.0).abs() < 1e-15);
    }

    impl LinearMap {
        fn entries(&self) -> Vec<f64> {
            let mut v = Vec::new();
            for i in 0..self.out_dim() {
                for j in 0..self.in_dim() {
                    v.push(self.entry(i, j));
                }
            }
            v
        }
    }
}
