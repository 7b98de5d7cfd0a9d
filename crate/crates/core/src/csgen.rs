//! Compressed-sensing instances `min ‖x‖₁ s.t. ‖Ax − b‖_p ≤ σ` and their
//! bounded reformulation
//!
//! ```text
//!     min ‖x‖₁   s.t.  ‖y‖_p ≤ σ,  ‖x‖_∞ ≤ ‖x̂‖₁ + 1,  Ax − y = b,     x̂ = A†b.
//! ```
//!
//! # Random streams
//!
//! Everything is drawn from ChaCha20 seeded with the instance seed, one
//! stream per array so arrays do not depend on each other's sizes:
//!
//! | stream | array |
//! |--------|-------|
//! | 1 | entries of `A` (row-major) |
//! | 2 | support of `x_orig` (partial Fisher–Yates) |
//! | 3 | nonzero values of `x_orig` |
//! | 4 | noise `ε` |
//!
//! Standard normals use the Marsaglia polar method. Generalized Gaussian
//! noise has density `∝ exp(−|x|^p)`: `X = S·G^{1/p}` with `S = ±1` uniform
//! and `G ~ Gamma(1/p, 1)`. Gamma draws with shape `a < 1` use
//! `Gamma(a+1)·U^{1/a}`; shape `≥ 1` uses Marsaglia–Tsang:
//!
//! 1. `d = a − 1/3`, `c = 1/√(9d)`;
//! 2. draw `z ~ N(0,1)`, set `v = (1 + cz)³`, retry if `v ≤ 0`;
//! 3. draw `u ~ U(0,1)`; accept `dv` if `u < 1 − 0.0331 z⁴` or
//!    `ln u < z²/2 + d(1 − v + ln v)`, otherwise go to 2.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::blocks::{zero_smooth_block, L1BoxProx, LpBallLo, ProblemSpec};
use crate::duality::CsDualContext;
use crate::error::{check_dim, Error, Result};
use crate::linmap::LinearMap;
use crate::vecops::{dot, norm1, norm2, norm_p};

pub const STREAM_MATRIX: u64 = 1;
pub const STREAM_SUPPORT: u64 = 2;
pub const STREAM_SIGNAL: u64 = 3;
pub const STREAM_NOISE: u64 = 4;

pub const NOISE_LEVEL: f64 = 0.01;
pub const SIGMA_FACTOR: f64 = 1.1;
/// Redraw attempts before giving up on a degenerate draw.
const MAX_REDRAWS: u64 = 64;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on `(0, 1]`.
fn open_uniform<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Standard normal draws by the polar method, caching the spare variate.
pub struct NormalSource<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> NormalSource<R> {
    pub fn new(rng: R) -> Self {
        NormalSource { rng, spare: None }
    }

    pub fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.rng.gen::<f64>() - 1.0;
            let v = 2.0 * self.rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    pub fn uniform(&mut self) -> f64 {
        open_uniform(&mut self.rng)
    }

    pub fn rng(&mut self) -> &mut R {
        &mut self.rng
    }
}

/// `Gamma(shape, 1)` draw.
pub fn sample_gamma<R: Rng>(src: &mut NormalSource<R>, shape: f64) -> f64 {
    if shape < 1.0 {
        let g = sample_gamma(src, shape + 1.0);
        let u = src.uniform();
        return g * (u.ln() / shape).exp();
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z = src.next();
        let v = (1.0 + c * z).powi(3);
        if v <= 0.0 {
            continue;
        }
        let u = src.uniform();
        if u < 1.0 - 0.0331 * z.powi(4) || u.ln() < 0.5 * z * z + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

fn ggd_from<R: Rng>(src: &mut NormalSource<R>, p: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|_| {
            let g = sample_gamma(src, 1.0 / p);
            let sign = if src.rng().gen::<bool>() { 1.0 } else { -1.0 };
            sign * (g.ln() / p).exp()
        })
        .collect()
}

/// `count` i.i.d. draws with density `∝ exp(−|x|^p)`.
pub fn sample_ggd(p: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!("GGD shape must lie in (1,2], got {p}")));
    }
    let mut src = NormalSource::new(stream_rng(seed, STREAM_NOISE));
    Ok(ggd_from(&mut src, p, count))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsInstance {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub sigma: f64,
    /// Seed that produced the arrays (after any redraws).
    pub seed: u64,
    /// Dense `m × n` map with unit-norm columns.
    pub a: LinearMap,
    pub b: Vec<f64>,
    pub x_orig: Vec<f64>,
}

impl CsInstance {
    /// Instance from explicit data (no generating signal).
    pub fn from_parts(rows: &[Vec<f64>], b: Vec<f64>, sigma: f64, p: f64) -> Result<Self> {
        let a = LinearMap::from_rows(rows)?;
        check_dim("instance b", a.out_dim(), b.len())?;
        if !(sigma > 0.0) || !(p > 1.0 && p <= 2.0) {
            return Err(Error::InvalidParameter("instance needs sigma > 0 and p in (1,2]".into()));
        }
        Ok(CsInstance {
            m: a.out_dim(),
            n: a.in_dim(),
            k: 0,
            p,
            sigma,
            seed: 0,
            x_orig: vec![0.0; a.in_dim()],
            a,
            b,
        })
    }

    pub fn dual_context(&self) -> CsDualContext {
        CsDualContext::new(self.a.clone(), self.b.clone(), self.sigma, self.p)
            .expect("instance fields validated at construction")
    }

    /// `(‖Ax − b‖_p − σ)₊`.
    pub fn feasibility_violation(&self, x: &[f64]) -> Result<f64> {
        self.dual_context().feasibility_violation(x)
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let mut norms = vec![0.0; self.n];
        for i in 0..self.m {
            for (j, c) in norms.iter_mut().enumerate() {
                let v = self.a.entry(i, j);
                *c += v * v;
            }
        }
        norms.into_iter().map(f64::sqrt).collect()
    }
}

fn draw_instance(m: usize, n: usize, k: usize, p: f64, seed: u64) -> CsInstance {
    let mut normal = NormalSource::new(stream_rng(seed, STREAM_MATRIX));
    let mut data: Vec<f64> = (0..m * n).map(|_| normal.next()).collect();
    for j in 0..n {
        let norm = (0..m).map(|i| data[i * n + j].powi(2)).sum::<f64>().sqrt();
        for i in 0..m {
            data[i * n + j] /= norm;
        }
    }
    let a = LinearMap::Dense { rows: m, cols: n, data };

    let mut support_rng = stream_rng(seed, STREAM_SUPPORT);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = support_rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let mut signal = NormalSource::new(stream_rng(seed, STREAM_SIGNAL));
    let mut x_orig = vec![0.0; n];
    for &i in &idx[..k] {
        x_orig[i] = signal.next();
    }

    let mut noise_src = NormalSource::new(stream_rng(seed, STREAM_NOISE));
    let eps = ggd_from(&mut noise_src, p, m);
    let ax = a.apply(&x_orig).expect("dims constructed consistently");
    let b: Vec<f64> = ax.iter().zip(&eps).map(|(v, e)| v + NOISE_LEVEL * e).collect();
    let resid: Vec<f64> = ax.iter().zip(&b).map(|(v, bi)| v - bi).collect();
    let sigma = SIGMA_FACTOR * norm_p(&resid, p);
    CsInstance {
        m,
        n,
        k,
        p,
        sigma,
        seed,
        a,
        b,
        x_orig,
    }
}

/// Seeded instance with Gaussian column-normalized `A`, `k`-sparse Gaussian
/// signal, `b = A x_orig + 0.01 ε` and `σ = 1.1 ‖A x_orig − b‖_p`.
/// Degenerate draws (`σ = 0` or `σ ≥ ‖b‖_p`) are redrawn with `seed + 1`, ...
pub fn generate_instance(m: usize, n: usize, k: usize, p: f64, seed: u64) -> Result<CsInstance> {
    if m == 0 || n == 0 || k > n || m > n {
        return Err(Error::InvalidParameter(format!(
            "need 0 < m <= n and k <= n, got (m,n,k)=({m},{n},{k})"
        )));
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (1,2], got {p}")));
    }
    for attempt in 0..MAX_REDRAWS {
        let s = seed.wrapping_add(attempt);
        let inst = draw_instance(m, n, k, p, s);
        if inst.sigma > 0.0 && inst.sigma < norm_p(&inst.b, p) {
            return Ok(inst);
        }
        log::warn!("degenerate instance draw for seed {s} (sigma={}), redrawing", inst.sigma);
    }
    Err(Error::InvalidParameter(format!("no admissible instance after {MAX_REDRAWS} redraws from seed {seed}")))
}

pub const DEFAULT_CG_TOL: f64 = 1e-12;

/// Minimum-ℓ₂-norm solution `x̂ = Aᵀz` of `Ax = b`, with `(AAᵀ)z = b` solved
/// by conjugate gradients to relative residual `tol`.
pub fn min_norm_solution(a: &LinearMap, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    check_dim("min-norm rhs", a.out_dim(), b.len())?;
    let m = a.out_dim();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; a.in_dim()]);
    }
    let max_iters = 20 * m + 100;
    let mut z = vec![0.0; m];
    let mut r = b.to_vec();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let mut work = vec![0.0; a.in_dim()];
    let mut gd = vec![0.0; m];
    let mut iters = 0;
    while rr.sqrt() > tol * bnorm {
        if iters >= max_iters {
            return Err(Error::CgStagnation {
                iters,
                residual: rr.sqrt() / bnorm,
            });
        }
        a.adjoint_apply_into(&d, &mut work)?;
        a.apply_into(&work, &mut gd)?;
        let curv = dot(&d, &gd);
        if !(curv > 0.0) {
            return Err(Error::CgStagnation {
                iters,
                residual: rr.sqrt() / bnorm,
            });
        }
        let step = rr / curv;
        for i in 0..m {
            z[i] += step * d[i];
            r[i] -= step * gd[i];
        }
        let rr_new = dot(&r, &r);
        let ratio = rr_new / rr;
        rr = rr_new;
        for i in 0..m {
            d[i] = r[i] + ratio * d[i];
        }
        iters += 1;
    }
    let x = a.adjoint_apply(&z)?;
    let mut res = a.apply(&x)?;
    res.iter_mut().zip(b).for_each(|(v, bi)| *v -= bi);
    if norm2(&res) > 1e-8 * (1.0 + bnorm) {
        return Err(Error::CgStagnation {
            iters,
            residual: norm2(&res) / bnorm,
        });
    }
    Ok(x)
}

/// A reformulated instance ready for the solver.
#[derive(Debug, Clone)]
pub struct CsProblem {
    pub spec: ProblemSpec,
    pub x_hat: Vec<f64>,
    /// `‖x̂‖₁ + 1`.
    pub box_radius: f64,
    pub dual: CsDualContext,
}

pub fn reformulate(inst: &CsInstance) -> Result<CsProblem> {
    let x_hat = min_norm_solution(&inst.a, &inst.b, DEFAULT_CG_TOL)?;
    let box_radius = norm1(&x_hat) + 1.0;
    let spec = ProblemSpec::new(
        Arc::new(zero_smooth_block(inst.n)),
        Arc::new(L1BoxProx::new(inst.n, 1.0, box_radius)?),
        Arc::new(zero_smooth_block(inst.m)),
        Arc::new(LpBallLo::new(inst.m, inst.sigma, inst.p)?),
        inst.a.clone(),
        LinearMap::negated_identity(inst.m),
        inst.b.clone(),
    )?;
    Ok(CsProblem {
        spec,
        x_hat,
        box_radius,
        dual: inst.dual_context(),
    })
}

// ---------------------------------------------------------------------------
// serialization

pub const MAGIC: &[u8; 4] = b"PCG1";
pub const FORMAT_VERSION: u16 = 1;

/// Binary container: magic `PCG1`, `u16` version, `u32` m, n, k, `f64` p,
/// σ, `u64` seed, then row-major `A`, `b`, `x_orig`; all little-endian.
pub fn write_instance<W: Write>(inst: &CsInstance, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for d in [inst.m, inst.n, inst.k] {
        let d = u32::try_from(d).map_err(|_| Error::Format(format!("dimension {d} exceeds u32")))?;
        w.write_all(&d.to_le_bytes())?;
    }
    w.write_all(&inst.p.to_le_bytes())?;
    w.write_all(&inst.sigma.to_le_bytes())?;
    w.write_all(&inst.seed.to_le_bytes())?;
    for i in 0..inst.m {
        for j in 0..inst.n {
            w.write_all(&inst.a.entry(i, j).to_le_bytes())?;
        }
    }
    for v in inst.b.iter().chain(&inst.x_orig) {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated instance: {e}")))?;
    Ok(buf)
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    (0..count).map(|_| Ok(f64::from_le_bytes(read_array::<8, _>(r)?))).collect()
}

pub fn read_instance<R: Read>(mut r: R) -> Result<CsInstance> {
    let magic = read_array::<4, _>(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = u16::from_le_bytes(read_array::<2, _>(&mut r)?);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let m = u32::from_le_bytes(read_array::<4, _>(&mut r)?) as usize;
    let n = u32::from_le_bytes(read_array::<4, _>(&mut r)?) as usize;
    let k = u32::from_le_bytes(read_array::<4, _>(&mut r)?) as usize;
    let p = f64::from_le_bytes(read_array::<8, _>(&mut r)?);
    let sigma = f64::from_le_bytes(read_array::<8, _>(&mut r)?);
    let seed = u64::from_le_bytes(read_array::<8, _>(&mut r)?);
    let data = read_f64s(&mut r, m * n)?;
    let b = read_f64s(&mut r, m)?;
    let x_orig = read_f64s(&mut r, n)?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    Ok(CsInstance {
        m,
        n,
        k,
        p,
        sigma,
        seed,
        a: LinearMap::dense(m, n, data)?,
        b,
        x_orig,
    })
}

/// Human-readable `key=value` description of an instance.
pub fn metadata_sidecar(inst: &CsInstance) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        s.push_str(k);
        s.push('=');
        s.push_str(&v);
        s.push('\n');
    };
    kv("format", "PCG1".into());
    kv("version", FORMAT_VERSION.to_string());
    kv("m", inst.m.to_string());
    kv("n", inst.n.to_string());
    kv("k", inst.k.to_string());
    kv("p", inst.p.to_string());
    kv("sigma", format!("{:.17e}", inst.sigma));
    kv("seed", inst.seed.to_string());
    kv("rng", "chacha20; streams 1=A 2=support 3=signal 4=noise".into());
    kv("normal", "marsaglia-polar".into());
    kv("gamma", "marsaglia-tsang; shape<1 via Gamma(a+1)*U^(1/a)".into());
    kv("ggd_density", "proportional to exp(-|x|^p); E|X|^p = 1/p".into());
    kv("noise_level", NOISE_LEVEL.to_string());
    kv("sigma_factor", SIGMA_FACTOR.to_string());
    s
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Writes the binary instance and its `.meta` sidecar.
pub fn save_instance(inst: &CsInstance, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_instance(inst, &mut w)?;
    w.flush()?;
    std::fs::write(sidecar_path(path), metadata_sidecar(inst))?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<CsInstance> {
    read_instance(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_invariants() {
        for (seed, (m, n, k)) in [(0u64, (3, 8, 2)), (1, (5, 5, 5)), (7, (10, 40, 3)), (9, (1, 2, 1))] {
            let inst = generate_instance(m, n, k, 1.5, seed).unwrap();
            assert!(inst.column_norms().iter().all(|c| (c - 1.0).abs() < 1e-12));
            assert_eq!(inst.x_orig.iter().filter(|v| **v != 0.0).count(), k);
            let ax = inst.a.apply(&inst.x_orig).unwrap();
            let r: Vec<f64> = ax.iter().zip(&inst.b).map(|(a, b)| a - b).collect();
            assert!((inst.sigma - 1.1 * norm_p(&r, 1.5)).abs() <= 1e-12 * inst.sigma.max(1.0));
            assert!(inst.sigma > 0.0 && inst.sigma < norm_p(&inst.b, 1.5));
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let a = generate_instance(6, 20, 3, 1.5, 42).unwrap();
        let b = generate_instance(6, 20, 3, 1.5, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(6, 20, 3, 1.5, 43).unwrap();
        assert_ne!(a.b, c.b);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(generate_instance(5, 4, 1, 1.5, 0).is_err());
        assert!(generate_instance(2, 4, 5, 1.5, 0).is_err());
        assert!(generate_instance(2, 4, 1, 2.5, 0).is_err());
    }

    #[test]
    fn min_norm_examples() {
        let b = [1.0, -2.0, 0.5];
        let x = min_norm_solution(&LinearMap::identity(3), &b, 1e-12).unwrap();
        assert!(x.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12));
        let a = LinearMap::from_rows(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]]).unwrap();
        let x = min_norm_solution(&a, &[2.0, 3.0], 1e-12).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
        assert_eq!(&x[2..], &[0.0, 0.0]);
    }

    #[test]
    fn min_norm_rank_deficient_is_an_error() {
        let a = LinearMap::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            min_norm_solution(&a, &[1.0, 2.0], 1e-12),
            Err(Error::CgStagnation { .. })
        ));
    }

    #[test]
    fn reformulation_shape() {
        let inst = generate_instance(4, 12, 2, 1.5, 3).unwrap();
        let prob = reformulate(&inst).unwrap();
        let spec = &prob.spec;
        assert_eq!(spec.x_dim(), 12);
        assert_eq!(spec.y_dim(), 4);
        assert!((prob.box_radius - (norm1(&prob.x_hat) + 1.0)).abs() < 1e-15);
        assert!((spec.d_f - 2.0 * prob.box_radius * 12f64.sqrt()).abs() < 1e-12);
        assert!((spec.d_g - 2.0 * inst.sigma).abs() < 1e-15);
        assert_eq!((spec.mu(), spec.nu(), spec.m_f(), spec.m_g()), (1.0, 1.0, 0.0, 0.0));
        // CQ witness: x̂ strictly inside the box, y = 0 inside the ball, Ax̂ = b
        assert!(crate::vecops::norm_inf(&prob.x_hat) < prob.box_radius);
        assert!(spec.g2.contains(&[0.0; 4]));
        assert!(spec.feasibility(&prob.x_hat, &[0.0; 4]).unwrap() < 1e-9);
    }

    #[test]
    fn binary_format_rejects_garbage() {
        assert!(read_instance(&b"XXXX"[..]).is_err());
        let inst = generate_instance(2, 3, 1, 1.5, 1).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"PCG1");
        assert_eq!(buf.len(), 4 + 2 + 12 + 24 + 8 * (6 + 2 + 3));
        assert!(read_instance(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_instance(&extra[..]).is_err());
        assert_eq!(read_instance(&buf[..]).unwrap(), inst);
    }
}
