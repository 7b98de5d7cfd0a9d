//! Small dense-vector kernels shared across modules.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `|x|^e` for `x != 0` via `exp(e ln|x|)`, and `0` at `x == 0`.
pub fn abs_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (e * x.abs().ln()).exp()
    }
}

/// ℓ_p norm for `p >= 1`, scaled by `‖a‖_∞` so large `p` neither overflows
/// nor underflows.
pub fn norm_p(a: &[f64], p: f64) -> f64 {
    let scale = norm_inf(a);
    if scale == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return norm1(a);
    }
    if p == 2.0 {
        return a.iter().map(|x| (x / scale) * (x / scale)).sum::<f64>().sqrt() * scale;
    }
    let s: f64 = a.iter().map(|x| abs_pow(x / scale, p)).sum();
    scale * abs_pow(s, 1.0 / p)
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_on_small_vectors() {
        assert_eq!(norm1(&[1.0, -2.0]), 3.0);
        assert_eq!(norm_inf(&[1.0, -2.0]), 2.0);
        assert!((norm2(&[3.0, 4.0]) - 5.0).abs() < 1e-15);
        assert!((norm_p(&[3.0, 4.0], 2.0) - 5.0).abs() < 1e-15);
        // ‖(1,1)‖_3 = 2^{1/3}
        assert!((norm_p(&[1.0, 1.0], 3.0) - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert_eq!(norm_p(&[0.0, 0.0], 1.5), 0.0);
    }

    #[test]
    fn norm_p_survives_large_exponents() {
        let v = [1e300, 1e300];
        let n = norm_p(&v, 11.0);
        assert!(n.is_finite());
        assert!((n / 1e300 - 2f64.powf(1.0 / 11.0)).abs() < 1e-12);
    }

    #[test]
    fn abs_pow_zero() {
        assert_eq!(abs_pow(0.0, 0.5), 0.0);
        assert!((abs_pow(-4.0, 0.5) - 2.0).abs() < 1e-15);
    }
}
