//! Complexity certificates for the penalty iteration.
//!
//! For every `t ≥ 2` the iterates satisfy
//!
//! ```text
//!     f(xᵗ) + g(yᵗ) + (β_{t−1}/2)‖Axᵗ + Byᵗ − c‖² − val ≤ τ_t
//!     ‖Axᵗ + Byᵗ − c‖ ≤ G_t
//!     |f(xᵗ) + g(yᵗ) − val| ≤ max{τ_t, ‖λ̄‖ G_t}
//! ```
//!
//! where `τ_t` and `G_t` are assembled from the constants computed here.
//! All formulas are nondecreasing in the diameters, `D₂` and the Hölder
//! constants, so upper bounds on those inputs give valid certificates.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub beta0: f64,
    pub delta: f64,
    pub h0: f64,
    pub mu: f64,
    pub nu: f64,
    pub m_f: f64,
    pub m_g: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub d_f: f64,
    pub d_g: f64,
    pub d2_upper: f64,
    /// `2(f(x¹) + g(y¹) + (β₀/2)‖Ax¹ + By¹ − c‖² − val)`.
    pub theta: f64,
    pub lambda_bar_norm: Option<f64>,
    /// Free-form note on which first iterate / reference value produced `theta`.
    #[serde(default)]
    pub theta_source: Option<String>,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("beta0", self.beta0),
            ("H0", self.h0),
            ("M_f", self.m_f),
            ("M_g", self.m_g),
            ("lambda_A", self.lambda_a),
            ("lambda_B", self.lambda_b),
            ("D_f", self.d_f),
            ("D_g", self.d_g),
            ("D2", self.d2_upper),
            ("theta", self.theta),
            ("lambda_bar", self.lambda_bar_norm.unwrap_or(0.0)),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.beta0 > 0.0 && self.h0 > 0.0) {
            return Err(Error::InvalidParameter("beta0 and H0 must be > 0".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        for (name, v) in [("mu", self.mu), ("nu", self.nu)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0,1], got {v}")));
            }
        }
        Ok(())
    }
}

/// `ϑ = 2(f(x¹) + g(y¹) + (β₀/2)‖Ax¹ + By¹ − c‖² − val)`, clamped at zero.
pub fn theta_from_first_iterate(penalty_at_first: f64, val: f64) -> f64 {
    (2.0 * (penalty_at_first - val)).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub h_tilde0: f64,
    /// Only defined for `μ < 1`.
    pub omega0: Option<f64>,
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub omega4: Option<f64>,
    pub omega5: f64,
}

pub fn compute_constants(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let BoundInputs {
        beta0,
        delta,
        h0,
        mu,
        nu,
        m_f,
        m_g,
        lambda_a,
        lambda_b,
        d_f,
        d_g,
        d2_upper: d2,
        theta,
        ..
    } = *inputs;

    let h_tilde0 = h0.max(2.0 * m_f / (mu + 1.0));
    let omega0 = (mu < 1.0).then(|| 4.0 * h_tilde0 * (2.0 * m_f / ((1.0 + mu) * h_tilde0)).powf(2.0 / (1.0 - mu)));
    let omega1 = 2f64.powf(delta + 3.0) * beta0 * d2 + theta;
    let omega2 = 2.0 * lambda_a * d_f * d_f * beta0
        + 2.0 * lambda_b * d_g * d_g * beta0
        + (32.0 + 16.0 * delta) / (1.0 + delta) * d2 * beta0;
    let omega3 = 2f64.powf(nu + 1.0) / (nu + 1.0) * m_g * d_g.powf(nu + 1.0);
    let omega5 = 2.0 * h_tilde0 * d_f * d_f;
    let omega4 = omega0.map(|w0| omega5 + 2.0 * w0);
    Ok(BoundReport {
        inputs: inputs.clone(),
        h_tilde0,
        omega0,
        omega1,
        omega2,
        omega3,
        omega4,
        omega5,
    })
}

impl BoundReport {
    /// `τ_t`, defined for `t ≥ 2`.
    pub fn tau(&self, t: usize) -> Result<f64> {
        if t < 2 {
            return Err(Error::InvalidParameter(format!("tau is defined for t >= 2, got {t}")));
        }
        let tf = t as f64;
        let i = &self.inputs;
        let head = self.omega1 / (tf * (tf + 1.0))
            + self.omega2 / (tf + 1.0).powf(1.0 - i.delta)
            + self.omega3 / (tf + 1.0).powf(i.nu);
        let tail = match self.omega4 {
            Some(w4) => w4 / (tf + 1.0).powf(i.mu),
            None => self.omega5 / (tf + 1.0),
        };
        Ok(head + tail)
    }

    /// `G_t` for multiplier norm `‖λ̄‖`.
    pub fn g(&self, t: usize, lambda_bar_norm: f64) -> Result<f64> {
        let tau = self.tau(t)?;
        let bt = self.inputs.beta0 * (t as f64).powf(self.inputs.delta);
        let a = lambda_bar_norm / bt;
        Ok(a + (a * a + 2.0 * tau / bt).sqrt())
    }

    /// `max{τ_t, ‖λ̄‖ G_t}`.
    pub fn objective_bound(&self, t: usize, lambda_bar_norm: f64) -> Result<f64> {
        Ok(self.tau(t)?.max(lambda_bar_norm * self.g(t, lambda_bar_norm)?))
    }

    pub fn key_values(&self) -> Vec<(String, String)> {
        let i = &self.inputs;
        let mut kv: Vec<(String, String)> = vec![
            ("beta0".into(), i.beta0.to_string()),
            ("delta".into(), i.delta.to_string()),
            ("H0".into(), i.h0.to_string()),
            ("mu".into(), i.mu.to_string()),
            ("nu".into(), i.nu.to_string()),
            ("M_f".into(), i.m_f.to_string()),
            ("M_g".into(), i.m_g.to_string()),
            ("lambda_A".into(), i.lambda_a.to_string()),
            ("lambda_B".into(), i.lambda_b.to_string()),
            ("D_f".into(), i.d_f.to_string()),
            ("D_g".into(), i.d_g.to_string()),
            ("D2".into(), i.d2_upper.to_string()),
            ("theta".into(), i.theta.to_string()),
            (
                "lambda_bar".into(),
                i.lambda_bar_norm.map_or_else(|| "n/a".to_string(), |v| v.to_string()),
            ),
            ("H_tilde0".into(), self.h_tilde0.to_string()),
            (
                "omega0".into(),
                self.omega0.map_or_else(|| "n/a".to_string(), |v| v.to_string()),
            ),
            ("omega1".into(), self.omega1.to_string()),
            ("omega2".into(), self.omega2.to_string()),
            ("omega3".into(), self.omega3.to_string()),
            (
                "omega4".into(),
                self.omega4.map_or_else(|| "n/a".to_string(), |v| v.to_string()),
            ),
            ("omega5".into(), self.omega5.to_string()),
        ];
        if let Some(src) = &i.theta_source {
            kv.push(("theta_source".into(), src.clone()));
        }
        kv
    }

    /// Writes the report as `# key=value` lines.
    pub fn write_header<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (k, v) in self.key_values() {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaChoice {
    pub delta: f64,
    /// Predicted objective-deviation exponent `min{ϖ₁, ϖ₂}`.
    pub objective_exponent: f64,
    /// Predicted feasibility exponent `ϖ₂`.
    pub feasibility_exponent: f64,
    pub varpi1: f64,
    pub varpi2: f64,
}

/// Balances the objective and feasibility rates: `δ = 1/2` when
/// `min{μ, ν} ≥ 1/2`, else `δ = 1 − min{μ, ν}`.
pub fn choose_delta(mu: f64, nu: f64) -> Result<DeltaChoice> {
    for (name, v) in [("mu", mu), ("nu", nu)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::InvalidParameter(format!("{name} must lie in (0,1], got {v}")));
        }
    }
    let m = mu.min(nu);
    let delta = if m >= 0.5 { 0.5 } else { 1.0 - m };
    let (varpi1, varpi2) = rate_exponents(delta, mu, nu);
    Ok(DeltaChoice {
        delta,
        objective_exponent: varpi1.min(varpi2),
        feasibility_exponent: varpi2,
        varpi1,
        varpi2,
    })
}

/// `(ϖ₁, ϖ₂) = (min{1−δ, ν, μ}, min{δ, 1/2, (ν+δ)/2, (μ+δ)/2})`.
pub fn rate_exponents(delta: f64, mu: f64, nu: f64) -> (f64, f64) {
    let varpi1 = (1.0 - delta).min(nu).min(mu);
    let varpi2 = delta.min(0.5).min((nu + delta) / 2.0).min((mu + delta) / 2.0);
    (varpi1, varpi2)
}
