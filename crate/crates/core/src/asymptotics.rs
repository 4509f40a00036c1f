//! Closed-form error exponents, strong large-deviation prefactors and the
//! resulting error-probability predictions, plus the two competing
//! non-asymptotic bounds. All logarithms are natural.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::tree::{check_q, check_theta, zeta, TreeStructure};

/// Noiseless exponent `−log(1 − θ(1 − √(4θ(1−θ))))`.
pub fn k_p(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(-(-theta * (1.0 - (4.0 * theta * (1.0 - theta)).sqrt())).ln_1p())
}

/// Exponent of the Bresler–Karzand bound specialized to this model.
pub fn k_bk(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(theta * (1.0 - 2.0 * theta).powi(2) / 8.0)
}

/// Probability of the noisy letter `(0,0,1)` on the 3-chain.
pub fn beta1(theta: f64, q: f64) -> Result<f64> {
    check_theta(theta)?;
    check_q(q)?;
    let keep = (1.0 - q).powi(3) + q.powi(3);
    let a = theta * (1.0 - theta);
    Ok(keep * a / 2.0 + q * (1.0 - q) * (1.0 - a) / 2.0)
}

/// Probability of the noisy letter `(0,1,0)` on the 3-chain.
pub fn beta2(theta: f64, q: f64) -> Result<f64> {
    check_theta(theta)?;
    check_q(q)?;
    let keep = (1.0 - q).powi(3) + q.powi(3);
    let b = theta * theta;
    Ok(keep * b / 2.0 + q * (1.0 - q) * (1.0 - b) / 2.0)
}

/// Arithmetic-minus-geometric mean.
fn am_gm_gap(a: f64, b: f64) -> f64 {
    (a + b) / 2.0 - (a * b).sqrt()
}

/// Exponent for learning from BSC(q)-corrupted samples.
pub fn k_q(theta: f64, q: f64) -> Result<f64> {
    let (b1, b2) = (beta1(theta, q)?, beta2(theta, q)?);
    Ok(-(-4.0 * am_gm_gap(b1, b2)).ln_1p())
}

/// Exponent of the Nikolakakis–Kalogerias–Sarwate bound.
pub fn k_nks(theta: f64, q: f64) -> Result<f64> {
    check_theta(theta)?;
    check_q(q)?;
    let c4 = (1.0 - 2.0 * q).powi(4);
    let num = c4 * theta * theta * (1.0 - 2.0 * theta).powi(2);
    let den = 8.0 * (1.0 - c4 * (1.0 - 2.0 * theta));
    Ok(num / den)
}

/// Exponent of `P(Â₁₃ ≥ Â₁₂)` on a 3-chain whose edges 1-2 and 2-3 have
/// flip probabilities `theta1` and `theta3`.
pub fn lemma2_exponent(theta1: f64, theta3: f64) -> Result<f64> {
    check_theta(theta1)?;
    check_theta(theta3)?;
    Ok(-(-theta3 * (1.0 - (4.0 * theta1 * (1.0 - theta1)).sqrt())).ln_1p())
}

/// Exponent of `P({Â₁₃ ≥ Â₁₂} ∩ {Â₁₃ ≥ Â₂₃})` on the homogeneous 3-chain.
pub fn joint_exponent(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let inner = 2.0 - theta - 3.0 * theta.cbrt() * (1.0 - theta).powf(2.0 / 3.0);
    Ok(-(-theta * inner).ln_1p())
}

/// Strong large-deviation approximations for one 3-node sub-tree:
/// `f_tilde` for the tie event and `f` for the tail event.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prefactors {
    pub exponent: f64,
    /// Variance of the tilted step variable.
    pub variance: f64,
    /// `exp(−τ)` at the tilt point.
    pub z: f64,
    pub f_tilde: f64,
    pub f: f64,
    pub log_f_tilde: f64,
    /// `ln f`, or `NaN` when the 1/n correction drives `f` negative.
    pub log_f: f64,
}

impl Prefactors {
    /// `f / f_tilde`, computed without forming either.
    pub fn tail_to_point_ratio(&self, n: u64) -> f64 {
        let n = n as f64;
        let z = self.z;
        (1.0 - z * (1.0 + z) / (2.0 * (1.0 - z).powi(2) * self.variance * n)) / (1.0 - z)
    }
}

fn strong_ld(exponent: f64, variance: f64, z: f64, n: u64) -> Result<Prefactors> {
    if n == 0 {
        return invalid("prefactors need n >= 1");
    }
    let nf = n as f64;
    let point_corr = 1.0 + (1.0 - 3.0 * variance) / (8.0 * variance * nf);
    let log_f_tilde = -nf * exponent - 0.5 * (2.0 * PI * variance * nf).ln() + point_corr.ln();
    let tail_corr = 1.0 - z * (1.0 + z) / (2.0 * (1.0 - z).powi(2) * variance * nf);
    let log_f = if tail_corr > 0.0 { log_f_tilde - (1.0 - z).ln() + tail_corr.ln() } else { f64::NAN };
    let f_tilde = log_f_tilde.exp();
    let f = f_tilde / (1.0 - z) * tail_corr;
    Ok(Prefactors { exponent, variance, z, f_tilde, f, log_f_tilde, log_f })
}

/// Noiseless prefactors `(f̃(n), f(n))`.
pub fn prefactors(theta: f64, n: u64) -> Result<Prefactors> {
    let k = k_p(theta)?;
    let variance = theta * (4.0 * theta * (1.0 - theta)).sqrt() * k.exp();
    let z = (theta / (1.0 - theta)).sqrt();
    strong_ld(k, variance, z, n)
}

/// Noisy prefactors `(f̃^(q)(n), f^(q)(n))`; identical to [`prefactors`] at
/// `q = 0`.
pub fn prefactors_noisy(theta: f64, q: f64, n: u64) -> Result<Prefactors> {
    check_q(q)?;
    if q == 0.0 {
        return prefactors(theta, n);
    }
    let (b1, b2) = (beta1(theta, q)?, beta2(theta, q)?);
    let k = k_q(theta, q)?;
    let variance = 4.0 * (b1 * b2).sqrt() * k.exp();
    let z = (b2 / b1).sqrt();
    strong_ld(k, variance, z, n)
}

/// Predicted structure-learning error probability for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub theta: f64,
    pub q: f64,
    pub n: u64,
    pub tree: String,
    pub exponent: f64,
    pub f_tilde_n: f64,
    pub f_n: f64,
    pub zeta: u64,
    /// `ζ·(2f − f̃)`, floored at zero for `n` so small that the expansion
    /// turns negative.
    pub predicted_error: f64,
    /// Natural log of the prediction; usable when the linear value underflows.
    pub log_predicted_error: f64,
}

/// `ζ_P (2 f(n) − f̃(n))`, with noisy prefactors when `q > 0`.
pub fn predict_error(t: &TreeStructure, theta: f64, q: f64, n: u64) -> Result<AsymptoticPrediction> {
    let pf = prefactors_noisy(theta, q, n)?;
    let z = zeta(t);
    let raw = z as f64 * (2.0 * pf.f - pf.f_tilde);
    let shape = 2.0 * pf.tail_to_point_ratio(n) - 1.0;
    let log_pred = if z > 0 && shape > 0.0 {
        (z as f64).ln() + pf.log_f_tilde + shape.ln()
    } else {
        f64::NEG_INFINITY
    };
    Ok(AsymptoticPrediction {
        theta,
        q,
        n,
        tree: t.to_string(),
        exponent: pf.exponent,
        f_tilde_n: pf.f_tilde,
        f_n: pf.f,
        zeta: z,
        predicted_error: raw.max(0.0),
        log_predicted_error: log_pred,
    })
}

/// `2p² exp(−n K_BK)`, uncapped.
pub fn bk_bound(p: usize, theta: f64, n: u64) -> Result<f64> {
    Ok(2.0 * (p * p) as f64 * (-(n as f64) * k_bk(theta)?).exp())
}

/// `2p² exp(−n K_NKS(q))`, uncapped.
pub fn nks_bound(p: usize, theta: f64, q: f64, n: u64) -> Result<f64> {
    Ok(2.0 * (p * p) as f64 * (-(n as f64) * k_nks(theta, q)?).exp())
}

/// `θ ∈ {0.05, 0.075, …, 0.45}`.
pub fn theta_grid() -> Vec<f64> {
    (0..=16).map(|k| 0.05 + 0.025 * k as f64).collect()
}

/// `q ∈ {0, 0.01, 0.02, 0.05, 0.1}`.
pub fn q_grid() -> Vec<f64> {
    vec![0.0, 0.01, 0.02, 0.05, 0.1]
}
