use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics;
use crate::error::Result;
use crate::learner::TiePolicy;
use crate::oracle::{
    exact_error_p3, extremal_check, joint_exponent_numeric, noisy_letter_probs, sanov_exponent_noisy,
    sanov_exponent_numeric, tilt_summary, trinomial_exact, zeta_subtree_count, TrinomialSpec,
};
use crate::tree::{make_chain, make_hybrid, make_star, random_tree, zeta, TreeStructure};

/// The closed forms under test. Swapping one entry for a perturbed version
/// must make the suite fail.
#[derive(Clone, Copy)]
pub struct ClosedForms {
    pub k_p: fn(f64) -> Result<f64>,
    pub k_bk: fn(f64) -> Result<f64>,
    pub beta1: fn(f64, f64) -> Result<f64>,
    pub beta2: fn(f64, f64) -> Result<f64>,
    pub k_q: fn(f64, f64) -> Result<f64>,
    pub k_nks: fn(f64, f64) -> Result<f64>,
    pub lemma2_exponent: fn(f64, f64) -> Result<f64>,
    pub joint_exponent: fn(f64) -> Result<f64>,
    pub prefactors_noisy: fn(f64, f64, u64) -> Result<asymptotics::Prefactors>,
    pub zeta: fn(&TreeStructure) -> u64,
}

impl ClosedForms {
    pub fn library() -> Self {
        ClosedForms {
            k_p: asymptotics::k_p,
            k_bk: asymptotics::k_bk,
            beta1: asymptotics::beta1,
            beta2: asymptotics::beta2,
            k_q: asymptotics::k_q,
            k_nks: asymptotics::k_nks,
            lemma2_exponent: asymptotics::lemma2_exponent,
            joint_exponent: asymptotics::joint_exponent,
            prefactors_noisy: asymptotics::prefactors_noisy,
            zeta,
        }
    }
}

/// Outcome of one comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: Value,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Default)]
struct Recorder {
    records: Vec<CheckRecord>,
}

impl Recorder {
    /// `|actual − expected| ≤ tolerance`.
    fn close(&mut self, name: &str, inputs: Value, expected: f64, actual: f64, tolerance: f64) {
        let pass = (actual - expected).abs() <= tolerance;
        self.records.push(CheckRecord { name: name.into(), inputs, expected, actual, tolerance, pass });
    }

    /// A boolean property, recorded as expected 1 / actual 0 or 1.
    fn holds(&mut self, name: &str, inputs: Value, ok: bool) {
        self.close(name, inputs, 1.0, ok as u8 as f64, 0.0);
    }

    fn fallible(&mut self, name: &str, inputs: Value, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            log::error!("{name} {inputs}: {e}");
            self.close(name, inputs, 0.0, f64::NAN, 0.0);
        }
    }
}

/// `θ_k = k/(2(m+1))`, `k = 1..=m`: `m` interior points of (0, ½).
pub fn interior_grid(m: usize) -> Vec<f64> {
    (1..=m).map(|k| k as f64 / (2.0 * (m + 1) as f64)).collect()
}

/// Every oracle comparison, in a fixed order.
pub fn run_oracle_suite(cf: &ClosedForms) -> Vec<CheckRecord> {
    let mut r = Recorder::default();
    let grid20 = interior_grid(20);
    let qs = [0.0, 0.01, 0.02, 0.05, 0.1];

    for &t in &grid20 {
        r.fallible("k_p_vs_sanov", json!({"theta": t}), |r| {
            r.close("k_p_vs_sanov", json!({"theta": t}), sanov_exponent_numeric(t, t)?, (cf.k_p)(t)?, 1e-9);
            Ok(())
        });
        r.fallible("k_bk_below_third", json!({"theta": t}), |r| {
            r.holds("k_bk_below_third", json!({"theta": t}), (cf.k_bk)(t)? < (cf.k_p)(t)? / 3.0);
            Ok(())
        });
    }
    let grid5 = [0.05, 0.15, 0.25, 0.35, 0.45];
    for &t1 in &grid5 {
        for &t3 in &grid5 {
            let inputs = json!({"theta1": t1, "theta3": t3});
            r.fallible("lemma2_vs_sanov", inputs.clone(), |r| {
                r.close("lemma2_vs_sanov", inputs.clone(), sanov_exponent_numeric(t1, t3)?, (cf.lemma2_exponent)(t1, t3)?, 1e-9);
                Ok(())
            });
        }
    }
    for &t in &asymptotics::theta_grid() {
        for &q in &qs {
            let inputs = json!({"theta": t, "q": q});
            r.fallible("noisy_exponents", inputs.clone(), |r| {
                let letters = noisy_letter_probs(t, q)?;
                r.close("beta1_vs_letters", inputs.clone(), letters[0b001], (cf.beta1)(t, q)?, 1e-15);
                r.close("beta2_vs_letters", inputs.clone(), letters[0b010], (cf.beta2)(t, q)?, 1e-15);
                r.close("k_q_vs_sanov", inputs.clone(), sanov_exponent_noisy(t, q)?, (cf.k_q)(t, q)?, 1e-9);
                if q == 0.0 {
                    r.close("k_q_at_zero_noise", inputs.clone(), (cf.k_p)(t)?, (cf.k_q)(t, q)?, 1e-12);
                } else {
                    r.holds("k_nks_below_k_q", inputs.clone(), (cf.k_nks)(t, q)? < (cf.k_q)(t, q)?);
                }
                let tilt = tilt_summary(&TrinomialSpec::noisy(t, q)?)?;
                r.close("tilt_phi", inputs.clone(), (-(cf.k_q)(t, q)?).exp(), tilt.phi_tau, 1e-12);
                r.close("tilt_mu3", inputs.clone(), 0.0, tilt.mu3, 1e-15);
                r.close("tilt_mu4_eq_mu2", inputs.clone(), tilt.mu2, tilt.mu4, 1e-15);
                Ok(())
            });
        }
    }
    for t in [0.1, 0.2, 0.3, 0.4] {
        r.fallible("joint_exponent_vs_dual", json!({"theta": t}), |r| {
            r.close("joint_exponent_vs_dual", json!({"theta": t}), joint_exponent_numeric(t)?, (cf.joint_exponent)(t)?, 1e-6);
            Ok(())
        });
    }
    for q in [0.0, 0.02] {
        let inputs = json!({"theta": 0.4, "q": q, "n": 2000});
        r.fallible("prefactor_ratio", inputs.clone(), |r| {
            let spec = if q == 0.0 { TrinomialSpec::noiseless(0.4)? } else { TrinomialSpec::noisy(0.4, q)? };
            let exact = trinomial_exact(&spec, 2000)?;
            let pf = (cf.prefactors_noisy)(0.4, q, 2000)?;
            r.close("f_over_exact_tail", inputs.clone(), 1.0, pf.f / exact.p_tail, 0.02);
            r.close("f_tilde_over_exact_point", inputs.clone(), 1.0, pf.f_tilde / exact.p_point, 0.02);
            Ok(())
        });
    }
    for (name, t, expect) in
        [("star10", make_star(10), 36), ("chain10", make_chain(10), 8), ("hybrid", Ok(make_hybrid()), 18)]
    {
        let t = t.expect("canonical trees are valid");
        r.close("zeta_canonical", json!({"tree": name}), expect as f64, (cf.zeta)(&t) as f64, 0.0);
    }
    let mismatches = (0..500u64)
        .filter(|&s| {
            let t = random_tree(3 + (s as usize % 28), s).expect("p >= 3");
            (cf.zeta)(&t) != zeta_subtree_count(&t)
        })
        .count();
    r.close("zeta_vs_subtree_scan", json!({"trees": 500, "p": "3..=30"}), 0.0, mismatches as f64, 0.0);
    for p in 4..=7 {
        r.fallible("extremal", json!({"p": p}), |r| {
            r.holds("extremal", json!({"p": p}), extremal_check(p)?);
            Ok(())
        });
    }
    for t in [0.1, 0.3] {
        let inputs = json!({"theta": t, "n": 1});
        r.fallible("exact_error_single_sample", inputs.clone(), |r| {
            let expect = 2.0 / 3.0 * (1.0 - t) * (1.0 - t) + t * (1.0 - t) + t * t;
            r.close("exact_error_single_sample", inputs.clone(), expect, exact_error_p3(t, 0.0, 1, TiePolicy::RandomTieBreak)?, 1e-14);
            Ok(())
        });
    }
    r.records
}

/// Whether every record passed.
pub fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|c| c.pass)
}
