use serde::Serialize;

use super::config::ExperimentConfig;
use super::table::{fmt_f64, CsvRecord};
use crate::asymptotics::{bk_bound, k_bk, k_nks, k_p, k_q, nks_bound, predict_error};
use crate::error::Result;

/// Predicted error and competing bounds at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoryRow {
    pub n: u64,
    pub prediction: f64,
    pub log_prediction: f64,
    pub bk_bound: f64,
    pub nks_bound: f64,
    pub exponent: f64,
}

impl CsvRecord for TheoryRow {
    fn header() -> &'static [&'static str] {
        &["n", "prediction", "log_prediction", "bk_bound", "nks_bound", "exponent"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_f64(self.prediction),
            fmt_f64(self.log_prediction),
            fmt_f64(self.bk_bound),
            fmt_f64(self.nks_bound),
            fmt_f64(self.exponent),
        ]
    }
}

/// One row per entry of `cfg.n_list`.
pub fn run_theory(cfg: &ExperimentConfig) -> Result<Vec<TheoryRow>> {
    cfg.validate()?;
    let t = cfg.tree()?;
    cfg.n_list
        .iter()
        .map(|&n| {
            let pr = predict_error(&t, cfg.theta, cfg.q, n)?;
            Ok(TheoryRow {
                n,
                prediction: pr.predicted_error,
                log_prediction: pr.log_predicted_error,
                bk_bound: bk_bound(t.p(), cfg.theta, n)?,
                nks_bound: nks_bound(t.p(), cfg.theta, cfg.q, n)?,
                exponent: pr.exponent,
            })
        })
        .collect()
}

/// Noiseless exponents against θ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentRow {
    pub theta: f64,
    pub k_p: f64,
    pub k_bk: f64,
}

impl CsvRecord for ExponentRow {
    fn header() -> &'static [&'static str] {
        &["theta", "k_p", "k_bk"]
    }

    fn fields(&self) -> Vec<String> {
        vec![fmt_f64(self.theta), fmt_f64(self.k_p), fmt_f64(self.k_bk)]
    }
}

/// Noisy exponents against θ at fixed q.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoisyExponentRow {
    pub theta: f64,
    pub q: f64,
    pub k_q: f64,
    pub k_nks: f64,
}

impl CsvRecord for NoisyExponentRow {
    fn header() -> &'static [&'static str] {
        &["theta", "q", "k_q", "k_nks"]
    }

    fn fields(&self) -> Vec<String> {
        vec![fmt_f64(self.theta), fmt_f64(self.q), fmt_f64(self.k_q), fmt_f64(self.k_nks)]
    }
}

pub fn exponent_rows(thetas: &[f64]) -> Result<Vec<ExponentRow>> {
    thetas.iter().map(|&t| Ok(ExponentRow { theta: t, k_p: k_p(t)?, k_bk: k_bk(t)? })).collect()
}

pub fn noisy_exponent_rows(thetas: &[f64], q: f64) -> Result<Vec<NoisyExponentRow>> {
    thetas.iter().map(|&t| Ok(NoisyExponentRow { theta: t, q, k_q: k_q(t, q)?, k_nks: k_nks(t, q)? })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(structure: &str, q: f64) -> ExperimentConfig {
        ExperimentConfig { structure: structure.into(), theta: 0.4, q, n_list: vec![200, 600, 1000, 1400], ..Default::default() }
    }

    #[test]
    fn star_to_chain_ratio() {
        for q in [0.0, 0.02] {
            let star = run_theory(&cfg("star", q)).unwrap();
            let chain = run_theory(&cfg("chain", q)).unwrap();
            for (s, c) in star.iter().zip(&chain) {
                assert!((s.prediction / c.prediction - 4.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bounds_vacuous_at_figure_sizes() {
        for theta in [0.1, 0.4] {
            let rows = run_theory(&ExperimentConfig { theta, n_list: vec![100, 300], ..Default::default() }).unwrap();
            assert!(rows.iter().all(|r| r.bk_bound > 1.0 && r.nks_bound > 1.0));
        }
    }

    #[test]
    fn q_zero_rows_match_noiseless_path() {
        let rows = run_theory(&cfg("hybrid", 0.0)).unwrap();
        let t = crate::tree::make_hybrid();
        for r in rows {
            let pf = crate::asymptotics::prefactors(0.4, r.n).unwrap();
            assert_eq!(r.prediction, 18.0 * (2.0 * pf.f - pf.f_tilde));
            assert_eq!(r.exponent, k_p(0.4).unwrap());
            assert_eq!(r.bk_bound, bk_bound(t.p(), 0.4, r.n).unwrap());
        }
    }
}
