use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::ExperimentConfig;
use super::simulate::run_simulation;
use super::table::write_csv_file;
use super::theory::{exponent_rows, noisy_exponent_rows, run_theory};
use crate::error::{Error, Result};
use crate::learner::{TiePolicy, WeightRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// `K_P` and `K_BK` against θ.
    Fig1a,
    /// `K_P^(q)` and `K_NKS(q)` against θ for q ∈ {0.01, 0.1}.
    Fig1b,
    /// 3-node chain, θ = 0.1.
    Fig2a,
    /// 3-node chain, θ = 0.4.
    Fig2b,
    /// 10-node star, θ = 0.4.
    Fig3a,
    /// 10-node chain, θ = 0.4.
    Fig3b,
    /// 10-node hybrid, θ = 0.4.
    Fig3c,
}

impl Figure {
    pub const ALL: [Figure; 7] =
        [Figure::Fig1a, Figure::Fig1b, Figure::Fig2a, Figure::Fig2b, Figure::Fig3a, Figure::Fig3b, Figure::Fig3c];

    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig1a => "fig1a",
            Figure::Fig1b => "fig1b",
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig3c => "fig3c",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown figure {s:?}; expected one of fig1a, fig1b, fig2a, fig2b, fig3a, fig3b, fig3c")))
    }
}

/// Knobs shared by every simulated curve.
#[derive(Clone, Debug, PartialEq)]
pub struct ReproduceOptions {
    pub seed: u64,
    pub min_errors: u64,
    pub max_trials: u64,
    pub threads: Option<usize>,
    /// Replaces each figure's default sample sizes.
    pub n_list: Option<Vec<u64>>,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        let d = ExperimentConfig::default();
        ReproduceOptions { seed: d.seed, min_errors: d.min_errors, max_trials: d.max_trials, threads: None, n_list: None }
    }
}

/// One output file.
#[derive(Clone, Debug, PartialEq)]
pub enum Curve {
    Exponents { file: String, thetas: Vec<f64> },
    NoisyExponents { file: String, thetas: Vec<f64>, q: f64 },
    Theory { file: String, cfg: ExperimentConfig },
    Simulation { file: String, cfg: ExperimentConfig },
}

fn theta_sweep() -> Vec<f64> {
    (1..50).map(|k| k as f64 / 100.0).collect()
}

fn q_tag(q: f64) -> String {
    format!("q{q}")
}

/// Files written for `fig` and the configuration behind each.
pub fn plan(fig: Figure, opts: &ReproduceOptions) -> Vec<Curve> {
    let base = |structure: &str, theta: f64, q: f64, n_list: Vec<u64>| ExperimentConfig {
        structure: structure.into(),
        p: 10,
        theta,
        q,
        n_list: opts.n_list.clone().unwrap_or(n_list),
        weight: WeightRule::Agreement,
        policy: TiePolicy::RandomTieBreak,
        min_errors: opts.min_errors,
        max_trials: opts.max_trials,
        seed: opts.seed,
        output: None,
        threads: opts.threads,
    };
    let id = fig.id();
    let mut curves = Vec::new();
    let (structure, theta, n_list): (&str, f64, Vec<u64>) = match fig {
        Figure::Fig1a => return vec![Curve::Exponents { file: format!("{id}.csv"), thetas: theta_sweep() }],
        Figure::Fig1b => {
            return [0.01, 0.1]
                .into_iter()
                .map(|q| Curve::NoisyExponents { file: format!("{id}_{}.csv", q_tag(q)), thetas: theta_sweep(), q })
                .collect()
        }
        Figure::Fig2a => ("p3", 0.1, (1..=10).map(|k| 25 * k).collect()),
        Figure::Fig2b => ("p3", 0.4, (1..=10).map(|k| 100 * k).collect()),
        Figure::Fig3a => ("star", 0.4, (1..=6).map(|k| 200 * k).collect()),
        Figure::Fig3b => ("chain", 0.4, (1..=6).map(|k| 200 * k).collect()),
        Figure::Fig3c => ("hybrid", 0.4, (1..=6).map(|k| 200 * k).collect()),
    };
    let weights: &[WeightRule] = if matches!(fig, Figure::Fig2a | Figure::Fig2b) {
        &[WeightRule::Agreement, WeightRule::MutualInformation]
    } else {
        &[WeightRule::Agreement]
    };
    for q in [0.0, 0.02] {
        let cfg = base(structure, theta, q, n_list.clone());
        curves.push(Curve::Theory { file: format!("{id}_theory_{}.csv", q_tag(q)), cfg: cfg.clone() });
        for &w in weights {
            curves.push(Curve::Simulation {
                file: format!("{id}_sim_{}_{}.csv", w.name(), q_tag(q)),
                cfg: ExperimentConfig { weight: w, ..cfg.clone() },
            });
        }
    }
    curves
}

/// Writes every curve of `fig` under `out_dir` and returns the paths.
pub fn reproduce(fig: Figure, opts: &ReproduceOptions, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for curve in plan(fig, opts) {
        let path = match &curve {
            Curve::Exponents { file, thetas } => {
                let path = out_dir.join(file);
                write_csv_file(&path, &exponent_rows(thetas)?)?;
                path
            }
            Curve::NoisyExponents { file, thetas, q } => {
                let path = out_dir.join(file);
                write_csv_file(&path, &noisy_exponent_rows(thetas, *q)?)?;
                path
            }
            Curve::Theory { file, cfg } => {
                let path = out_dir.join(file);
                write_csv_file(&path, &run_theory(cfg)?)?;
                path
            }
            Curve::Simulation { file, cfg } => {
                log::info!("{fig}: simulating {file}");
                let path = out_dir.join(file);
                write_csv_file(&path, &run_simulation(cfg)?)?;
                path
            }
        };
        log::info!("wrote {}", path.display());
        written.push(path);
    }
    Ok(written)
}
