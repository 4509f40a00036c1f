use std::time::Instant;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::table::{fmt_f64, CsvRecord};
use crate::error::{invalid, Result};
use crate::learner::{learn_mwst_with, structure_error, TiePolicy, WeightRule};
use crate::par;
use crate::rng::{Domain, StreamKey, AUX_LANE};
use crate::sampling::{pair_stats_into, Channel, PairStats, SampleBatch, Sampler};
use crate::tree::TreeStructure;

/// Trials per work unit. Rounds grow from one chunk to `MAX_ROUND_CHUNKS`
/// so short runs waste little work; outcomes do not depend on the schedule.
const CHUNK: u64 = 1024;
const MAX_ROUND_CHUNKS: u64 = 64;

/// 97.5% standard normal quantile.
const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for `errors` successes out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Monte Carlo estimate of the structure-learning error at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub structure: String,
    pub p: usize,
    pub theta: f64,
    pub q: f64,
    pub n: u64,
    pub weight: WeightRule,
    pub policy: TiePolicy,
    pub seed: u64,
    pub trials: u64,
    pub errors: u64,
    /// Trials in which a non-tree edge tied its tree path.
    pub ties: u64,
    pub error_rate: f64,
    pub wilson_ci_95: (f64, f64),
    /// `max_trials` ran out before `min_errors` errors were seen.
    pub capped: bool,
    /// Not part of the CSV, which must be reproducible byte for byte.
    pub wall_time_s: f64,
}

impl CsvRecord for SimulationReport {
    fn header() -> &'static [&'static str] {
        &[
            "structure", "p", "theta", "q", "n", "weight", "policy", "seed", "trials", "errors", "ties", "error_rate",
            "wilson_lo", "wilson_hi", "capped",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.structure.clone(),
            self.p.to_string(),
            fmt_f64(self.theta),
            fmt_f64(self.q),
            self.n.to_string(),
            self.weight.name().to_string(),
            self.policy.name().to_string(),
            self.seed.to_string(),
            self.trials.to_string(),
            self.errors.to_string(),
            self.ties.to_string(),
            fmt_f64(self.error_rate),
            fmt_f64(self.wilson_ci_95.0),
            fmt_f64(self.wilson_ci_95.1),
            self.capped.to_string(),
        ]
    }
}

const ERR: u8 = 1;
const TIE: u8 = 2;

struct TrialRunner<'a> {
    truth: &'a TreeStructure,
    sampler: Sampler,
    channel: Channel,
    weight: WeightRule,
    policy: TiePolicy,
    seed: u64,
    n: u64,
}

impl TrialRunner<'_> {
    fn scratch(&self) -> (SampleBatch, PairStats) {
        let p = self.truth.p();
        let batch = SampleBatch::zeros(self.n as usize, p).expect("validated sizes");
        let stats = PairStats::from_counts(0, p, vec![[0; 4]; p * (p - 1) / 2]).expect("empty table");
        (batch, stats)
    }

    fn run(&self, scratch: &mut (SampleBatch, PairStats), trial: u64) -> u8 {
        let (batch, stats) = scratch;
        let key = StreamKey::new(self.seed, Domain::Simulation(self.n), trial);
        self.sampler.fill(&key, batch);
        self.channel.corrupt(&key, batch);
        pair_stats_into(batch, stats);
        let learned = learn_mwst_with(stats, self.weight, self.policy, &mut key.lane(AUX_LANE));
        let err = structure_error(&learned, self.truth).expect("same dimension");
        (err as u8 * ERR) | (learned.tie_encountered as u8 * TIE)
    }
}

/// Runs trials for one sample size until `cfg.min_errors` errors or
/// `cfg.max_trials` trials. Trial `t` always draws from the same stream and
/// the stop point is the exact trial that produced the last required error,
/// so the report does not depend on how work was spread over threads.
pub fn simulate_n(truth: &TreeStructure, cfg: &ExperimentConfig, n: u64) -> Result<SimulationReport> {
    if n == 0 {
        return invalid("sample size must be positive");
    }
    let start = Instant::now();
    let runner = TrialRunner {
        truth,
        sampler: Sampler::new(truth, cfg.theta)?,
        channel: Channel::new(cfg.q)?,
        weight: cfg.weight,
        policy: cfg.policy,
        seed: cfg.seed,
        n,
    };
    let (mut trials, mut errors, mut ties) = (0u64, 0u64, 0u64);
    let mut done = false;
    let (mut next_chunk, mut round) = (0u64, 1u64);
    let total_chunks = cfg.max_trials.div_ceil(CHUNK);
    while !done && next_chunk < total_chunks {
        let end = (next_chunk + round).min(total_chunks);
        round = (round * 2).min(MAX_ROUND_CHUNKS);
        let flags = par::map_range_with(
            next_chunk..end,
            || runner.scratch(),
            |scratch, c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(cfg.max_trials);
                (lo..hi).map(|t| runner.run(scratch, t)).collect::<Vec<u8>>()
            },
        );
        next_chunk = end;
        'scan: for chunk in flags {
            for f in chunk {
                trials += 1;
                errors += (f & ERR != 0) as u64;
                ties += (f & TIE != 0) as u64;
                if errors >= cfg.min_errors {
                    done = true;
                    break 'scan;
                }
            }
        }
    }
    let capped = errors < cfg.min_errors;
    if errors == 0 {
        log::warn!("{}: no errors in {trials} trials at n={n}; rate is only bounded by the CI", cfg.structure_label());
    } else if capped {
        log::warn!("{}: only {errors} errors in {trials} trials at n={n} (max_trials reached)", cfg.structure_label());
    }
    let wall_time_s = start.elapsed().as_secs_f64();
    log::info!(
        "{} theta={} q={} n={n}: {errors}/{trials} errors in {wall_time_s:.2}s",
        cfg.structure_label(),
        cfg.theta,
        cfg.q
    );
    Ok(SimulationReport {
        structure: cfg.structure_label(),
        p: truth.p(),
        theta: cfg.theta,
        q: cfg.q,
        n,
        weight: cfg.weight,
        policy: cfg.policy,
        seed: cfg.seed,
        trials,
        errors,
        ties,
        error_rate: errors as f64 / trials as f64,
        wilson_ci_95: wilson_interval(errors, trials, Z_95),
        capped,
        wall_time_s,
    })
}

/// One report per entry of `cfg.n_list`, on `cfg.threads` workers.
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<Vec<SimulationReport>> {
    cfg.validate()?;
    let truth = cfg.tree()?;
    par::with_threads(cfg.threads, || cfg.n_list.iter().map(|&n| simulate_n(&truth, cfg, n)).collect())
}
