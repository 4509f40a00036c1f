//! `treeld`: theory curves, Monte Carlo simulations, oracle checks and figure
//! reproduction for MWST learning of homogeneous Ising trees.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use treeld_core::experiments::{
    all_pass, reproduce, run_oracle_suite, run_simulation, run_theory, write_csv_file, write_records,
    ClosedForms, ExperimentConfig, Figure, ReproduceOptions,
};
use treeld_core::{TiePolicy, WeightRule};

#[derive(Parser)]
#[command(name = "treeld", version, about = "Error asymptotics of tree-structured Ising model learning")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted error probability and competing bounds per sample size.
    Theory(Common),
    /// Monte Carlo error rate per sample size.
    Simulate(Common),
    /// Run every oracle check; prints one JSON record per check.
    Oracle(Common),
    /// Write the CSV files behind a figure (fig1a … fig3c, or `all`).
    Reproduce {
        #[arg(required = true)]
        figures: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON experiment config; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    /// star | chain | hybrid | p3 | path to a tree file.
    #[arg(long)]
    structure: Option<String>,
    /// Vertex count for star and chain.
    #[arg(long)]
    p: Option<usize>,
    /// agreement | mi
    #[arg(long)]
    weight: Option<WeightRule>,
    /// random | conservative | lexicographic
    #[arg(long)]
    policy: Option<TiePolicy>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        macro_rules! take {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field.clone() { cfg.$target = v; })*
            };
        }
        take!(theta => theta, q => q, n => n_list, structure => structure, p => p, weight => weight,
              policy => policy, seed => seed, min_errors => min_errors, max_trials => max_trials);
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if self.out.is_some() {
            cfg.output = self.out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit<R: treeld_core::experiments::CsvRecord>(out: Option<&PathBuf>, file: &str, rows: &[R]) -> Result<()> {
    match out {
        Some(dir) => {
            let path = dir.join(file);
            write_csv_file(&path, rows)?;
            log::info!("wrote {}", path.display());
        }
        None => write_records(std::io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Command::Theory(c) => {
            let cfg = c.config()?;
            emit(cfg.output.as_ref(), "theory.csv", &run_theory(&cfg)?)?;
        }
        Command::Simulate(c) => {
            let cfg = c.config()?;
            emit(cfg.output.as_ref(), "simulate.csv", &run_simulation(&cfg)?)?;
        }
        Command::Oracle(c) => {
            let records = treeld_core::with_threads(c.threads, || run_oracle_suite(&ClosedForms::library()));
            let mut text = String::new();
            for r in &records {
                text.push_str(&serde_json::to_string(r)?);
                text.push('\n');
            }
            match &c.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join("oracle.jsonl"), &text)?;
                }
                None => std::io::stdout().lock().write_all(text.as_bytes())?,
            }
            let failed: Vec<_> = records.iter().filter(|r| !r.pass).collect();
            for f in &failed {
                log::error!(
                    "FAIL {} {}: expected {} got {} (delta {:e}, tolerance {:e})",
                    f.name,
                    f.inputs,
                    f.expected,
                    f.actual,
                    (f.actual - f.expected).abs(),
                    f.tolerance
                );
            }
            log::info!("{} checks, {} failed", records.len(), failed.len());
            return Ok(all_pass(&records));
        }
        Command::Reproduce { figures, common } => {
            let cfg = common.config()?;
            let figs: Vec<Figure> = if figures.iter().any(|f| f == "all") {
                Figure::ALL.to_vec()
            } else {
                figures.iter().map(|f| f.parse()).collect::<Result<_, _>>()?
            };
            let opts = ReproduceOptions {
                seed: cfg.seed,
                min_errors: cfg.min_errors,
                max_trials: cfg.max_trials,
                threads: cfg.threads,
                n_list: common.n.clone(),
            };
            let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("results"));
            for fig in figs {
                for path in reproduce(fig, &opts, &out)? {
                    println!("{}", path.display());
                }
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(2)
        }
    }
}
