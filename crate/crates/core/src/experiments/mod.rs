//! Monte Carlo simulation, theory tables, figure reproduction and the oracle
//! suite: everything the `treeld` binary exposes.

pub mod config;
pub mod reproduce;
pub mod simulate;
pub mod suite;
pub mod table;
pub mod theory;

pub use config::ExperimentConfig;
pub use reproduce::{reproduce, Figure, ReproduceOptions};
pub use simulate::{run_simulation, simulate_n, wilson_interval, SimulationReport};
pub use suite::{all_pass, run_oracle_suite, CheckRecord, ClosedForms};
pub use table::{to_csv_string, write_csv_file, write_records, CsvRecord};
pub use theory::{run_theory, TheoryRow};
