//! Learning homogeneous, zero-field Ising tree models from clean or
//! BSC-corrupted samples, together with the closed-form error asymptotics of
//! the maximum-weight-spanning-tree learner and the oracles that check them.
//!
//! Module map:
//!
//! * [`tree`] – spanning trees, canonical structures, Prüfer sampling, ζ.
//! * [`sampling`] – ancestral sampling, the binary symmetric channel and
//!   pairwise sufficient statistics.
//! * [`learner`] – Kruskal MWST with agreement or mutual-information weights
//!   and configurable tie handling.
//! * [`asymptotics`] – exponents, strong large-deviation prefactors,
//!   predictions and the competing non-asymptotic bounds.
//! * [`oracle`] – exact convolutions, enumerations and numeric Sanov
//!   minimizations used as ground truth.
//! * [`experiments`] – Monte Carlo driver, theory tables, figure
//!   reproduction and the oracle suite behind the `treeld` binary.
//!
//! The `parallel` feature (on by default) runs Monte Carlo trials and the
//! larger enumerations on rayon; without it the same code runs sequentially.
//! Results are identical either way.

pub mod asymptotics;
pub mod error;
pub mod experiments;
pub mod learner;
pub mod oracle;
mod par;
pub use par::with_threads;
pub mod rng;
pub mod sampling;
pub mod tree;

pub use error::{Error, Result};
pub use learner::{LearnResult, TiePolicy, WeightRule};
pub use sampling::{PairStats, SampleBatch};
pub use tree::{ModelParams, TreeStructure};
