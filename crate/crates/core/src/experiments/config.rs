use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::learner::{TiePolicy, WeightRule};
use crate::tree::{check_q, check_theta, make_chain, make_hybrid, make_star, parse_tree_file, TreeStructure};

/// One experiment: a tree, model parameters, a list of sample sizes and the
/// learner and stopping rule to use. Serialized as flat JSON; every key is
/// optional and falls back to [`ExperimentConfig::default`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `star`, `chain`, `hybrid`, `p3`, or a path to a tree file.
    pub structure: String,
    /// Vertex count for `star` and `chain`.
    pub p: usize,
    pub theta: f64,
    pub q: f64,
    pub n_list: Vec<u64>,
    pub weight: WeightRule,
    pub policy: TiePolicy,
    pub min_errors: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            structure: "p3".into(),
            p: 10,
            theta: 0.1,
            q: 0.0,
            n_list: vec![300],
            weight: WeightRule::Agreement,
            policy: TiePolicy::RandomTieBreak,
            min_errors: 200,
            max_trials: 100_000_000,
            seed: 0,
            output: None,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        check_q(self.q)?;
        if self.n_list.is_empty() {
            return invalid("n_list must not be empty");
        }
        if self.n_list.contains(&0) {
            return invalid("sample sizes must be positive");
        }
        if self.min_errors == 0 || self.max_trials == 0 {
            return invalid("min_errors and max_trials must be positive");
        }
        self.tree().map(|_| ())
    }

    /// Resolves [`structure`](Self::structure) to a tree.
    pub fn tree(&self) -> Result<TreeStructure> {
        match self.structure.as_str() {
            "star" => make_star(self.p),
            "chain" => make_chain(self.p),
            "hybrid" => Ok(make_hybrid()),
            "p3" => make_chain(3),
            path => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidArgument(format!("structure {path:?}: not a known shape or readable file ({e})")))?;
                parse_tree_file(&text)?
                    .into_iter()
                    .next()
                    .ok_or_else(|| Error::Parse(format!("{path}: no tree found")))
            }
        }
    }

    /// Short label used in reports.
    pub fn structure_label(&self) -> String {
        match self.structure.as_str() {
            "star" | "chain" => format!("{}{}", self.structure, self.p),
            other => other.to_string(),
        }
    }
}
