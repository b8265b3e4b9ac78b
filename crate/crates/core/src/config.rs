//! Search configuration, loaded from JSON. Missing keys take the defaults
//! below; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::EvaluatorConfig;
use crate::evolution::eligible_positions;
use crate::space::SearchSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub seed: u64,
    /// Parallel workers, N.
    pub workers: usize,
    /// GNN layers, l.
    pub layers: usize,
    /// Random architectures each worker evaluates at start-up, M.
    pub init_per_worker: usize,
    /// Size of the top view of the sharing population, n.
    pub sharing_top_n: usize,
    /// Parents (and children) per worker per epoch, k.
    pub parents_k: usize,
    /// Mutated positions per child, one entry per worker.
    pub mutations_per_worker: Vec<usize>,
    pub epochs: usize,
    pub evaluator: EvaluatorConfig,
    /// Stop once this many unique architectures have been evaluated.
    pub budget_cap: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 4,
            layers: 2,
            init_per_worker: 100,
            sharing_top_n: 20,
            parents_k: 20,
            mutations_per_worker: vec![1, 2, 3, 4],
            epochs: 20,
            evaluator: EvaluatorConfig::default(),
            budget_cap: None,
        }
    }
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

impl SearchConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: SearchConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let mut key = e.path().to_string();
            let msg = e.into_inner().to_string();
            // tagged enums buffer their content, losing the inner path
            if let Some(field) = msg
                .strip_prefix("unknown field `")
                .and_then(|rest| rest.split('`').next())
            {
                if key == "." {
                    key = field.to_string();
                } else if !key.ends_with(field) {
                    key = format!("{key}.{field}");
                }
            }
            config_err(&key, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn space(&self) -> Result<SearchSpace> {
        SearchSpace::default_space(self.layers)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(config_err("workers", "must be at least 1"));
        }
        if self.layers == 0 {
            return Err(config_err("layers", "must be at least 1"));
        }
        if self.init_per_worker == 0 {
            return Err(config_err("init_per_worker", "must be at least 1"));
        }
        if self.sharing_top_n == 0 {
            return Err(config_err("sharing_top_n", "must be at least 1"));
        }
        if self.parents_k == 0 {
            return Err(config_err("parents_k", "must be at least 1"));
        }
        if self.mutations_per_worker.len() != self.workers {
            return Err(config_err(
                "mutations_per_worker",
                format!(
                    "length mismatch: {} entries for {} workers",
                    self.mutations_per_worker.len(),
                    self.workers
                ),
            ));
        }
        let eligible = eligible_positions(&self.space()?).len();
        if let Some(&m) = self
            .mutations_per_worker
            .iter()
            .find(|&&m| m == 0 || m > eligible)
        {
            return Err(config_err(
                "mutations_per_worker",
                format!("{m} is outside 1..={eligible}"),
            ));
        }
        if self.budget_cap == Some(0) {
            return Err(config_err("budget_cap", "must be at least 1 when set"));
        }
        if let EvaluatorConfig::External {
            command,
            timeout_secs,
        } = &self.evaluator
        {
            if command.is_empty() {
                return Err(config_err("evaluator.command", "must not be empty"));
            }
            if !(timeout_secs.is_finite() && *timeout_secs > 0.0) {
                return Err(config_err("evaluator.timeout_secs", "must be positive"));
            }
        }
        Ok(())
    }

    /// Unique evaluations issued when no architecture repeats.
    pub fn nominal_budget(&self) -> usize {
        self.workers * self.init_per_worker + self.epochs * self.workers * self.parents_k
    }
}
