//! Fitness evaluation: the evaluator contract, the run-level fitness cache
//! that doubles as the budget counter, and three backends.
//!
//! * [`SyntheticEvaluator`] is a deterministic splitmix64 landscape for desk
//!   experiments.
//! * [`TabularEvaluator`] looks fitness up in a precomputed file.
//! * [`ExternalEvaluator`] talks to a child process over newline-delimited
//!   JSON (see [`protocol`]).

mod cache;
mod external;
pub mod protocol;
mod synthetic;
mod tabular;

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use cache::FitnessCache;
pub use external::ExternalEvaluator;
pub use synthetic::{synthetic_fitness, SyntheticEvaluator, INTERACTION_WEIGHT};
pub use tabular::{load_tabular, write_tabular, TabularEvaluator};

use crate::error::{EvalError, Result};
use crate::exec::{self, Parallelism};
use crate::space::{Architecture, SearchSpace};

/// Which backend scores architectures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EvaluatorConfig {
    Synthetic {
        seed: u64,
    },
    Tabular {
        path: PathBuf,
    },
    External {
        command: Vec<String>,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: f64,
    },
}

fn default_timeout_secs() -> f64 {
    600.0
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        EvaluatorConfig::Synthetic { seed: 7 }
    }
}

impl EvaluatorConfig {
    pub fn build(&self, space: &SearchSpace) -> Result<Box<dyn Evaluator>> {
        Ok(match self {
            EvaluatorConfig::Synthetic { seed } => Box::new(SyntheticEvaluator::new(*seed)),
            EvaluatorConfig::Tabular { path } => Box::new(load_tabular(path, space)?),
            EvaluatorConfig::External {
                command,
                timeout_secs,
            } => Box::new(ExternalEvaluator::new(
                command.clone(),
                *timeout_secs,
                space.clone(),
            )?),
        })
    }
}

/// Scores architectures with a validation-style metric in `[0, 1]`.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, arch: &Architecture) -> Result<f64, EvalError>;

    /// Score a batch; results are in input order. Backends that can pipeline
    /// requests override this.
    fn evaluate_many(
        &self,
        archs: &[Architecture],
        par: Parallelism,
    ) -> Vec<Result<f64, EvalError>> {
        exec::map_slice(par, archs, |a| self.evaluate(a))
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate(&self, arch: &Architecture) -> Result<f64, EvalError> {
        (**self).evaluate(arch)
    }

    fn evaluate_many(
        &self,
        archs: &[Architecture],
        par: Parallelism,
    ) -> Vec<Result<f64, EvalError>> {
        (**self).evaluate_many(archs, par)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, arch: &Architecture) -> Result<f64, EvalError> {
        (**self).evaluate(arch)
    }

    fn evaluate_many(
        &self,
        archs: &[Architecture],
        par: Parallelism,
    ) -> Vec<Result<f64, EvalError>> {
        (**self).evaluate_many(archs, par)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub arch: Architecture,
    pub fitness: Result<f64, EvalError>,
    /// Served without calling the backend.
    pub cached: bool,
    /// First evaluation of this architecture in the run; counts against the
    /// budget.
    pub counted: bool,
    pub wall_secs: f64,
}

/// Evaluate `archs` in order through `cache`.
///
/// At most `limit` architectures new to this run are evaluated; the batch is
/// cut just before the first new architecture past the limit, so the
/// returned vector may be shorter than the input. Failures are reported per
/// entry and never counted.
pub fn evaluate_batch(
    archs: &[Architecture],
    space: &SearchSpace,
    evaluator: &dyn Evaluator,
    cache: &mut FitnessCache,
    par: Parallelism,
    limit: Option<usize>,
) -> Vec<EvaluationResult> {
    enum Slot {
        Known(f64),
        Miss(usize),
        Repeat(usize),
    }

    let mut slots = Vec::with_capacity(archs.len());
    let mut misses: Vec<(String, &Architecture)> = Vec::new();
    let mut pending: HashMap<String, usize> = HashMap::new();
    for arch in archs {
        debug_assert!(space.contains(arch));
        let key = space.encode(arch);
        if let Some(f) = cache.get(&key) {
            slots.push(Slot::Known(f));
        } else if let Some(&m) = pending.get(&key) {
            slots.push(Slot::Repeat(m));
        } else {
            if limit.is_some_and(|l| misses.len() >= l) {
                break;
            }
            pending.insert(key.clone(), misses.len());
            slots.push(Slot::Miss(misses.len()));
            misses.push((key, arch));
        }
    }

    // warm entries skip the backend
    let mut outcomes: Vec<Option<(Result<f64, EvalError>, bool)>> = misses
        .iter()
        .map(|(k, _)| cache.warm(k).map(|f| (Ok(f), true)))
        .collect();
    let cold: Vec<usize> = (0..misses.len())
        .filter(|&i| outcomes[i].is_none())
        .collect();
    let started = Instant::now();
    if !cold.is_empty() {
        let batch: Vec<Architecture> = cold.iter().map(|&i| misses[i].1.clone()).collect();
        let scored = evaluator.evaluate_many(&batch, par);
        debug_assert_eq!(scored.len(), batch.len());
        cache.record_backend_calls(batch.len());
        for (&i, res) in cold.iter().zip(scored) {
            let res = res.and_then(check_range);
            outcomes[i] = Some((res, false));
        }
    }
    let wall = started.elapsed().as_secs_f64() / cold.len().max(1) as f64;

    for ((key, _), outcome) in misses.iter().zip(&outcomes) {
        if let Some((Ok(f), _)) = outcome {
            cache.insert(key.clone(), *f);
        }
    }

    slots
        .into_iter()
        .zip(archs)
        .map(|(slot, arch)| {
            let (fitness, cached, counted, wall_secs) = match slot {
                Slot::Known(f) => (Ok(f), true, false, 0.0),
                Slot::Miss(m) => {
                    let (res, warm) = outcomes[m].clone().expect("every miss resolved");
                    let counted = res.is_ok();
                    (res, warm, counted, if warm { 0.0 } else { wall })
                }
                Slot::Repeat(m) => (
                    outcomes[m].clone().expect("every miss resolved").0,
                    true,
                    false,
                    0.0,
                ),
            };
            EvaluationResult {
                arch: arch.clone(),
                fitness,
                cached,
                counted,
                wall_secs,
            }
        })
        .collect()
}

fn check_range(f: f64) -> Result<f64, EvalError> {
    if f.is_finite() && (0.0..=1.0).contains(&f) {
        Ok(f)
    } else {
        Err(EvalError::Failure(format!("fitness {f} outside [0, 1]")))
    }
}
