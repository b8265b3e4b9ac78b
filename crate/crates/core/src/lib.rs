//! Parallel, sharing-based evolutionary search over graph neural network
//! architecture spaces.
//!
//! Workers explore the space in parallel and share their best finds through
//! a common population. Which components a child mutates is steered by the
//! information entropy of each component across that population: components
//! the population still disagrees on are mutated more often.
//!
//! ```
//! use graphpas::{Search, SearchConfig, SyntheticEvaluator};
//!
//! let config = SearchConfig { layers: 1, epochs: 2, ..SearchConfig::default() };
//! let evaluator = SyntheticEvaluator::new(7);
//! let outcome = Search::new(config, &evaluator)?.run()?;
//! println!("{} -> {}", outcome.history.evaluations.len(), outcome.best.fitness);
//! # Ok::<(), graphpas::Error>(())
//! ```

pub mod commands;
pub mod config;
pub mod entropy;
pub mod error;
pub mod evaluation;
pub mod evolution;
pub mod exec;
pub mod history;
pub mod landscape;
pub mod orchestrator;
pub mod rng;
pub mod space;

pub use config::SearchConfig;
pub use entropy::{
    component_frequencies, entropy_vector, mutation_probabilities, EntropyVector, FrequencyTable,
    MutationProbabilities,
};
pub use error::{Error, EvalError, Result};
pub use evaluation::{
    evaluate_batch, load_tabular, synthetic_fitness, EvaluationResult, Evaluator, EvaluatorConfig,
    ExternalEvaluator, FitnessCache, SyntheticEvaluator, TabularEvaluator,
};
pub use evolution::{
    admission_threshold, mutate, select_top_n, wheel_select, AdmissionReport, FitnessRecord,
    Origin, SharingPopulation,
};
pub use exec::Parallelism;
pub use history::{top10_progression, EpochReport, Method, SearchHistory};
pub use orchestrator::{run_random_baseline, run_search, Search, SearchOutcome};
pub use rng::Stream;
pub use space::{Architecture, ComponentSpec, SearchSpace};
