//! The parallel search loop and the random-search baseline.
//!
//! A run proceeds in epochs separated by barriers:
//!
//! 1. Initialization: each of the N workers samples M architectures from its
//!    own stream; all are evaluated and the best n seed the sharing
//!    population.
//! 2. Every epoch takes a snapshot of the sharing population, derives the
//!    entropy vector, the mutation probabilities and the admission threshold
//!    from it, and lets every worker roulette-select k parents and mutate
//!    each of them with its own mutation count.
//! 3. All N*k children are evaluated as one batch in (worker, child) order
//!    and merged into the sharing population at the barrier.
//!
//! Worker streams are only advanced by their owners and every merge happens
//! in a fixed order, so a run is a pure function of its configuration no
//! matter how many threads execute it.

use std::mem;

use crate::config::SearchConfig;
use crate::entropy::{entropy_vector, mutation_probabilities, MutationProbabilities};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_batch, Evaluator, FitnessCache};
use crate::evolution::{
    mutate, wheel_select_indices, AdmissionReport, FitnessRecord, Origin, SharingPopulation,
};
use crate::exec::{self, Parallelism};
use crate::history::{EpochReport, EvaluationEntry, Method, SearchHistory, TopKTracker};
use crate::rng::{mix, Stream};
use crate::space::{Architecture, SearchSpace};

/// Candidates drawn per batch by the random baseline.
const RANDOM_BATCH: usize = 64;

/// Salt separating the baseline's stream from the worker streams.
const RANDOM_STREAM_SALT: u64 = 0x5EED_0000_0000_0000;

/// Log bookkeeping shared by the search and the baseline.
struct Ledger {
    history: SearchHistory,
    tracker: TopKTracker,
}

impl Ledger {
    fn new(method: Method, seed: u64, config: Option<SearchConfig>) -> Self {
        Self {
            history: SearchHistory::new(method, seed, config),
            tracker: TopKTracker::default(),
        }
    }

    fn log(&mut self, space: &SearchSpace, rec: &FitnessRecord) {
        self.tracker.push(rec.fitness);
        let best_so_far = self
            .history
            .best
            .as_ref()
            .map_or(f64::NEG_INFINITY, |b| b.fitness);
        if rec.fitness > best_so_far {
            self.history.best = Some(rec.clone());
        }
        let index = self.history.evaluations.len() + 1;
        self.history.evaluations.push(EvaluationEntry {
            index,
            epoch: rec.epoch,
            worker: rec.worker,
            origin: rec.origin,
            arch: rec.arch.clone(),
            architecture: space.encode(&rec.arch),
            fitness: rec.fitness,
            cumulative_best: self.tracker.max(),
            top10_mean: self.tracker.mean(),
        });
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    failures: usize,
    repeats: usize,
}

/// One GraphPAS run.
pub struct Search<'e> {
    config: SearchConfig,
    space: SearchSpace,
    evaluator: &'e dyn Evaluator,
    par: Parallelism,
    cache: FitnessCache,
    streams: Vec<Stream>,
    population: Option<SharingPopulation>,
    ledger: Ledger,
    epoch: usize,
}

impl<'e> Search<'e> {
    /// A run over the default space with `config.layers` layers.
    pub fn new(config: SearchConfig, evaluator: &'e dyn Evaluator) -> Result<Self> {
        let space = config.space()?;
        Self::with_space(config, space, evaluator)
    }

    pub fn with_space(
        config: SearchConfig,
        space: SearchSpace,
        evaluator: &'e dyn Evaluator,
    ) -> Result<Self> {
        config.validate()?;
        if space.positions() != config.layers * crate::space::COMPONENTS_PER_LAYER {
            return Err(crate::error::invalid(format!(
                "config has {} layer(s) but the space has {}",
                config.layers,
                space.layers()
            )));
        }
        let streams = (0..config.workers)
            .map(|w| Stream::for_worker(config.seed, w))
            .collect();
        let ledger = Ledger::new(Method::GraphPas, config.seed, Some(config.clone()));
        Ok(Self {
            config,
            space,
            evaluator,
            par: Parallelism::default(),
            cache: FitnessCache::new(),
            streams,
            population: None,
            ledger,
            epoch: 0,
        })
    }

    pub fn parallelism(mut self, par: Parallelism) -> Self {
        self.par = par;
        self
    }

    /// Start from a pre-filled cache (e.g. results of an earlier run).
    pub fn with_cache(mut self, cache: FitnessCache) -> Self {
        self.cache = cache;
        self
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn cache(&self) -> &FitnessCache {
        &self.cache
    }

    pub fn population(&self) -> Option<&SharingPopulation> {
        self.population.as_ref()
    }

    pub fn history(&self) -> &SearchHistory {
        &self.ledger.history
    }

    pub fn unique_evaluations(&self) -> usize {
        self.cache.unique_evaluations()
    }

    fn remaining_budget(&self) -> Option<usize> {
        self.config
            .budget_cap
            .map(|cap| cap.saturating_sub(self.cache.unique_evaluations()))
    }

    pub fn budget_exhausted(&self) -> bool {
        self.remaining_budget() == Some(0)
    }

    /// Evaluate `batch` (tagged with worker ids) and log new evaluations.
    /// Returns the successfully scored records and the failure and repeat
    /// counts.
    fn evaluate_tagged(
        &mut self,
        batch: Vec<(usize, Architecture)>,
        origin: Origin,
    ) -> (Vec<FitnessRecord>, Tally) {
        let archs: Vec<Architecture> = batch.iter().map(|(_, a)| a.clone()).collect();
        let limit = self.remaining_budget();
        let results = evaluate_batch(
            &archs,
            &self.space,
            self.evaluator,
            &mut self.cache,
            self.par,
            limit,
        );
        let mut records = Vec::with_capacity(results.len());
        let mut tally = Tally::default();
        for ((worker, _), res) in batch.into_iter().zip(results) {
            match res.fitness {
                Ok(f) => {
                    let rec = FitnessRecord::new(res.arch, f, origin, worker, self.epoch);
                    if res.counted {
                        self.ledger.log(&self.space, &rec);
                    } else {
                        tally.repeats += 1;
                    }
                    records.push(rec);
                }
                Err(e) => {
                    log::warn!(
                        "epoch {} worker {worker}: discarding {}: {e}",
                        self.epoch,
                        self.space.encode(&res.arch)
                    );
                    tally.failures += 1;
                }
            }
        }
        self.ledger.history.failures += tally.failures;
        self.ledger.history.repeats += tally.repeats;
        (records, tally)
    }

    fn report(
        &self,
        probs: MutationProbabilities,
        entropy: crate::entropy::EntropyVector,
        threshold: f64,
        admission: AdmissionReport,
        tally: Tally,
    ) -> EpochReport {
        let pop = self.population.as_ref().expect("initialized");
        EpochReport {
            epoch: self.epoch,
            evaluations: self.cache.unique_evaluations(),
            best: self.ledger.tracker.max(),
            top10_mean: self.ledger.tracker.mean(),
            threshold,
            entropy,
            probabilities: probs,
            admission,
            failures: tally.failures,
            repeats: tally.repeats,
            sharing_population: pop.len(),
        }
    }

    /// Parallel random initialization and construction of the sharing
    /// population.
    pub fn initialize(&mut self) -> Result<&EpochReport> {
        assert!(self.population.is_none(), "initialize called twice");
        let m = self.config.init_per_worker;
        let space = &self.space;
        let streams = mem::take(&mut self.streams);
        let sampled = exec::map_vec(self.par, streams, |mut rng| {
            let archs: Vec<Architecture> = (0..m).map(|_| space.sample_uniform(&mut rng)).collect();
            (rng, archs)
        });
        let mut batch = Vec::with_capacity(self.config.workers * m);
        for (w, (rng, archs)) in sampled.into_iter().enumerate() {
            self.streams.push(rng);
            batch.extend(archs.into_iter().map(|a| (w, a)));
        }
        let (records, tally) = self.evaluate_tagged(batch, Origin::Init);
        if records.is_empty() {
            return Err(Error::EmptyInitialization);
        }
        let pop =
            SharingPopulation::from_initial(&records, self.config.sharing_top_n, &self.space)?;
        let entropy = entropy_vector(pop.records(), &self.space)?;
        let probs = mutation_probabilities(&entropy);
        let threshold = pop.threshold()?;
        self.population = Some(pop);
        let report = self.report(probs, entropy, threshold, AdmissionReport::default(), tally);
        self.ledger.history.epochs.push(report);
        Ok(self.ledger.history.epochs.last().expect("just pushed"))
    }

    /// One search epoch: guidance from the snapshot, parallel child
    /// generation, batch evaluation, merge at the barrier.
    pub fn run_epoch(&mut self) -> Result<&EpochReport> {
        let pop = self
            .population
            .as_ref()
            .ok_or_else(|| crate::error::invalid("run_epoch before initialize"))?;
        self.epoch += 1;
        let snapshot = pop.records();
        let entropy = entropy_vector(snapshot, &self.space)?;
        let probs = mutation_probabilities(&entropy);
        let threshold = pop.threshold()?;

        let k = self.config.parents_k;
        let space = &self.space;
        let probs_ref = &probs;
        let jobs: Vec<(usize, Stream)> = mem::take(&mut self.streams)
            .into_iter()
            .enumerate()
            .collect();
        let mutations = &self.config.mutations_per_worker;
        let produced = exec::map_vec(self.par, jobs, |(w, mut rng)| {
            let children: Result<Vec<Architecture>> = wheel_select_indices(snapshot, k, &mut rng)
                .and_then(|parents| {
                    parents
                        .into_iter()
                        .map(|p| {
                            mutate(&snapshot[p].arch, probs_ref, mutations[w], space, &mut rng)
                        })
                        .collect()
                });
            (rng, children)
        });
        let mut batch = Vec::with_capacity(self.config.workers * k);
        let mut first_err = None;
        for (w, (rng, children)) in produced.into_iter().enumerate() {
            self.streams.push(rng);
            match children {
                Ok(c) => batch.extend(c.into_iter().map(|a| (w, a))),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        if let Some(e) = first_err {
            return Err(e);
        }

        let (children, tally) = self.evaluate_tagged(batch, Origin::Child);
        let admission = self
            .population
            .as_mut()
            .expect("initialized")
            .merge_children(children, threshold, &self.space);
        let report = self.report(probs, entropy, threshold, admission, tally);
        self.ledger.history.epochs.push(report);
        Ok(self.ledger.history.epochs.last().expect("just pushed"))
    }

    /// Initialize, then run epochs until the epoch count or the budget cap
    /// is reached.
    pub fn run(mut self) -> Result<SearchOutcome> {
        self.initialize()?;
        while self.epoch < self.config.epochs && !self.budget_exhausted() {
            self.run_epoch()?;
        }
        let best = self
            .ledger
            .history
            .best
            .clone()
            .ok_or(Error::EmptyInitialization)?;
        Ok(SearchOutcome {
            best,
            history: self.ledger.history,
            cache: self.cache,
        })
    }
}

pub struct SearchOutcome {
    pub best: FitnessRecord,
    pub history: SearchHistory,
    pub cache: FitnessCache,
}

/// Run a full search over `space`.
pub fn run_search(
    config: &SearchConfig,
    space: &SearchSpace,
    evaluator: &dyn Evaluator,
    par: Parallelism,
) -> Result<(FitnessRecord, SearchHistory)> {
    let out = Search::with_space(config.clone(), space.clone(), evaluator)?
        .parallelism(par)
        .run()?;
    Ok((out.best, out.history))
}

/// Uniform random search until `budget` unique architectures have been
/// evaluated, or the space runs out.
pub fn run_random_baseline(
    budget: usize,
    space: &SearchSpace,
    evaluator: &dyn Evaluator,
    seed: u64,
    par: Parallelism,
) -> Result<SearchHistory> {
    if budget == 0 {
        return Err(crate::error::invalid(
            "random search budget must be at least 1",
        ));
    }
    let mut rng = Stream::new(mix(seed ^ RANDOM_STREAM_SALT));
    let mut cache = FitnessCache::new();
    let mut ledger = Ledger::new(Method::Random, seed, None);
    let mut failed = std::collections::HashSet::new();
    let space_size = space.size_u64().unwrap_or(u64::MAX);

    while cache.unique_evaluations() < budget {
        let exhausted =
            |cache: &FitnessCache, failed: &std::collections::HashSet<String>, extra: usize| {
                (cache.unique_evaluations() + failed.len() + extra) as u64 >= space_size
            };
        if exhausted(&cache, &failed, 0) {
            log::warn!(
                "random search exhausted the space after {} evaluations (budget {budget})",
                cache.unique_evaluations()
            );
            break;
        }
        let want = (budget - cache.unique_evaluations()).min(RANDOM_BATCH);
        let mut keys = std::collections::HashSet::new();
        let mut batch = Vec::with_capacity(want);
        while batch.len() < want && !exhausted(&cache, &failed, batch.len()) {
            let arch = space.sample_uniform(&mut rng);
            let key = space.encode(&arch);
            if cache.get(&key).is_none() && !failed.contains(&key) && keys.insert(key) {
                batch.push(arch);
            }
        }
        let results = evaluate_batch(&batch, space, evaluator, &mut cache, par, None);
        for res in results {
            match res.fitness {
                Ok(f) => ledger.log(space, &FitnessRecord::new(res.arch, f, Origin::Init, 0, 0)),
                Err(e) => {
                    log::warn!("random search: discarding {}: {e}", space.encode(&res.arch));
                    failed.insert(space.encode(&res.arch));
                    ledger.history.failures += 1;
                }
            }
        }
    }
    Ok(ledger.history)
}
