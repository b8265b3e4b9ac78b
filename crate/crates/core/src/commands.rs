//! The command implementations behind the `graphpas` binary. Each writes a
//! run manifest before starting work and writes its tables atomically.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use serde::Serialize;

use crate::config::SearchConfig;
use crate::evaluation::{write_tabular, SyntheticEvaluator};
use crate::evolution::FitnessRecord;
use crate::exec::Parallelism;
use crate::history::{write_atomic, SearchHistory};
use crate::landscape::Landscape;
use crate::orchestrator::{run_random_baseline, Search};
use crate::space::SearchSpace;

pub const HISTORY_CSV: &str = "history.csv";
pub const EPOCHS_CSV: &str = "epochs.csv";
pub const BEST_JSON: &str = "best.json";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const PROGRESSION_CSV: &str = "progression.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_JSON: &str = "summary.json";

/// Epochs granted per budget-sized slice in `compare`, so that GraphPAS is
/// stopped by the budget rather than by the epoch count.
const COMPARE_EPOCH_SLACK: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub output: PathBuf,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    pub engine_version: String,
}

impl RunManifest {
    fn begin(command: &str, config_path: Option<&Path>, output: &Path) -> Self {
        Self {
            command: command.to_string(),
            config_path: config_path.map(Path::to_path_buf),
            output: output.to_path_buf(),
            started_unix: unix_now(),
            finished_unix: None,
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let json = serde_json::to_vec_pretty(self)?;
        write_atomic(&dir.join(MANIFEST_JSON), &json)
            .with_context(|| format!("writing manifest into {}", dir.display()))
    }

    fn finish(mut self, dir: &Path) -> anyhow::Result<()> {
        self.finished_unix = Some(unix_now());
        self.write(dir)
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn prepare_dir(dir: &Path, manifest: &RunManifest) -> anyhow::Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    manifest.write(dir)
}

#[derive(Serialize)]
struct BestReport<'a> {
    architecture: String,
    fitness: f64,
    genes: &'a [usize],
    origin: crate::evolution::Origin,
    worker: usize,
    epoch: usize,
    unique_evaluations: usize,
    config: Option<&'a SearchConfig>,
}

fn write_best(
    dir: &Path,
    space: &SearchSpace,
    best: &FitnessRecord,
    history: &SearchHistory,
) -> anyhow::Result<()> {
    let report = BestReport {
        architecture: space.encode(&best.arch),
        fitness: best.fitness,
        genes: best.arch.genes(),
        origin: best.origin,
        worker: best.worker,
        epoch: best.epoch,
        unique_evaluations: history.unique_evaluations(),
        config: history.config.as_ref(),
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    Ok(write_atomic(&dir.join(BEST_JSON), &json)?)
}

pub struct SearchSummary {
    pub best: FitnessRecord,
    pub best_architecture: String,
    pub history: SearchHistory,
}

/// `search --config PATH --out DIR`
pub fn cmd_search(
    config_path: &Path,
    out_dir: &Path,
    par: Parallelism,
) -> anyhow::Result<SearchSummary> {
    let config = SearchConfig::load(config_path)
        .with_context(|| format!("loading config {}", config_path.display()))?;
    let manifest = RunManifest::begin("search", Some(config_path), out_dir);
    prepare_dir(out_dir, &manifest)?;

    let space = config.space()?;
    let evaluator = config.evaluator.build(&space)?;
    let outcome = Search::with_space(config, space.clone(), evaluator.as_ref())?
        .parallelism(par)
        .run()?;
    let history = outcome.history;
    history.write_history_csv(out_dir.join(HISTORY_CSV))?;
    history.write_epoch_csv(out_dir.join(EPOCHS_CSV))?;
    write_best(out_dir, &space, &outcome.best, &history)?;
    manifest.finish(out_dir)?;
    Ok(SearchSummary {
        best_architecture: space.encode(&outcome.best.arch),
        best: outcome.best,
        history,
    })
}

/// `random --budget N --seed S --out DIR [--config PATH]`
pub fn cmd_random(
    config_path: Option<&Path>,
    budget: usize,
    seed: u64,
    out_dir: &Path,
    par: Parallelism,
) -> anyhow::Result<SearchSummary> {
    let config = match config_path {
        Some(p) => {
            SearchConfig::load(p).with_context(|| format!("loading config {}", p.display()))?
        }
        None => SearchConfig::default(),
    };
    let manifest = RunManifest::begin("random", config_path, out_dir);
    prepare_dir(out_dir, &manifest)?;
    let space = config.space()?;
    let evaluator = config.evaluator.build(&space)?;
    let history = run_random_baseline(budget, &space, evaluator.as_ref(), seed, par)?;
    history.write_history_csv(out_dir.join(HISTORY_CSV))?;
    let best = history
        .best
        .clone()
        .context("random search evaluated nothing")?;
    write_best(out_dir, &space, &best, &history)?;
    manifest.finish(out_dir)?;
    Ok(SearchSummary {
        best_architecture: space.encode(&best.arch),
        best,
        history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Win,
    Tie,
    Loss,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedComparison {
    pub seed: u64,
    pub graphpas_evaluations: usize,
    pub random_evaluations: usize,
    pub graphpas_top10: f64,
    pub random_top10: f64,
    pub graphpas_best: f64,
    pub random_best: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    pub budget: usize,
    pub seeds: Vec<SeedComparison>,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    /// Fraction of seeds where GraphPAS's final top-10 mean is at least
    /// random search's.
    pub not_worse_rate: f64,
    #[serde(skip)]
    pub histories: Vec<(SearchHistory, SearchHistory)>,
}

/// `compare --config PATH --budget N --seeds s1,s2,... --out DIR`
pub fn cmd_compare(
    config_path: &Path,
    budget: usize,
    seeds: &[u64],
    out_dir: &Path,
    par: Parallelism,
) -> anyhow::Result<CompareSummary> {
    if budget == 0 {
        bail!("--budget must be at least 1");
    }
    if seeds.is_empty() {
        bail!("--seeds needs at least one seed");
    }
    let base = SearchConfig::load(config_path)
        .with_context(|| format!("loading config {}", config_path.display()))?;
    let manifest = RunManifest::begin("compare", Some(config_path), out_dir);
    prepare_dir(out_dir, &manifest)?;

    let space = base.space()?;
    let evaluator = base.evaluator.build(&space)?;
    let per_epoch = base.workers * base.parents_k;
    let epochs = base
        .epochs
        .max(COMPARE_EPOCH_SLACK * budget.div_ceil(per_epoch));

    let mut progression = csv::Writer::from_writer(Vec::new());
    progression.write_record(["evaluations", "method", "top10_mean", "seed"])?;
    let mut rows = Vec::with_capacity(seeds.len());
    let mut histories = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let config = SearchConfig {
            seed,
            epochs,
            budget_cap: Some(budget),
            ..base.clone()
        };
        let pas = Search::with_space(config, space.clone(), evaluator.as_ref())?
            .parallelism(par)
            .run()?
            .history;
        let rnd = run_random_baseline(budget, &space, evaluator.as_ref(), seed, par)?;
        for h in [&pas, &rnd] {
            for e in &h.evaluations {
                progression.write_record([
                    e.index.to_string(),
                    h.method.label().to_string(),
                    e.top10_mean.to_string(),
                    seed.to_string(),
                ])?;
            }
        }
        let (gp, rd) = (
            pas.final_top10().unwrap_or(0.0),
            rnd.final_top10().unwrap_or(0.0),
        );
        let outcome = match gp.total_cmp(&rd) {
            std::cmp::Ordering::Greater => Outcome::Win,
            std::cmp::Ordering::Equal => Outcome::Tie,
            std::cmp::Ordering::Less => Outcome::Loss,
        };
        rows.push(SeedComparison {
            seed,
            graphpas_evaluations: pas.unique_evaluations(),
            random_evaluations: rnd.unique_evaluations(),
            graphpas_top10: gp,
            random_top10: rd,
            graphpas_best: pas.best.as_ref().map_or(0.0, |b| b.fitness),
            random_best: rnd.best.as_ref().map_or(0.0, |b| b.fitness),
            outcome,
        });
        histories.push((pas, rnd));
    }
    write_atomic(
        &out_dir.join(PROGRESSION_CSV),
        &progression.into_inner().map_err(|e| e.into_error())?,
    )?;

    let mut summary_csv = csv::Writer::from_writer(Vec::new());
    summary_csv.write_record([
        "seed",
        "graphpas_evaluations",
        "random_evaluations",
        "graphpas_top10",
        "random_top10",
        "graphpas_best",
        "random_best",
        "outcome",
    ])?;
    for r in &rows {
        summary_csv.write_record([
            r.seed.to_string(),
            r.graphpas_evaluations.to_string(),
            r.random_evaluations.to_string(),
            r.graphpas_top10.to_string(),
            r.random_top10.to_string(),
            r.graphpas_best.to_string(),
            r.random_best.to_string(),
            format!("{:?}", r.outcome).to_lowercase(),
        ])?;
    }
    write_atomic(
        &out_dir.join(SUMMARY_CSV),
        &summary_csv.into_inner().map_err(|e| e.into_error())?,
    )?;

    let count = |o| rows.iter().filter(|r| r.outcome == o).count();
    let (wins, ties, losses) = (
        count(Outcome::Win),
        count(Outcome::Tie),
        count(Outcome::Loss),
    );
    let summary = CompareSummary {
        budget,
        not_worse_rate: (wins + ties) as f64 / rows.len() as f64,
        seeds: rows,
        wins,
        ties,
        losses,
        histories,
    };
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    write_atomic(&out_dir.join(SUMMARY_JSON), &json)?;
    manifest.finish(out_dir)?;
    Ok(summary)
}

impl CompareSummary {
    pub fn render_table(&self) -> String {
        let mut s = format!(
            "{:>8}  {:>14}  {:>14}  {:>7}\n",
            "seed", "graphpas_top10", "random_top10", "outcome"
        );
        for r in &self.seeds {
            s.push_str(&format!(
                "{:>8}  {:>14.6}  {:>14.6}  {:>7}\n",
                r.seed,
                r.graphpas_top10,
                r.random_top10,
                format!("{:?}", r.outcome).to_lowercase()
            ));
        }
        s.push_str(&format!(
            "budget {}: {} win(s), {} tie(s), {} loss(es); GraphPAS not worse in {:.1}% of seeds\n",
            self.budget,
            self.wins,
            self.ties,
            self.losses,
            100.0 * self.not_worse_rate
        ));
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerateSummary {
    pub rows: usize,
    pub argmax: String,
    pub max_fitness: f64,
    pub top_0_5_percent: f64,
    pub top_1_percent: f64,
    pub top_5_percent: f64,
}

/// `enumerate --layers L --evaluator-seed S --out FILE`
pub fn cmd_enumerate(
    layers: usize,
    evaluator_seed: u64,
    out: &Path,
    cap: u64,
    par: Parallelism,
) -> anyhow::Result<EnumerateSummary> {
    let space = SearchSpace::default_space(layers)?;
    let evaluator = SyntheticEvaluator::new(evaluator_seed);
    let landscape = Landscape::enumerate(&space, &evaluator, cap, par)?;
    let mut rows: Vec<(String, f64)> = landscape
        .entries
        .iter()
        .map(|(a, f)| (space.encode(a), *f))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));

    let mut tmp = out.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    write_tabular(&tmp, rows.iter().map(|(a, f)| (a.as_str(), *f)))
        .and_then(|_| fs::rename(&tmp, out))
        .with_context(|| format!("writing {}", out.display()))?;

    let (best_arch, best) = landscape.argmax().context("empty landscape")?;
    Ok(EnumerateSummary {
        rows: rows.len(),
        argmax: space.encode(best_arch),
        max_fitness: *best,
        top_0_5_percent: landscape.top_fraction_threshold(0.005),
        top_1_percent: landscape.top_fraction_threshold(0.01),
        top_5_percent: landscape.top_fraction_threshold(0.05),
    })
}

impl EnumerateSummary {
    pub fn render(&self) -> String {
        format!(
            "rows: {}\nargmax: {} (fitness {})\ntop 0.5% threshold: {}\ntop 1% threshold: {}\ntop 5% threshold: {}\n",
            self.rows, self.argmax, self.max_fitness, self.top_0_5_percent, self.top_1_percent, self.top_5_percent
        )
    }
}
