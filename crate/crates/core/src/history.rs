//! Run histories, the top-10 progression metric and their CSV/JSON forms.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::SearchConfig;
use crate::entropy::{EntropyVector, MutationProbabilities};
use crate::error::{invalid, Result};
use crate::evolution::{AdmissionReport, FitnessRecord, Origin};
use crate::space::Architecture;

/// How many of the best fitnesses the progression metric averages.
pub const TOP_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[serde(rename = "graphpas")]
    GraphPas,
    Random,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::GraphPas => "graphpas",
            Method::Random => "random",
        }
    }
}

/// Running mean of the best `TOP_K` values seen.
#[derive(Debug, Clone, Default)]
pub struct TopKTracker {
    best: Vec<f64>,
}

impl TopKTracker {
    pub fn push(&mut self, fitness: f64) {
        let pos = self.best.partition_point(|&b| b >= fitness);
        if pos < TOP_K {
            self.best.insert(pos, fitness);
            self.best.truncate(TOP_K);
        }
    }

    pub fn mean(&self) -> f64 {
        self.best.iter().sum::<f64>() / self.best.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.best.first().copied().unwrap_or(f64::NAN)
    }
}

/// One unique evaluation in a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationEntry {
    /// 1-based position in the unique-evaluation sequence.
    pub index: usize,
    pub epoch: usize,
    pub worker: usize,
    pub origin: Origin,
    #[serde(skip)]
    pub arch: Architecture,
    pub architecture: String,
    pub fitness: f64,
    pub cumulative_best: f64,
    pub top10_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochReport {
    /// 0 is initialization.
    pub epoch: usize,
    /// Unique evaluations so far.
    pub evaluations: usize,
    pub best: f64,
    pub top10_mean: f64,
    /// Admission threshold in force during the epoch.
    pub threshold: f64,
    pub entropy: EntropyVector,
    pub probabilities: MutationProbabilities,
    pub admission: AdmissionReport,
    /// Evaluations that failed this epoch.
    pub failures: usize,
    /// Generated architectures that were already evaluated.
    pub repeats: usize,
    pub sharing_population: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHistory {
    pub method: Method,
    pub seed: u64,
    pub config: Option<SearchConfig>,
    pub epochs: Vec<EpochReport>,
    pub evaluations: Vec<EvaluationEntry>,
    pub best: Option<FitnessRecord>,
    pub failures: usize,
    pub repeats: usize,
}

impl SearchHistory {
    pub(crate) fn new(method: Method, seed: u64, config: Option<SearchConfig>) -> Self {
        Self {
            method,
            seed,
            config,
            epochs: Vec::new(),
            evaluations: Vec::new(),
            best: None,
            failures: 0,
            repeats: 0,
        }
    }

    pub fn unique_evaluations(&self) -> usize {
        self.evaluations.len()
    }

    pub fn final_top10(&self) -> Option<f64> {
        self.evaluations.last().map(|e| e.top10_mean)
    }

    /// First evaluation count at which the best fitness so far reaches
    /// `threshold`.
    pub fn evaluations_to_reach(&self, threshold: f64) -> Option<usize> {
        self.evaluations
            .iter()
            .find(|e| e.cumulative_best >= threshold)
            .map(|e| e.index)
    }

    pub fn write_history_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record([
            "index",
            "epoch",
            "worker",
            "architecture",
            "fitness",
            "cumulative_best",
            "top10_mean",
        ])?;
        for e in &self.evaluations {
            wtr.write_record([
                e.index.to_string(),
                e.epoch.to_string(),
                e.worker.to_string(),
                e.architecture.clone(),
                e.fitness.to_string(),
                e.cumulative_best.to_string(),
                e.top10_mean.to_string(),
            ])?;
        }
        write_atomic(path.as_ref(), &finish(wtr)?)
    }

    pub fn write_epoch_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let positions = self.epochs.first().map_or(0, |r| r.entropy.values().len());
        let mut header: Vec<String> = ["epoch", "evals", "best", "top10_mean", "F"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((1..=positions).map(|i| format!("h_{i}")));
        header.extend((1..=positions).map(|i| format!("p_{i}")));
        header.extend(
            ["admitted", "rejected", "duplicates", "failures", "repeats"].map(String::from),
        );
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(&header)?;
        for r in &self.epochs {
            let mut row = vec![
                r.epoch.to_string(),
                r.evaluations.to_string(),
                r.best.to_string(),
                r.top10_mean.to_string(),
                r.threshold.to_string(),
            ];
            row.extend(r.entropy.values().iter().map(f64::to_string));
            row.extend(r.probabilities.values().iter().map(f64::to_string));
            row.extend([
                r.admission.admitted.to_string(),
                r.admission.rejected.to_string(),
                r.admission.duplicates.to_string(),
                r.failures.to_string(),
                r.repeats.to_string(),
            ]);
            wtr.write_record(&row)?;
        }
        write_atomic(path.as_ref(), &finish(wtr)?)
    }
}

fn finish(wtr: csv::Writer<Vec<u8>>) -> std::io::Result<Vec<u8>> {
    wtr.into_inner().map_err(|e| e.into_error())
}

/// Write through a temporary sibling so a failed write leaves no partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    let res = fs::File::create(tmp).and_then(|mut f| {
        f.write_all(bytes)?;
        f.sync_all()
    });
    match res.and_then(|_| fs::rename(tmp, path)) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(tmp);
            Err(e)
        }
    }
}

/// `(t, mean of the best min(t, 10) fitnesses among the first t)` for every
/// evaluation count `t`.
pub fn top10_progression(history: &SearchHistory) -> Result<Vec<(usize, f64)>> {
    progression_of(history.evaluations.iter().map(|e| e.fitness))
}

pub fn progression_of(fitnesses: impl IntoIterator<Item = f64>) -> Result<Vec<(usize, f64)>> {
    let mut tracker = TopKTracker::default();
    let out: Vec<(usize, f64)> = fitnesses
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            tracker.push(f);
            (i + 1, tracker.mean())
        })
        .collect();
    if out.is_empty() {
        return Err(invalid("top-10 progression of an empty history"));
    }
    Ok(out)
}
