use std::collections::HashMap;

/// Fitness memo for one run, keyed by canonical architecture string.
///
/// The number of distinct entries is the unique-evaluation budget counter.
/// Warm entries (e.g. from an earlier run) answer lookups without touching
/// the backend but still count once when first requested.
#[derive(Debug, Clone, Default)]
pub struct FitnessCache {
    entries: HashMap<String, f64>,
    warm: HashMap<String, f64>,
    backend_calls: usize,
}

impl FitnessCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_warm(warm: HashMap<String, f64>) -> Self {
        Self {
            warm,
            ..Self::default()
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub(crate) fn warm(&self, key: &str) -> Option<f64> {
        self.warm.get(key).copied()
    }

    pub(crate) fn insert(&mut self, key: String, fitness: f64) {
        self.entries.insert(key, fitness);
    }

    pub(crate) fn record_backend_calls(&mut self, n: usize) {
        self.backend_calls += n;
    }

    /// Distinct architectures evaluated in this run.
    pub fn unique_evaluations(&self) -> usize {
        self.entries.len()
    }

    /// Architectures sent to the backend, including failures.
    pub fn backend_calls(&self) -> usize {
        self.backend_calls
    }

    pub fn entries(&self) -> &HashMap<String, f64> {
        &self.entries
    }

    pub fn into_entries(self) -> HashMap<String, f64> {
        self.entries
    }
}
