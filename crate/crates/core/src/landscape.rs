//! Exhaustive views of small spaces: fitness of every architecture and the
//! thresholds for its top fractions.

use crate::error::Result;
use crate::evaluation::Evaluator;
use crate::exec::{self, Parallelism};
use crate::space::{Architecture, SearchSpace};

pub struct Landscape {
    /// `(architecture, fitness)` in enumeration order; failures are skipped.
    pub entries: Vec<(Architecture, f64)>,
    /// All fitnesses, best first.
    pub sorted_desc: Vec<f64>,
}

impl Landscape {
    pub fn enumerate(
        space: &SearchSpace,
        evaluator: &dyn Evaluator,
        cap: u64,
        par: Parallelism,
    ) -> Result<Self> {
        let archs: Vec<Architecture> = space.enumerate(cap)?.collect();
        let scores = evaluator.evaluate_many(&archs, par);
        let entries: Vec<(Architecture, f64)> = archs
            .into_iter()
            .zip(scores)
            .filter_map(|(a, s)| s.ok().map(|f| (a, f)))
            .collect();
        let mut sorted_desc: Vec<f64> = exec::map_slice(par, &entries, |(_, f)| *f);
        sorted_desc.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            entries,
            sorted_desc,
        })
    }

    pub fn len(&self) -> usize {
        self.sorted_desc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_desc.is_empty()
    }

    pub fn argmax(&self) -> Option<&(Architecture, f64)> {
        self.entries
            .iter()
            .reduce(|best, e| if e.1 > best.1 { e } else { best })
    }

    /// Smallest fitness among the best `floor(fraction * len)` (at least one)
    /// architectures. A fitness lies in the top `fraction` iff it is at least
    /// this value.
    pub fn top_fraction_threshold(&self, fraction: f64) -> f64 {
        let count = ((fraction * self.len() as f64).floor() as usize).clamp(1, self.len());
        self.sorted_desc[count - 1]
    }
}
