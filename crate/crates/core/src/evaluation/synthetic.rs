use crate::error::EvalError;
use crate::rng::mix;
use crate::space::Architecture;

use super::Evaluator;

/// Weight of the pairwise terms between neighbouring genes.
pub const INTERACTION_WEIGHT: f64 = 0.3;

const UNARY: u64 = 1;
const PAIRWISE: u64 = 2;

fn chain(seed: u64, fields: &[u64]) -> u64 {
    fields.iter().fold(seed, |h, &f| mix(h.wrapping_add(f)))
}

fn unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Deterministic fitness landscape in `[0, 1)`.
///
/// Each gene contributes a hashed unary term, and each pair of neighbouring
/// genes a hashed interaction term weighted by [`INTERACTION_WEIGHT`]; the
/// sum is normalized by the total weight. Only integer hashing and a fixed
/// summation order are involved, so results are bit-identical everywhere.
pub fn synthetic_fitness(arch: &Architecture, seed: u64) -> f64 {
    let genes = arch.genes();
    let p = genes.len();
    let unary: f64 = genes
        .iter()
        .enumerate()
        .map(|(i, &v)| unit(chain(seed, &[UNARY, i as u64, v as u64])))
        .sum();
    let pairwise: f64 = genes
        .windows(2)
        .enumerate()
        .map(|(i, w)| unit(chain(seed, &[PAIRWISE, i as u64, w[0] as u64, w[1] as u64])))
        .sum();
    let weight = p as f64 + INTERACTION_WEIGHT * p.saturating_sub(1) as f64;
    (unary + INTERACTION_WEIGHT * pairwise) / weight
}

#[derive(Debug, Clone, Copy)]
pub struct SyntheticEvaluator {
    seed: u64,
}

impl SyntheticEvaluator {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Evaluator for SyntheticEvaluator {
    fn evaluate(&self, arch: &Architecture) -> Result<f64, EvalError> {
        Ok(synthetic_fitness(arch, self.seed))
    }
}
