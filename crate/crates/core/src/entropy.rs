//! Entropy-guided mutation probabilities.
//!
//! For each component position the sharing population induces a distribution
//! over that component's values. Its Shannon entropy (in bits) measures how
//! unsettled the population still is about that component; a softmax over the
//! per-position entropies gives the probability of picking each position for
//! mutation. Settled components are mutated less often, while every position
//! keeps a nonzero chance.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::evolution::FitnessRecord;
use crate::space::SearchSpace;

/// Value counts at one position of the population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    pub position: usize,
    /// value index -> occurrences; only values that occur are present.
    pub counts: BTreeMap<usize, usize>,
    pub total: usize,
}

impl FrequencyTable {
    /// Shannon entropy in bits of the relative frequencies.
    pub fn entropy_bits(&self) -> f64 {
        let total = self.total as f64;
        let h: f64 = self
            .counts
            .values()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let f = c as f64 / total;
                -f * f.log2()
            })
            .sum();
        // a single outcome gives -1 * log2(1) = -0.0
        h.max(0.0)
    }
}

/// Per-position entropy in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EntropyVector(pub Vec<f64>);

/// Per-position probability of being selected for mutation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MutationProbabilities(pub Vec<f64>);

impl EntropyVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl MutationProbabilities {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0 / len as f64; len])
    }
}

pub fn component_frequencies(
    population: &[FitnessRecord],
    position: usize,
) -> Result<FrequencyTable> {
    if population.is_empty() {
        return Err(invalid("cannot count frequencies over an empty population"));
    }
    let mut counts = BTreeMap::new();
    for rec in population {
        let gene = *rec.arch.genes().get(position).ok_or_else(|| {
            invalid(format!(
                "position {position} is out of range for an architecture of length {}",
                rec.arch.len()
            ))
        })?;
        *counts.entry(gene).or_insert(0) += 1;
    }
    Ok(FrequencyTable {
        position,
        counts,
        total: population.len(),
    })
}

pub fn entropy_vector(population: &[FitnessRecord], space: &SearchSpace) -> Result<EntropyVector> {
    (0..space.positions())
        .map(|i| component_frequencies(population, i).map(|t| t.entropy_bits()))
        .collect::<Result<Vec<_>>>()
        .map(EntropyVector)
}

/// Softmax over the entropy vector (natural exponent, max-subtracted).
pub fn mutation_probabilities(entropy: &EntropyVector) -> MutationProbabilities {
    let h = entropy.values();
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = h.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    MutationProbabilities(exps.into_iter().map(|e| e / sum).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Origin;
    use crate::space::Architecture;

    fn pop(column: &[usize]) -> Vec<FitnessRecord> {
        column
            .iter()
            .map(|&v| FitnessRecord::new(Architecture::new(vec![v]), 0.5, Origin::Init, 0, 0))
            .collect()
    }

    fn entropy_of(counts: &[usize]) -> f64 {
        let column: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(v, &c)| std::iter::repeat_n(v, c))
            .collect();
        component_frequencies(&pop(&column), 0)
            .unwrap()
            .entropy_bits()
    }

    #[test]
    fn frequency_counts() {
        let t = component_frequencies(&pop(&[3; 20]), 0).unwrap();
        assert_eq!(t.counts, BTreeMap::from([(3, 20)]));
        assert_eq!(t.total, 20);
        let t = component_frequencies(&pop(&[0, 0, 1, 1]), 0).unwrap();
        assert_eq!(t.counts, BTreeMap::from([(0, 2), (1, 2)]));
        assert_eq!(t.total, 4);
    }

    #[test]
    fn frequency_errors() {
        assert!(component_frequencies(&[], 0).is_err());
        assert!(component_frequencies(&pop(&[1]), 1).is_err());
    }

    #[test]
    fn fixed_entropies() {
        assert_eq!(entropy_of(&[20]), 0.0);
        assert!((entropy_of(&[10, 10]) - 1.0).abs() < 1e-12);
        assert!((entropy_of(&[10, 5, 5]) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn softmax_fixture() {
        let p = mutation_probabilities(&EntropyVector(vec![0.0, 0.0, 0.0, 0.0, 1.0]));
        let e = std::f64::consts::E;
        for &x in &p.values()[..4] {
            assert!((x - 1.0 / (4.0 + e)).abs() < 1e-15);
            assert!((x - 0.14885).abs() < 1e-5);
        }
        assert!((p.values()[4] - 0.40461).abs() < 1e-5);
    }

    #[test]
    fn equal_entropies_are_uniform() {
        let p = mutation_probabilities(&EntropyVector(vec![1.3; 10]));
        for &x in p.values() {
            assert!((x - 0.1).abs() < 1e-15);
        }
    }
}
