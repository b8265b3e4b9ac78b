//! Evolutionary operators: the sharing population, roulette parent
//! selection, entropy-guided m-point mutation and threshold admission.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::entropy::MutationProbabilities;
use crate::error::{invalid, Result};
use crate::rng::Stream;
use crate::space::{Architecture, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Init,
    Child,
}

/// An evaluated architecture.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitnessRecord {
    pub arch: Architecture,
    pub fitness: f64,
    pub origin: Origin,
    pub worker: usize,
    pub epoch: usize,
}

impl FitnessRecord {
    pub fn new(
        arch: Architecture,
        fitness: f64,
        origin: Origin,
        worker: usize,
        epoch: usize,
    ) -> Self {
        debug_assert!(
            (0.0..=1.0).contains(&fitness),
            "fitness {fitness} outside [0,1]"
        );
        Self {
            arch,
            fitness,
            origin,
            worker,
            epoch,
        }
    }
}

/// Descending fitness; the stable sort keeps earlier records first on ties.
fn by_fitness_desc(a: &FitnessRecord, b: &FitnessRecord) -> Ordering {
    b.fitness.total_cmp(&a.fitness)
}

/// The `n` best records, best first. Ties go to the earlier record.
pub fn select_top_n(archive: &[FitnessRecord], n: usize) -> Result<Vec<FitnessRecord>> {
    if archive.is_empty() {
        return Err(invalid("cannot select from an empty archive"));
    }
    let mut idx: Vec<usize> = (0..archive.len()).collect();
    idx.sort_by(|&a, &b| by_fitness_desc(&archive[a], &archive[b]));
    Ok(idx
        .into_iter()
        .take(n)
        .map(|i| archive[i].clone())
        .collect())
}

/// Mean fitness of the top `n` records.
pub fn admission_threshold(archive: &[FitnessRecord], n: usize) -> Result<f64> {
    let top = select_top_n(archive, n)?;
    Ok(top.iter().map(|r| r.fitness).sum::<f64>() / top.len() as f64)
}

/// Indices of `k` fitness-proportional draws with replacement. Falls back to
/// uniform draws when every fitness is zero.
pub fn wheel_select_indices(
    population: &[FitnessRecord],
    k: usize,
    rng: &mut Stream,
) -> Result<Vec<usize>> {
    if population.is_empty() {
        return Err(invalid("cannot select parents from an empty population"));
    }
    let mut cumulative = Vec::with_capacity(population.len());
    let mut total = 0.0;
    for r in population {
        total += r.fitness;
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Ok((0..k).map(|_| rng.below_usize(population.len())).collect());
    }
    Ok((0..k)
        .map(|_| {
            let target = rng.next_f64() * total;
            // first slot whose cumulative weight exceeds the target
            let i = cumulative.partition_point(|&c| c <= target);
            i.min(population.len() - 1)
        })
        .collect())
}

pub fn wheel_select(
    population: &[FitnessRecord],
    k: usize,
    rng: &mut Stream,
) -> Result<Vec<FitnessRecord>> {
    Ok(wheel_select_indices(population, k, rng)?
        .into_iter()
        .map(|i| population[i].clone())
        .collect())
}

/// Positions whose domain offers an alternative value.
pub fn eligible_positions(space: &SearchSpace) -> Vec<usize> {
    space
        .components()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| (c.len() >= 2).then_some(i))
        .collect()
}

/// Draw `m` distinct eligible positions, each draw weighted by `probs`
/// renormalized over the positions not yet chosen.
pub fn choose_positions(
    probs: &MutationProbabilities,
    m: usize,
    space: &SearchSpace,
    rng: &mut Stream,
) -> Result<Vec<usize>> {
    let p = probs.values();
    if p.len() != space.positions() {
        return Err(invalid(format!(
            "probability vector has {} entries for {} positions",
            p.len(),
            space.positions()
        )));
    }
    let mut remaining = eligible_positions(space);
    if m == 0 || m > remaining.len() {
        return Err(invalid(format!(
            "cannot mutate {m} position(s); {} are eligible",
            remaining.len()
        )));
    }
    let mut chosen = Vec::with_capacity(m);
    for _ in 0..m {
        let total: f64 = remaining.iter().map(|&i| p[i]).sum();
        let target = rng.next_f64() * total;
        let mut acc = 0.0;
        let mut pick = remaining.len() - 1;
        for (slot, &i) in remaining.iter().enumerate() {
            acc += p[i];
            if target < acc {
                pick = slot;
                break;
            }
        }
        chosen.push(remaining.remove(pick));
    }
    Ok(chosen)
}

/// Mutate exactly `m` positions of `parent`, chosen by `probs`. Each chosen
/// gene moves to a uniformly drawn different value. All position draws come
/// before the value draws.
pub fn mutate(
    parent: &Architecture,
    probs: &MutationProbabilities,
    m: usize,
    space: &SearchSpace,
    rng: &mut Stream,
) -> Result<Architecture> {
    space.check(parent)?;
    let positions = choose_positions(probs, m, space, rng)?;
    let mut child = parent.clone();
    let genes = child.genes_mut();
    for pos in positions {
        let domain = space.components()[pos].len();
        let current = genes[pos];
        let r = rng.below_usize(domain - 1);
        genes[pos] = if r >= current { r + 1 } else { r };
    }
    Ok(child)
}

/// Counts from one merge of children into the sharing population.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AdmissionReport {
    pub admitted: usize,
    pub rejected: usize,
    pub duplicates: usize,
}

/// Append-only archive of records shared by every worker.
#[derive(Debug, Clone)]
pub struct SharingPopulation {
    records: Vec<FitnessRecord>,
    keys: HashSet<String>,
    top_n: usize,
}

impl SharingPopulation {
    pub fn new(top_n: usize) -> Self {
        Self {
            records: Vec::new(),
            keys: HashSet::new(),
            top_n,
        }
    }

    /// Seed with the top-n of `initial`; repeated architectures keep their
    /// first occurrence.
    pub fn from_initial(
        initial: &[FitnessRecord],
        top_n: usize,
        space: &SearchSpace,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let unique: Vec<FitnessRecord> = initial
            .iter()
            .filter(|r| seen.insert(space.encode(&r.arch)))
            .cloned()
            .collect();
        let mut pop = Self::new(top_n);
        for rec in select_top_n(&unique, top_n)? {
            pop.push(rec, space);
        }
        Ok(pop)
    }

    fn push(&mut self, rec: FitnessRecord, space: &SearchSpace) -> bool {
        if self.keys.insert(space.encode(&rec.arch)) {
            self.records.push(rec);
            true
        } else {
            false
        }
    }

    pub fn records(&self) -> &[FitnessRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn top_n(&self) -> usize {
        self.top_n
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.keys.contains(key)
    }

    pub fn threshold(&self) -> Result<f64> {
        admission_threshold(&self.records, self.top_n)
    }

    pub fn top(&self) -> Result<Vec<FitnessRecord>> {
        select_top_n(&self.records, self.top_n)
    }

    /// Admit children whose fitness strictly exceeds `threshold` and whose
    /// architecture is not archived yet, in the order given.
    pub fn merge_children(
        &mut self,
        children: impl IntoIterator<Item = FitnessRecord>,
        threshold: f64,
        space: &SearchSpace,
    ) -> AdmissionReport {
        let mut report = AdmissionReport::default();
        for child in children {
            let key = space.encode(&child.arch);
            if self.keys.contains(&key) {
                report.duplicates += 1;
            } else if child.fitness > threshold {
                self.keys.insert(key);
                self.records.push(child);
                report.admitted += 1;
            } else {
                report.rejected += 1;
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::MutationProbabilities;

    fn rec(genes: Vec<usize>, fitness: f64) -> FitnessRecord {
        FitnessRecord::new(Architecture::new(genes), fitness, Origin::Init, 0, 0)
    }

    fn fits(records: &[FitnessRecord]) -> Vec<f64> {
        records.iter().map(|r| r.fitness).collect()
    }

    #[test]
    fn top_n_selection() {
        let archive = vec![rec(vec![0], 0.9), rec(vec![1], 0.5), rec(vec![2], 0.7)];
        assert_eq!(fits(&select_top_n(&archive, 2).unwrap()), vec![0.9, 0.7]);
        assert_eq!(select_top_n(&archive, 10).unwrap().len(), 3);
        assert!(select_top_n(&[], 1).is_err());
    }

    #[test]
    fn top_n_ties_prefer_earlier() {
        let archive = vec![rec(vec![5], 0.9), rec(vec![1], 0.6), rec(vec![0], 0.6)];
        let top = select_top_n(&archive, 2).unwrap();
        assert_eq!(top[1].arch.genes(), &[1]);
    }

    #[test]
    fn threshold_is_top_mean() {
        let archive = vec![
            rec(vec![0], 0.8),
            rec(vec![1], 0.6),
            rec(vec![2], 0.7),
            rec(vec![3], 0.1),
        ];
        assert!((admission_threshold(&archive, 3).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(admission_threshold(&[rec(vec![0], 0.5)], 20).unwrap(), 0.5);
        assert!(admission_threshold(&[], 3).is_err());
    }

    #[test]
    fn wheel_single_record() {
        let pop = vec![rec(vec![4], 0.3)];
        let mut rng = Stream::new(1);
        let parents = wheel_select(&pop, 50, &mut rng).unwrap();
        assert!(parents.iter().all(|p| p.arch.genes() == [4]));
        assert!(wheel_select(&[], 1, &mut rng).is_err());
    }

    #[test]
    fn zero_weights_skip_to_positive() {
        let pop = vec![rec(vec![0], 0.0), rec(vec![1], 1.0), rec(vec![2], 0.0)];
        let mut rng = Stream::new(2);
        let idx = wheel_select_indices(&pop, 1000, &mut rng).unwrap();
        assert!(idx.iter().all(|&i| i == 1));
    }

    #[test]
    fn mutation_changes_exactly_m() {
        let space = SearchSpace::default_space(2).unwrap();
        let probs = MutationProbabilities::uniform(10);
        let mut rng = Stream::new(5);
        let parent = space.sample_uniform(&mut rng);
        for m in 1..=10 {
            for _ in 0..50 {
                let child = mutate(&parent, &probs, m, &space, &mut rng).unwrap();
                assert!(space.contains(&child));
                assert_eq!(parent.differing_positions(&child).len(), m);
            }
        }
        assert!(mutate(&parent, &probs, 11, &space, &mut rng).is_err());
        assert!(mutate(&parent, &probs, 0, &space, &mut rng).is_err());
    }

    #[test]
    fn single_value_positions_are_never_chosen() {
        use crate::space::ComponentSpec;
        let comps = (0..5)
            .map(|i| {
                let n = if i % 2 == 0 { 1 } else { 3 };
                ComponentSpec::new(format!("c{i}"), (0..n).map(|v| v.to_string()).collect())
                    .unwrap()
            })
            .collect();
        let space = SearchSpace::new(1, comps).unwrap();
        assert_eq!(eligible_positions(&space), vec![1, 3]);
        let probs = MutationProbabilities::uniform(5);
        let parent = Architecture::new(vec![0; 5]);
        let mut rng = Stream::new(9);
        for _ in 0..200 {
            let child = mutate(&parent, &probs, 2, &space, &mut rng).unwrap();
            assert_eq!(parent.differing_positions(&child), vec![1, 3]);
        }
        assert!(mutate(&parent, &probs, 3, &space, &mut rng).is_err());
    }

    #[test]
    fn merge_rules() {
        let space = SearchSpace::default_space(1).unwrap();
        let mut pop = SharingPopulation::from_initial(
            &[rec(vec![0, 0, 0, 0, 0], 0.8), rec(vec![1, 0, 0, 0, 0], 0.6)],
            2,
            &space,
        )
        .unwrap();
        let f = pop.threshold().unwrap();
        assert!((f - 0.7).abs() < 1e-15);
        let report = pop.merge_children(
            vec![
                rec(vec![2, 0, 0, 0, 0], f),
                rec(vec![0, 0, 0, 0, 0], 0.99),
                rec(vec![3, 0, 0, 0, 0], f + 0.01),
                rec(vec![3, 0, 0, 0, 0], f + 0.01),
            ],
            f,
            &space,
        );
        assert_eq!(
            report,
            AdmissionReport {
                admitted: 1,
                rejected: 1,
                duplicates: 2
            }
        );
        assert_eq!(pop.len(), 3);
    }

    #[test]
    fn initial_population_dedups() {
        let space = SearchSpace::default_space(1).unwrap();
        let init = vec![
            rec(vec![0, 0, 0, 0, 0], 0.8),
            rec(vec![0, 0, 0, 0, 0], 0.8),
            rec(vec![1, 0, 0, 0, 0], 0.3),
        ];
        let pop = SharingPopulation::from_initial(&init, 20, &space).unwrap();
        assert_eq!(pop.len(), 2);
    }
}
