#![allow(dead_code)]

use graphpas::{Architecture, ComponentSpec, FitnessRecord, Origin, SearchSpace, Stream};

/// Upper 0.001 critical values of the chi-square distribution, indexed by
/// degrees of freedom (scipy.stats.chi2.ppf(0.999, df)).
pub fn chi2_critical_0001(df: usize) -> f64 {
    match df {
        1 => 10.827566170662733,
        2 => 13.815510557964274,
        3 => 16.26623619623813,
        4 => 18.46682695290317,
        5 => 20.515005652432873,
        6 => 22.457744484825323,
        7 => 24.321886347856854,
        8 => 26.12448155837614,
        9 => 27.877164871256568,
        _ => panic!("no tabulated critical value for df={df}"),
    }
}

pub fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum()
}

/// A space with `layers` layers and the given domain size per position.
pub fn space_with_domains(layers: usize, sizes: &[usize]) -> SearchSpace {
    let comps = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            ComponentSpec::new(format!("c{i}"), (0..n).map(|v| format!("v{v}")).collect()).unwrap()
        })
        .collect();
    SearchSpace::new(layers, comps).unwrap()
}

pub fn random_population(space: &SearchSpace, size: usize, rng: &mut Stream) -> Vec<FitnessRecord> {
    (0..size)
        .map(|_| {
            let arch = space.sample_uniform(rng);
            FitnessRecord::new(arch, rng.next_f64(), Origin::Init, 0, 0)
        })
        .collect()
}

pub fn record(genes: Vec<usize>, fitness: f64) -> FitnessRecord {
    FitnessRecord::new(Architecture::new(genes), fitness, Origin::Init, 0, 0)
}

pub fn stub_path() -> &'static str {
    env!("CARGO_BIN_EXE_graphpas-stub-evaluator")
}
