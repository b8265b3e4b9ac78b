mod common;

use graphpas::entropy::{entropy_vector, mutation_probabilities};
use graphpas::exec::with_threads;
use graphpas::history::progression_of;
use graphpas::{
    run_random_baseline, run_search, top10_progression, FitnessCache, Parallelism, Search,
    SearchConfig, SearchSpace, Stream, SyntheticEvaluator,
};
use proptest::prelude::*;

fn one_layer(seed: u64) -> SearchConfig {
    SearchConfig {
        seed,
        layers: 1,
        init_per_worker: 25,
        epochs: 6,
        ..SearchConfig::default()
    }
}

#[test]
fn defaults_explore_two_thousand() {
    let config = SearchConfig::default();
    let space = config.space().unwrap();
    let ev = SyntheticEvaluator::new(7);
    let search = Search::with_space(config, space, &ev).unwrap();
    let out = search.run().unwrap();
    let h = &out.history;
    assert_eq!(h.unique_evaluations(), out.cache.unique_evaluations());
    assert_eq!(h.unique_evaluations() + h.repeats + h.failures, 2_000);
    assert!(h.unique_evaluations() <= 2_000);
    assert_eq!(h.repeats, h.epochs.iter().map(|r| r.repeats).sum::<usize>());
    assert_eq!(out.history.epochs.len(), 21);
}

#[test]
fn exactly_nominal_without_collisions() {
    // domains large enough that a repeat is practically impossible
    let space = common::space_with_domains(2, &[1_000; 10]);
    let ev = SyntheticEvaluator::new(7);
    let out = Search::with_space(SearchConfig::default(), space, &ev)
        .unwrap()
        .run()
        .unwrap();
    assert_eq!(out.history.repeats, 0);
    assert_eq!(out.cache.unique_evaluations(), 2_000);
}

#[test]
fn log_length_equals_counter_with_collisions() {
    // a tiny space forces plenty of repeats
    let space = common::space_with_domains(1, &[2, 2, 3, 2, 2]);
    let config = SearchConfig {
        layers: 1,
        workers: 3,
        init_per_worker: 10,
        sharing_top_n: 4,
        parents_k: 6,
        mutations_per_worker: vec![1, 2, 3],
        epochs: 8,
        ..SearchConfig::default()
    };
    let ev = SyntheticEvaluator::new(1);
    let out = Search::with_space(config.clone(), space.clone(), &ev)
        .unwrap()
        .run()
        .unwrap();
    assert_eq!(
        out.history.unique_evaluations(),
        out.cache.unique_evaluations()
    );
    assert!(out.history.unique_evaluations() <= config.nominal_budget());
    assert!(out.history.unique_evaluations() <= 48);
}

#[test]
fn runs_agree_across_thread_counts() {
    let config = one_layer(11);
    let space = config.space().unwrap();
    let ev = SyntheticEvaluator::new(7);
    let reference = run_search(&config, &space, &ev, Parallelism::Sequential)
        .unwrap()
        .1;
    for threads in [1, 2, 4, 7] {
        let h = with_threads(Some(threads), || {
            run_search(&config, &space, &ev, Parallelism::Parallel)
        })
        .unwrap()
        .1;
        assert_eq!(h, reference, "{threads} threads");
    }
}

#[test]
fn budget_cap_inside_initialization() {
    let config = SearchConfig {
        budget_cap: Some(400),
        ..SearchConfig::default()
    };
    let ev = SyntheticEvaluator::new(7);
    let out = Search::new(config, &ev).unwrap().run().unwrap();
    assert_eq!(out.history.unique_evaluations(), 400);
    assert_eq!(out.history.epochs.len(), 1);

    let config = SearchConfig {
        budget_cap: Some(250),
        ..SearchConfig::default()
    };
    let out = Search::new(config, &ev).unwrap().run().unwrap();
    assert_eq!(out.history.unique_evaluations(), 250);
}

#[test]
fn budget_cap_mid_epoch() {
    let config = SearchConfig {
        budget_cap: Some(1_234),
        ..SearchConfig::default()
    };
    let ev = SyntheticEvaluator::new(7);
    let out = Search::new(config, &ev).unwrap().run().unwrap();
    assert_eq!(out.history.unique_evaluations(), 1_234);
}

#[test]
fn epoch_guidance_matches_snapshot() {
    let config = one_layer(5);
    let ev = SyntheticEvaluator::new(7);
    let mut search = Search::new(config, &ev).unwrap();
    search.initialize().unwrap();
    for _ in 0..5 {
        let pop = search.population().unwrap();
        let h = entropy_vector(pop.records(), search.space()).unwrap();
        let p = mutation_probabilities(&h);
        let f = pop.threshold().unwrap();
        let report = search.run_epoch().unwrap();
        assert_eq!(report.entropy, h);
        assert_eq!(report.probabilities, p);
        assert_eq!(report.threshold, f);
    }
}

#[test]
fn best_and_top10_never_decrease() {
    for seed in 0..5 {
        let config = one_layer(seed);
        let space = config.space().unwrap();
        let (best, h) = run_search(
            &config,
            &space,
            &SyntheticEvaluator::new(3),
            Parallelism::Parallel,
        )
        .unwrap();
        for w in h.evaluations.windows(2) {
            assert!(w[1].cumulative_best >= w[0].cumulative_best);
            if w[0].index >= 10 {
                assert!(w[1].top10_mean >= w[0].top10_mean);
            }
        }
        for w in h.epochs.windows(2) {
            assert!(w[1].best >= w[0].best);
        }
        assert_eq!(best.fitness, h.evaluations.last().unwrap().cumulative_best);
    }
}

#[test]
fn warm_cache_rerun_is_identical() {
    let config = one_layer(8);
    let ev = SyntheticEvaluator::new(7);
    let first = Search::new(config.clone(), &ev).unwrap().run().unwrap();
    let warm = FitnessCache::with_warm(first.cache.into_entries());
    let second = Search::new(config, &ev)
        .unwrap()
        .with_cache(warm)
        .run()
        .unwrap();
    assert_eq!(second.cache.backend_calls(), 0);
    assert_eq!(second.history, first.history);
}

#[test]
fn random_baseline_is_deterministic_and_distinct() {
    let space = SearchSpace::default_space(1).unwrap();
    let ev = SyntheticEvaluator::new(7);
    let a = run_random_baseline(300, &space, &ev, 4, Parallelism::Parallel).unwrap();
    let b = run_random_baseline(300, &space, &ev, 4, Parallelism::Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.unique_evaluations(), 300);
    let mut keys: Vec<_> = a
        .evaluations
        .iter()
        .map(|e| e.architecture.clone())
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 300);
}

#[test]
fn random_baseline_stops_when_space_runs_out() {
    let space = common::space_with_domains(1, &[2, 1, 3, 1, 2]);
    let h = run_random_baseline(
        100,
        &space,
        &SyntheticEvaluator::new(7),
        1,
        Parallelism::Parallel,
    )
    .unwrap();
    assert_eq!(h.unique_evaluations(), 12);
}

fn resort_oracle(fits: &[f64]) -> Vec<f64> {
    (1..=fits.len())
        .map(|t| {
            let mut prefix = fits[..t].to_vec();
            prefix.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let k = t.min(10);
            prefix[..k].iter().sum::<f64>() / k as f64
        })
        .collect()
}

#[test]
fn progression_matches_resort_oracle() {
    let mut rng = Stream::new(77);
    for _ in 0..1_000 {
        let len = 1 + rng.below_usize(60);
        let fits: Vec<f64> = (0..len).map(|_| rng.next_f64()).collect();
        let got = progression_of(fits.iter().copied()).unwrap();
        for ((t, m), want) in got.iter().zip(resort_oracle(&fits)) {
            assert!((m - want).abs() <= 1e-12 * want.abs().max(1.0), "t={t}");
        }
    }
}

#[test]
fn progression_of_a_search() {
    let config = one_layer(2);
    let space = config.space().unwrap();
    let (_, h) = run_search(
        &config,
        &space,
        &SyntheticEvaluator::new(7),
        Parallelism::Parallel,
    )
    .unwrap();
    let fits: Vec<f64> = h.evaluations.iter().map(|e| e.fitness).collect();
    let got = top10_progression(&h).unwrap();
    for ((_, m), want) in got.iter().zip(resort_oracle(&fits)) {
        assert!((m - want).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_seed_respects_nominal_budget(seed in any::<u64>(), cap in 1usize..=700) {
        let config = SearchConfig { budget_cap: Some(cap), ..one_layer(seed) };
        let space = config.space().unwrap();
        let (_, h) = run_search(&config, &space, &SyntheticEvaluator::new(seed), Parallelism::Parallel).unwrap();
        prop_assert!(h.unique_evaluations() <= cap.min(config.nominal_budget()));
        prop_assert!(h.evaluations.iter().all(|e| (0.0..1.0).contains(&e.fitness)));
    }
}
