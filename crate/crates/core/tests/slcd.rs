use knnclust::adabox::adabox_cluster;
use knnclust::bench::Layout;
use knnclust::data::canonicalize;
use knnclust::graph_scope::GsWeights;
use knnclust::slcd::{
    density_aware_sample, density_bins, deploy, random_search, replay, slcd_run, Objective, SampleSpec, SearchSpace,
    SlcdParams,
};
use knnclust::{Dataset, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_space() -> SearchSpace {
    SearchSpace {
        k_graph: (5, 12),
        m: (1, 3),
        r: (4, 16),
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn every_bin_meets_its_floor(
        scores in prop::collection::vec(0u32..20, 20..300),
        n_s in 1usize..120,
        bins in 1usize..12,
        floor in 1usize..4,
        seed in any::<u64>(),
    ) {
        let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
        let spec = SampleSpec { n_s, bins, floor };
        let picked = density_aware_sample(&scores, &spec, seed).unwrap();
        let n = scores.len();
        prop_assert_eq!(picked.len(), n_s.min(n));
        prop_assert!(picked.windows(2).all(|w| w[0] < w[1]));
        let bin_of = density_bins(&scores, bins);
        let nonempty = (0..bins).filter(|b| bin_of.contains(b)).count();
        // the floor is only promised while the budget covers every nonempty bin
        if n_s >= nonempty * floor {
            for b in 0..bins {
                let size = bin_of.iter().filter(|&&x| x == b).count();
                let got = picked.iter().filter(|&&i| bin_of[i] == b).count();
                prop_assert!(got >= floor.min(size), "bin {} has {} of {}", b, got, size);
            }
        }
        prop_assert_eq!(density_aware_sample(&scores, &spec, seed).unwrap(), picked);
    }

    #[test]
    fn deploy_on_all_points_with_one_vote_is_identity(raw in prop::collection::vec(-1i64..4, 2..60), seed in any::<u64>()) {
        let n = raw.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<f64> = (0..2 * n).map(|_| rng.random_range(0.0..1.0)).collect();
        let data = Dataset::new(pts, n, 2, None).unwrap();
        let labels = canonicalize(&raw);
        let all: Vec<usize> = (0..n).collect();
        prop_assert_eq!(deploy(&data, &all, &labels, 1).unwrap(), labels);
    }
}

#[test]
fn singleton_density_mode_is_always_sampled() {
    let mut scores = vec![1.0; 999];
    scores.push(50.0);
    for seed in 0..50 {
        let picked = density_aware_sample(&scores, &SampleSpec { n_s: 20, bins: 10, floor: 1 }, seed).unwrap();
        assert!(picked.contains(&999));
    }
}

#[test]
fn search_is_deterministic_and_replayable() {
    let data = Layout::blobs(3, 5, 8.0).generate(240, 5, 2).unwrap();
    let w = GsWeights::default();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| random_search(&data, &small_space(), 24, 9, Objective::GraphScope, &w).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(4));
    assert_eq!(a.history.len(), 24);

    let best = a.history.iter().map(|r| r.objective).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(a.best.objective, best);
    let first = a.history.iter().find(|r| r.objective == best).unwrap();
    assert_eq!(a.best.index, first.index);

    for r in a.history.iter().filter(|r| r.error.is_none()) {
        assert!((0.0..=1.0).contains(&r.objective));
        let (value, labels) = replay(&data, &r.config, Objective::GraphScope, &w).unwrap();
        assert_eq!(value, r.objective, "trial {}", r.index);
        assert_eq!(labels.n_clusters(), r.c_clusters);
    }
}

#[test]
fn running_best_never_decreases() {
    let data = Layout::blobs(2, 4, 9.0).generate(150, 4, 6).unwrap();
    let res = random_search(&data, &small_space(), 30, 3, Objective::GraphScope, &GsWeights::default()).unwrap();
    let mut best = f64::NEG_INFINITY;
    let mut running = Vec::new();
    for r in &res.history {
        best = best.max(r.objective);
        running.push(best);
    }
    assert!(running.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(*running.last().unwrap(), res.best.objective);
}

#[test]
fn single_trial_is_the_best() {
    let data = Layout::blobs(2, 3, 9.0).generate(80, 3, 1).unwrap();
    let res = random_search(&data, &small_space(), 1, 5, Objective::GraphScope, &GsWeights::default()).unwrap();
    assert_eq!(res.history.len(), 1);
    assert_eq!(res.best, res.history[0]);
}

#[test]
fn impossible_space_fails_every_trial() {
    let data = Layout::blobs(2, 3, 9.0).generate(12, 3, 1).unwrap();
    let space = SearchSpace { k_graph: (20, 25), ..Default::default() };
    let err = random_search(&data, &space, 4, 1, Objective::GraphScope, &GsWeights::default()).unwrap_err();
    assert!(matches!(err, Error::AllTrialsFailed(4)), "{err}");
}

#[test]
fn small_data_reduces_to_plain_adabox() {
    let data = Layout::blobs(3, 4, 8.0).generate(300, 4, 11).unwrap();
    let params = SlcdParams {
        spec: SampleSpec { n_s: 1000, ..Default::default() },
        space: small_space(),
        trials: 12,
        k_dep: 1,
        seed: 4,
        ..Default::default()
    };
    let out = slcd_run(&data, &params).unwrap();
    assert_eq!(out.search.sample_indices, (0..300).collect::<Vec<_>>());
    let (direct, _) = adabox_cluster(&data, &out.search.best.config).unwrap();
    assert_eq!(out.labels, direct);
    assert_eq!(out.sample_labels, direct);
}

#[test]
fn pipeline_replays_bit_for_bit() {
    let data = Layout::blobs(2, 6, 10.0).generate(600, 6, 3).unwrap();
    let params = SlcdParams {
        spec: SampleSpec { n_s: 150, ..Default::default() },
        space: small_space(),
        trials: 10,
        seed: 21,
        ..Default::default()
    };
    let a = slcd_run(&data, &params).unwrap();
    let b = slcd_run(&data, &params).unwrap();
    assert_eq!(a.labels, b.labels);
    assert_eq!(a.search, b.search);
    assert_eq!(a.search.sample_indices.len(), 150);
    assert_eq!(a.labels.len(), 600);
}

#[test]
fn supervised_objective_needs_truth() {
    let data = Layout::blobs(2, 3, 9.0).generate(60, 3, 1).unwrap();
    let bare = Dataset::new(data.points().to_vec(), 60, 3, None).unwrap();
    let w = GsWeights::default();
    assert!(random_search(&bare, &small_space(), 3, 1, Objective::Scope, &w).is_err());
    let res = random_search(&data, &small_space(), 3, 1, Objective::Scope, &w).unwrap();
    assert!(res.history.iter().all(|r| (0.0..=1.0).contains(&r.objective)));
}
