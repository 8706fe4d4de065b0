use knnclust::data::canonicalize;
use knnclust::supervised::{ari, kendall_tau_b, scope};
use knnclust::{Labeling, UndirectedGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "support/oracles.rs"]
mod oracles;

use oracles::{pair_count_ari, random_raw, tau_b_by_groups};

#[test]
fn ari_matches_pair_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..500 {
        let n = rng.random_range(2..=12);
        let a = canonicalize(&random_raw(&mut rng, n));
        let b = canonicalize(&random_raw(&mut rng, n));
        let got = ari(&a, &b).unwrap();
        assert_eq!(got, pair_count_ari(a.labels(), b.labels()), "case {case}");
        assert_eq!(got, ari(&b, &a).unwrap());
    }
}

#[test]
fn ari_single_cluster_reference() {
    let one = Labeling::single_cluster(6);
    assert_eq!(ari(&one, &one).unwrap(), 1.0);
    let two = canonicalize(&[0, 0, 0, 1, 1, 1]);
    assert_ne!(ari(&two, &one).unwrap(), 1.0);
}

#[test]
fn tau_b_matches_tie_group_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    while checked < 500 {
        let n = rng.random_range(2..=8);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
        match kendall_tau_b(&x, &y) {
            Ok(t) => {
                assert_eq!(t, tau_b_by_groups(&x, &y), "{x:?} {y:?}");
                assert!((-1.0..=1.0).contains(&t));
                checked += 1;
            }
            Err(_) => {
                assert!(x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0]));
            }
        }
    }
}

proptest! {
    #[test]
    fn tau_b_antisymmetry(perm in Just((0..8).collect::<Vec<usize>>()).prop_shuffle(), xs in prop::collection::vec(-1e3f64..1e3, 8)) {
        let y: Vec<f64> = perm.iter().map(|&p| p as f64).collect();
        let reversed: Vec<f64> = perm.iter().map(|&p| (7 - p) as f64).collect();
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        prop_assume!(sorted.len() == xs.len());
        let a = kendall_tau_b(&xs, &y).unwrap();
        let b = kendall_tau_b(&xs, &reversed).unwrap();
        prop_assert_eq!(a, -b);
    }
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> UndirectedGraph {
    let p = rng.random_range(0.05..0.5);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    UndirectedGraph::from_edges(n, &edges).unwrap()
}

#[test]
fn scope_components_fuzz() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..10_000 {
        let n = rng.random_range(2..25);
        let g = random_graph(&mut rng, n);
        let truth = canonicalize(&random_raw(&mut rng, n));
        let pred = canonicalize(&random_raw(&mut rng, n));
        let r = scope(&pred, &truth, &g).unwrap();
        let comps = r.components();
        for v in comps {
            assert!((0.0..=1.0).contains(&v), "case {case}: {r:?}");
        }
        assert!((r.combined - comps.iter().sum::<f64>() / 5.0).abs() < 1e-12);
    }
}

#[test]
fn scope_perfect_prediction() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let n = rng.random_range(2..25);
        let g = random_graph(&mut rng, n);
        let truth = canonicalize(&random_raw(&mut rng, n));
        if truth.n_clusters() == 0 {
            continue;
        }
        assert_eq!(scope(&truth, &truth, &g).unwrap().combined, 1.0, "{truth:?}");
    }
}

#[test]
fn scope_merge_costs_more_than_split() {
    // two 4-cliques; merging them loses purity, splitting one only loses the count
    let mut edges = Vec::new();
    for base in [0, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((base + i, base + j));
            }
        }
    }
    let g = UndirectedGraph::from_edges(8, &edges).unwrap();
    let truth = canonicalize(&[0, 0, 0, 0, 1, 1, 1, 1]);
    let merged = Labeling::single_cluster(8);
    let split = canonicalize(&[0, 0, 2, 2, 1, 1, 1, 1]);
    let m = scope(&merged, &truth, &g).unwrap();
    let s = scope(&split, &truth, &g).unwrap();
    assert!(m.combined < s.combined);
    assert!(s.count_accuracy < 1.0);
    assert_eq!(s.core_purity, 1.0);
}
