use knnclust::knn::{build_knn_graph, density_scores, mutual_graph, symmetrize};
use knnclust::Dataset;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset {
    let pts: Vec<f64> = (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect();
    Dataset::new(pts, n, d, None).unwrap()
}

/// Full sort of every distance row, no selection tricks.
fn naive_neighbors(data: &Dataset, k: usize) -> Vec<Vec<(usize, f64)>> {
    (0..data.n())
        .map(|i| {
            let mut row: Vec<(f64, usize)> = (0..data.n())
                .filter(|&j| j != i)
                .map(|j| {
                    let s: f64 = data.row(i).iter().zip(data.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    (s.sqrt(), j)
                })
                .collect();
            row.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            row.into_iter().take(k).map(|(d, j)| (j, d)).collect()
        })
        .collect()
}

#[test]
fn matches_full_sort_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..200 {
        let n = rng.random_range(2..=64);
        let d = rng.random_range(1..=16);
        let k = rng.random_range(1..n);
        let mut data = random_dataset(&mut rng, n, d);
        if case % 4 == 0 {
            // integer grid coordinates force distance ties
            let pts = data.points().iter().map(|v| v.round()).collect();
            data = Dataset::new(pts, n, d, None).unwrap();
        }
        let g = build_knn_graph(&data, k).unwrap();
        let oracle = naive_neighbors(&data, k);
        for (i, row) in oracle.iter().enumerate() {
            let ids: Vec<usize> = row.iter().map(|p| p.0).collect();
            assert_eq!(g.neighbors(i), &ids[..], "case {case} point {i}");
            for (got, want) in g.distances(i).iter().zip(row) {
                assert!((got - want.1).abs() <= 1e-12 * want.1.max(1.0));
            }
        }
    }
}

#[test]
fn permutation_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let (n, d, k) = (40, 3, 6);
        let data = random_dataset(&mut rng, n, d);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        // new point p holds old point perm[p]
        let permuted = data.subset(&perm).unwrap();
        let mut inverse = vec![0; n];
        for (p, &old) in perm.iter().enumerate() {
            inverse[old] = p;
        }
        let g = build_knn_graph(&data, k).unwrap();
        let gp = build_knn_graph(&permuted, k).unwrap();
        for (p, &old) in perm.iter().enumerate() {
            let mapped: Vec<usize> = g.neighbors(old).iter().map(|&j| inverse[j]).collect();
            assert_eq!(gp.neighbors(p), &mapped[..]);
        }
    }
}

#[test]
fn mutual_and_union_views() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.random_range(5..60);
        let k = rng.random_range(1..n.min(12));
        let data = random_dataset(&mut rng, n, 4);
        let g = build_knn_graph(&data, k).unwrap();
        let union = symmetrize(&g);
        let mutual = mutual_graph(&g);
        assert!(mutual.m() <= union.m());
        assert!(union.m() <= n * k);
        let directed = |i: usize, j: usize| g.neighbors(i).contains(&j);
        for (i, j) in union.edges() {
            assert!(directed(i, j) || directed(j, i));
        }
        for (i, j) in mutual.edges() {
            assert!(directed(i, j) && directed(j, i));
        }
        // every directed edge is one undirected union edge; reciprocal pairs are counted twice
        assert_eq!(union.m() + mutual.m(), n * k);
        let dens = density_scores(&g);
        assert_eq!(dens.iter().sum::<f64>(), (n * k) as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_keeps_topology(seed in any::<u64>(), c in 1e-3f64..1e3, k in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_dataset(&mut rng, 30, 5);
        let g = build_knn_graph(&data, k).unwrap();
        let gs = build_knn_graph(&data.scaled(c).unwrap(), k).unwrap();
        for i in 0..30 {
            prop_assert_eq!(g.neighbors(i), gs.neighbors(i));
            for (a, b) in g.distances(i).iter().zip(gs.distances(i)) {
                prop_assert!((a * c - b).abs() <= 1e-9 * b.max(1e-300));
            }
        }
    }
}
