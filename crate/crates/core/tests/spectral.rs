mod common;

use common::{random_graph, random_permutation, seeded};
use graphdistill::graph::{connected_components, Graph};
use graphdistill::spectral::{eig_sym, featurize, heat_kernel_signature_at, laplacian, HksConfig};
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    any::<u64>().prop_map(move |seed| random_graph(&mut seeded(seed), max_n))
}

#[test]
fn decomposition_reconstructs_laplacian() {
    let mut rng = seeded(8);
    for _ in 0..100 {
        let g = random_graph(&mut rng, 25);
        let l = laplacian(&g);
        let d = eig_sym(&l).unwrap();
        let n = g.node_count();
        for i in 0..n {
            for j in 0..n {
                let rebuilt: f64 = (0..n).map(|k| d.component(i, k) * d.eigenvalues[k] * d.component(j, k)).sum();
                assert!((rebuilt - l.get(i, j)).abs() <= 1e-9);
                let gram: f64 = (0..n).map(|k| d.component(k, i) * d.component(k, j)).sum();
                assert!((gram - f64::from(i == j)).abs() <= 1e-9);
            }
        }
        assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(d.eigenvalues[0].abs() <= 1e-10);
    }
}

#[test]
fn path_spectrum_closed_form() {
    for n in 2..=12 {
        let d = eig_sym(&laplacian(&Graph::path(n))).unwrap();
        for (k, &lam) in d.eigenvalues.iter().enumerate() {
            let expected = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / n as f64).cos();
            assert!((lam - expected).abs() <= 1e-10, "P{n} eigenvalue {k}");
        }
    }
}

#[test]
fn long_time_limit_is_inverse_component_size() {
    let mut rng = seeded(12);
    for _ in 0..50 {
        let g = random_graph(&mut rng, 20);
        let h = heat_kernel_signature_at(&g, &[1e6]).unwrap();
        for comp in connected_components(&g) {
            for &v in &comp {
                assert!((h.get(v, 0) - 1.0 / comp.len() as f64).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn small_components_bin_stably_under_relabeling() {
    // Components of size 2, 4 and 8 have long-time HKS on bin edges 1/2, 1/4, 1/8.
    let mut edges = vec![(0, 1)];
    edges.extend([(2, 3), (3, 4), (4, 5), (5, 2)]);
    edges.extend((6..13).map(|i| (i, i + 1)));
    let g = Graph::new(14, edges).unwrap();
    let cfg = HksConfig::default();
    let base = featurize(&g, &cfg).unwrap();
    let mut rng = seeded(5);
    for _ in 0..50 {
        let perm = random_permutation(&mut rng, 14);
        assert_eq!(featurize(&g.permute(&perm).unwrap(), &cfg).unwrap(), base);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hks_decreases_with_time(g in graph_strategy(20)) {
        let times: Vec<f64> = (0..20).map(|i| 0.05 * 1.5f64.powi(i)).collect();
        let h = heat_kernel_signature_at(&g, &times).unwrap();
        for i in 0..g.node_count() {
            for j in 1..times.len() {
                prop_assert!(h.get(i, j) <= h.get(i, j - 1) + 1e-12);
            }
        }
    }

    #[test]
    fn histogram_columns_are_distributions(g in graph_strategy(25)) {
        let cfg = HksConfig { num_steps: 8, num_bins: 10, ..HksConfig::default() };
        let h = featurize(&g, &cfg).unwrap();
        for j in 0..cfg.num_steps {
            let total: f64 = (0..cfg.num_bins).map(|b| h.get(b, j)).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn featurize_ignores_node_order(g in graph_strategy(25), seed in any::<u64>()) {
        let cfg = HksConfig { num_steps: 12, num_bins: 12, ..HksConfig::default() };
        let perm = random_permutation(&mut seeded(seed), g.node_count());
        let a = featurize(&g, &cfg).unwrap();
        let b = featurize(&g.permute(&perm).unwrap(), &cfg).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }
}
