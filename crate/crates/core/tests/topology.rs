use doco_core::topology::{
    build_topology, gossip_matrix_for, lazify, max_degree_weights, Graph, GossipMatrix, TopologyKind,
};
use doco_core::Error;
use proptest::prelude::*;

/// Largest |eigenvalue| of a symmetric matrix by power iteration on its
/// square, started from a fixed generic vector.
fn spectral_radius(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * i as f64 + 0.011 * (i * i) as f64).collect();
    let apply = |v: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| m[i][j] * v[j]).sum()).collect() };
    let mut est = 0.0;
    for _ in 0..20_000 {
        let w = apply(&apply(&v));
        let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return 0.0;
        }
        let next = nrm.sqrt() / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.iter().map(|x| x / nrm).collect();
        if (next - est).abs() < 1e-15 {
            return next;
        }
        est = next;
    }
    est
}

fn shifted(p: &GossipMatrix, diag: f64, off: f64) -> Vec<Vec<f64>> {
    let n = p.n();
    (0..n)
        .map(|i| (0..n).map(|j| diag * if i == j { 1.0 } else { 0.0 } + off * p.get(i, j)).collect())
        .collect()
}

fn check_invariants(g: &Graph, p: &GossipMatrix) {
    let n = p.n();
    for i in 0..n {
        let row: f64 = (0..n).map(|j| p.get(i, j)).sum();
        let col: f64 = (0..n).map(|j| p.get(j, i)).sum();
        assert!((row - 1.0).abs() <= 1e-12 && (col - 1.0).abs() <= 1e-12);
        for j in 0..n {
            assert_eq!(p.get(i, j), p.get(j, i));
        }
    }
    assert!(p.supported_on(g));
    assert!(p.sigma2() < 1.0);
    assert!((p.rho() - (1.0 - p.sigma2())).abs() < 1e-12);
}

#[test]
fn spectrum_matches_power_iteration() {
    for kind in TopologyKind::ALL {
        for n in [4usize, 9, 16] {
            let (_, p) = gossip_matrix_for(kind, n, true).unwrap();
            // σ₂ = spectral radius of P − J/n, β = spectral radius of I − P
            let centred: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| p.get(i, j) - 1.0 / n as f64).collect())
                .collect();
            let sigma2 = spectral_radius(&centred);
            let beta = spectral_radius(&shifted(&p, 1.0, -1.0));
            assert!((sigma2 - p.sigma2()).abs() < 1e-8, "{kind} n={n}: {sigma2} vs {}", p.sigma2());
            assert!((beta - p.beta()).abs() < 1e-8, "{kind} n={n}: {beta} vs {}", p.beta());
        }
    }
}

#[test]
fn all_topologies_satisfy_invariants() {
    for kind in TopologyKind::ALL {
        for n in [4usize, 8, 9, 16] {
            let g = match build_topology(kind, n) {
                Ok(g) => g,
                Err(Error::InvalidSize(_)) => {
                    assert!(kind == TopologyKind::Grid2d && n == 8);
                    continue;
                }
                Err(e) => panic!("{e}"),
            };
            let p = max_degree_weights(&g).unwrap();
            check_invariants(&g, &p);
            let l = lazify(&p).unwrap();
            check_invariants(&g, &l);
            assert!(l.spectrum().min_eigenvalue >= -1e-10);
        }
    }
}

#[test]
fn two_node_path_constants() {
    let (_, p) = gossip_matrix_for(TopologyKind::Path, 2, false).unwrap();
    assert!((p.rho() - 1.0).abs() < 1e-12);
    assert!((p.beta() - 1.0).abs() < 1e-12);
}

#[test]
fn cycle_eight_lazified() {
    let (_, p) = gossip_matrix_for(TopologyKind::Cycle, 8, true).unwrap();
    let raw = 1.0 / 3.0 + 2.0 / 3.0 * (std::f64::consts::PI / 4.0).cos();
    assert!((p.sigma2() - (1.0 + raw) / 2.0).abs() < 1e-12);
    assert!((p.beta() - 2.0 / 3.0).abs() < 1e-12);
}

fn connected_graph() -> impl Strategy<Value = Graph> {
    (3usize..12)
        .prop_flat_map(|n| {
            let parents = proptest::collection::vec(any::<prop::sample::Index>(), n - 1);
            let extra = proptest::collection::vec((0..n, 0..n), 0..2 * n);
            (Just(n), parents, extra)
        })
        .prop_map(|(n, parents, extra)| {
            // random tree: node k attaches to some earlier node
            let mut edges: Vec<(usize, usize)> =
                parents.iter().enumerate().map(|(k, ix)| (ix.index(k + 1), k + 1)).collect();
            edges.extend(extra.into_iter().filter(|(a, b)| a != b));
            Graph::new(n, edges).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_graphs_give_valid_matrices(g in connected_graph()) {
        let p = max_degree_weights(&g).unwrap();
        check_invariants(&g, &p);
        let l = lazify(&p).unwrap();
        check_invariants(&g, &l);
        prop_assert!(l.is_psd());
        // lazifying maps every eigenvalue λ to (1 + λ)/2
        prop_assert!((l.spectrum().min_eigenvalue - (1.0 + p.spectrum().min_eigenvalue) / 2.0).abs() < 1e-10);
    }
}
