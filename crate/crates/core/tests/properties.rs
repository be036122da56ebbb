//! Randomized invariants for graph construction, spectra and distances.

use std::collections::BTreeMap;

use graph_diffusion::diffusion::{diffusion_distance, hitting_profile};
use graph_diffusion::spectral::*;
use graph_diffusion::{build_graph, check_reachability, laplacian_row_sums, Error, Graph, TransitionOperator};
use proptest::prelude::*;

/// Ring `i -> i+1` plus random extra arcs; optionally symmetric.
fn digraph(max_n: usize, symmetric: bool) -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (2..=max_n).prop_flat_map(move |n| {
        let extra = prop::collection::vec((0..n, 0..n, 0.1f64..10.0), 0..3 * n);
        (Just(n), extra, prop::collection::vec(0.1f64..10.0, n)).prop_map(move |(n, extra, ring)| {
            let mut m = BTreeMap::new();
            let arcs = (0..n).map(|i| (i, (i + 1) % n, ring[i])).chain(extra);
            for (i, j, w) in arcs {
                if symmetric {
                    m.insert((i.min(j), i.max(j)), w);
                } else {
                    m.insert((i, j), w);
                }
            }
            if symmetric {
                let keys: Vec<_> = m.iter().map(|(&k, &w)| (k, w)).collect();
                for ((i, j), w) in keys {
                    m.insert((j, i), w);
                }
            }
            (n, m.into_iter().map(|((i, j), w)| (i, j, w)).collect())
        })
    })
}

fn with_sinks() -> impl Strategy<Value = Graph> {
    (digraph(12, true), prop::collection::vec(any::<bool>(), 12)).prop_map(|((n, edges), pick)| {
        let mut sinks: Vec<usize> = (0..n).filter(|&i| pick[i]).collect();
        if sinks.is_empty() || sinks.len() == n {
            sinks = vec![0];
        }
        build_graph(n, &edges, &sinks).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rows_are_stochastic((n, edges) in digraph(20, false)) {
        let g = build_graph(n, &edges, &[]).unwrap();
        for i in 0..n {
            prop_assert!((g.row_sum(i) - 1.0).abs() <= 1e-12);
            let cols = g.row(i).0;
            prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn rebuild_is_bit_exact(g in with_sinks()) {
        let again = build_graph(g.n(), &g.edges(), g.absorbing()).unwrap();
        prop_assert_eq!(&again, &g);
        let json = Graph::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(json, g);
    }

    #[test]
    fn gershgorin_rows(g in with_sinks()) {
        let rows = laplacian_row_sums(&g);
        for i in 0..g.n() {
            let pii = g.weight(i, i);
            if g.is_absorbing(i) {
                prop_assert_eq!(rows[i].diagonal, 0.0);
                prop_assert_eq!(rows[i].off_diagonal, 0.0);
            } else {
                prop_assert!((rows[i].diagonal - (1.0 - pii)).abs() <= 1e-12);
                prop_assert!((rows[i].off_diagonal - rows[i].diagonal).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn eigenvalues_in_gershgorin_disk((n, edges) in digraph(12, true)) {
        let g = build_graph(n, &edges, &[]).unwrap();
        match first_nontrivial_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITERS) {
            Ok(p) => {
                prop_assert!((1.0 - p.lambda).abs() <= 1.0 + 1e-9);
                prop_assert!(p.residual <= DEFAULT_TOL);
                prop_assert_eq!(p.u.iter().fold(0.0f64, |m, x| m.max(x.abs())), 1.0);
            }
            // symmetric weights keep the spectrum real, but a repeated
            // eigenvalue can stall the deflation
            Err(e) => prop_assert!(matches!(e, Error::NoConvergence(_)), "{e}"),
        }
    }

    #[test]
    fn dirichlet_eigenvalues_in_disk(g in with_sinks()) {
        prop_assume!(check_reachability(&g));
        let p = absorbing_dominant_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        prop_assert!(p.lambda > 0.0 && p.lambda <= 1.0 + 1e-12);
        prop_assert!(p.u.iter().all(|&x| x >= 0.0));
        prop_assert!(p.residual <= DEFAULT_TOL);
    }

    #[test]
    fn directed_graphs_never_leave_disk((n, edges) in digraph(10, false)) {
        let g = build_graph(n, &edges, &[]).unwrap();
        if let Ok(p) = first_nontrivial_eigenpair(&g, DEFAULT_TOL, 200_000) {
            prop_assert!((1.0 - p.lambda).abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn larger_targets_are_closer(
        (n, edges) in digraph(14, false),
        a in prop::collection::vec(any::<bool>(), 14),
        b in prop::collection::vec(any::<bool>(), 14),
    ) {
        let g = build_graph(n, &edges, &[]).unwrap();
        let small: Vec<usize> = (0..n).filter(|&i| a[i]).collect();
        prop_assume!(!small.is_empty());
        let large: Vec<usize> = (0..n).filter(|&i| a[i] || b[i]).collect();
        let ds = diffusion_distance(&g, &small, 0.5, 20_000).unwrap();
        let dl = diffusion_distance(&g, &large, 0.5, 20_000).unwrap();
        for i in 0..n {
            prop_assert!(dl.d[i] <= ds.d[i]);
        }
    }

    #[test]
    fn higher_thresholds_are_farther(
        (n, edges) in digraph(14, false),
        p in 0.05f64..0.95,
        q in 0.05f64..0.95,
    ) {
        let g = build_graph(n, &edges, &[]).unwrap();
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        let a = diffusion_distance(&g, &[0], lo, 50_000).unwrap();
        let b = diffusion_distance(&g, &[0], hi, 50_000).unwrap();
        for i in 0..n {
            prop_assert!(a.d[i] <= b.d[i]);
        }
    }

    #[test]
    fn profile_invariants(g in with_sinks()) {
        let prof = hitting_profile(&g, g.absorbing(), 30).unwrap();
        for k in 0..=30 {
            for i in 0..g.n() {
                let h = prof.h[k][i];
                prop_assert!((0.0..=1.0).contains(&h));
                if k > 0 {
                    prop_assert!(h >= prof.h[k - 1][i]);
                }
                if k == 0 {
                    prop_assert_eq!(h, if g.is_absorbing(i) { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn distance_brackets_threshold((n, edges) in digraph(12, false)) {
        let g = build_graph(n, &edges, &[]).unwrap();
        let field = diffusion_distance(&g, &[n - 1], 0.5, 5_000).unwrap();
        let prof = hitting_profile(&g, &[n - 1], 5_000).unwrap();
        for i in 0..n {
            let d = field.d[i];
            prop_assert_eq!(d == 0, i == n - 1);
            if d > 0 && !field.capped[i] {
                prop_assert!(prof.h[d][i] >= 0.5);
                prop_assert!(prof.h[d - 1][i] < 0.5);
            }
        }
    }
}

#[test]
fn distances_become_finite() {
    use graph_diffusion::generators::*;
    let graphs = vec![
        gen_path(200).unwrap(),
        gen_cycle(150).unwrap(),
        gen_two_complete_bridge(60).unwrap(),
        gen_cycle_plus_boundary(199, 0.001).unwrap(),
        gen_small_world_ring(200, 3, 20.0, 5).unwrap(),
    ];
    for g in graphs {
        assert!(check_reachability(&g));
        let target = if g.has_absorbing() { g.absorbing().to_vec() } else { vec![0] };
        let mut kmax = 16;
        loop {
            let f = diffusion_distance(&g, &target, 0.5, kmax).unwrap();
            if !f.any_capped() {
                break;
            }
            kmax *= 2;
            assert!(kmax < 1 << 24, "still capped at {kmax}");
        }
    }
}
