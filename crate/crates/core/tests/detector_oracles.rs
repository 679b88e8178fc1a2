//! Detector checks against exhaustive search: the modularity detectors
//! must never beat the brute-force partition maximum and must reach it on
//! the clique-pair family; Infomap must land on the map-equation minimum
//! of the clique pair.

mod common;

use commweave_core::detect::{
    communities_connected, detect, fast_greedy, infomap, leiden, louvain, map_equation,
    DetectionResult, DetectorConfig, DetectorKind,
};
use commweave_core::graph::{Graph, Partition};
use commweave_core::metrics::weighted_modularity;
use common::{clique_pair, for_each_partition, random_connected_graph};

fn brute_force_best_modularity(graph: &Graph) -> (f64, Partition) {
    let mut best = f64::NEG_INFINITY;
    let mut best_partition = Partition::singletons(graph.node_count());
    for_each_partition(graph.node_count(), |labels| {
        let p = Partition::from_labels(labels);
        let q = weighted_modularity(graph, &p).unwrap();
        if q > best {
            best = q;
            best_partition = p;
        }
    });
    (best, best_partition)
}

#[test]
fn louvain_never_beats_brute_force_on_small_graphs() {
    for seed in 0u64..40 {
        let n = 4 + (seed as usize % 5); // 4..=8 nodes
        let extra = (seed % 4) as usize;
        let graph = random_connected_graph(n, extra, seed.wrapping_add(99));
        let (best, _) = brute_force_best_modularity(&graph);
        let result = louvain(&graph, &DetectorConfig::with_seed(DetectorKind::Louvain, seed))
            .unwrap();
        assert!(
            result.objective <= best + 1e-9,
            "seed {seed}: louvain {} above brute force {best}",
            result.objective
        );
    }
}

#[test]
fn all_detectors_hit_brute_force_optimum_on_clique_pairs() {
    let (graph, planted) = clique_pair(4);
    let (best, best_partition) = brute_force_best_modularity(&graph);
    assert!(best_partition.same_grouping(&planted));
    for kind in [DetectorKind::Louvain, DetectorKind::Leiden, DetectorKind::FastGreedy] {
        let result = detect(&graph, &DetectorConfig::with_seed(kind, 17)).unwrap();
        assert!(
            (result.objective - best).abs() < 1e-9,
            "{kind:?} missed the optimum: {} vs {best}",
            result.objective
        );
        assert!(result.partition.same_grouping(&planted), "{kind:?} grouping");
    }
}

#[test]
fn louvain_matches_exhaustive_partition_on_five_clique_pair() {
    // 10 nodes: the full Bell(10) = 115975 partitions.
    let (graph, planted) = clique_pair(5);
    let (best, best_partition) = brute_force_best_modularity(&graph);
    assert!(best_partition.same_grouping(&planted));
    let result =
        louvain(&graph, &DetectorConfig::with_seed(DetectorKind::Louvain, 1)).unwrap();
    assert!((result.objective - best).abs() < 1e-9);
    assert!(result.partition.same_grouping(&planted));
}

#[test]
fn infomap_reaches_two_module_codelength_minimum_on_clique_pair() {
    let (graph, planted) = clique_pair(5);
    // Direct evaluation of both candidate partitions.
    let one_module = Partition::from_labels(&[0; 10]);
    let len_one = map_equation(&graph, &one_module).unwrap();
    let len_two = map_equation(&graph, &planted).unwrap();
    assert!(len_two < len_one);
    let result =
        infomap(&graph, &DetectorConfig::with_seed(DetectorKind::Infomap, 3)).unwrap();
    assert!(result.partition.same_grouping(&planted));
    assert!((result.objective - len_two).abs() < 1e-12);
}

#[test]
fn reported_objective_equals_metrics_recomputation() {
    for seed in 0u64..10 {
        let graph = random_connected_graph(9, 5, seed.wrapping_add(500));
        for kind in [DetectorKind::Louvain, DetectorKind::Leiden, DetectorKind::FastGreedy] {
            let result = detect(&graph, &DetectorConfig::with_seed(kind, seed)).unwrap();
            let recomputed = weighted_modularity(&graph, &result.partition).unwrap();
            assert!(
                (result.objective - recomputed).abs() < 1e-9,
                "{kind:?} seed {seed}"
            );
        }
    }
}

#[test]
fn detectors_are_scale_invariant() {
    let (graph, _) = clique_pair(4);
    for kind in DetectorKind::ALL {
        let config = DetectorConfig::with_seed(kind, 7);
        let base = detect(&graph, &config).unwrap();
        let scaled_graph = graph
            .reweighted(|u, v| {
                42.5 * graph
                    .neighbors(u)
                    .iter()
                    .find(|&&(x, _)| x == v)
                    .unwrap()
                    .1
            })
            .unwrap();
        let scaled = detect(&scaled_graph, &config).unwrap();
        assert!(
            scaled.partition.same_grouping(&base.partition),
            "{kind:?} partition changed under uniform weight scaling"
        );
    }
}

#[test]
fn determinism_across_all_detectors() {
    let graph = random_connected_graph(12, 8, 2718);
    for kind in DetectorKind::ALL {
        let config = DetectorConfig::with_seed(kind, 31);
        let a: DetectionResult = detect(&graph, &config).unwrap();
        let b: DetectionResult = detect(&graph, &config).unwrap();
        assert_eq!(a, b, "{kind:?} is not deterministic");
    }
}

#[test]
fn leiden_connectivity_on_random_corpus() {
    for seed in 0u64..30 {
        let graph = random_connected_graph(14, 10, seed.wrapping_add(4_000));
        let result = leiden(&graph, &DetectorConfig::with_seed(DetectorKind::Leiden, seed))
            .unwrap();
        assert!(communities_connected(&graph, &result.partition), "seed {seed}");
    }
}

#[test]
fn fast_greedy_final_merge_matches_direct_delta() {
    // ΔQ of the bookkept trace must match Eq.-style recomputation.
    for seed in 0u64..10 {
        let graph = random_connected_graph(10, 6, seed.wrapping_add(9_000));
        let result = fast_greedy(&graph, &DetectorConfig::new(DetectorKind::FastGreedy)).unwrap();
        let last = *result.objective_trace.last().unwrap();
        let direct = weighted_modularity(&graph, &result.partition).unwrap();
        assert!((last - direct).abs() < 1e-12, "seed {seed}");
    }
}
