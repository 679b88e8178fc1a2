//! Property tests for the spec-level invariants of graphs, features,
//! metrics, weaving, and voting.

mod common;

use commweave_core::graph::{deoverlap, prune_links, Graph, OverlappingAssignment, Partition};
use commweave_core::metrics::{ari, modularity, nmi, weighted_modularity};
use commweave_core::ml::{fit, vote, Learner, LearnerConfig, VoteMode, FeatureMatrix};
use commweave_core::pairs::{build_dataset, featurize, sample_pairs, PairOrder, SamplingConfig};
use commweave_core::weave::{build_similarity_network, WeaveOptions};
use proptest::prelude::*;

fn edges_strategy(max_nodes: u32, max_edges: usize) -> impl Strategy<Value = Vec<(u32, u32)>> {
    prop::collection::vec((0..max_nodes, 0..max_nodes), 1..max_edges)
}

proptest! {
    #[test]
    fn degree_and_strength_sums(edges in edges_strategy(12, 40)) {
        prop_assume!(edges.iter().any(|&(u, v)| u != v));
        let g = Graph::from_edges(&edges);
        let degree_sum: usize = (0..g.node_count() as u32).map(|v| g.degree(v).unwrap()).sum();
        prop_assert_eq!(degree_sum, 2 * g.link_count());
        let strength_sum: f64 = (0..g.node_count() as u32).map(|v| g.strength(v).unwrap()).sum();
        prop_assert!((strength_sum - 2.0 * g.total_weight()).abs() < 1e-9);
    }

    #[test]
    fn construction_ignores_edge_order_and_direction(edges in edges_strategy(10, 30), seed in 0u64..1000) {
        let g1 = Graph::from_edges(&edges);
        use rand::seq::SliceRandom;
        use rand::{Rng as _, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = edges.clone();
        shuffled.shuffle(&mut rng);
        for e in shuffled.iter_mut() {
            if rng.gen_bool(0.5) {
                *e = (e.1, e.0);
            }
        }
        let g2 = Graph::from_edges(&shuffled);
        prop_assert_eq!(g1, g2);
    }

    #[test]
    fn clustering_coefficient_in_unit_interval(edges in edges_strategy(10, 30)) {
        prop_assume!(edges.iter().any(|&(u, v)| u != v));
        let g = Graph::from_edges(&edges);
        for v in 0..g.node_count() as u32 {
            let c = g.clustering_coefficient(v).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
            // c == 1 iff the neighborhood is a clique and degree >= 2.
            let k = g.degree(v).unwrap();
            if c == 1.0 {
                prop_assert!(k >= 2);
                let neighbors: Vec<u32> = g.neighbors(v).iter().map(|&(x, _)| x).collect();
                for (i, &a) in neighbors.iter().enumerate() {
                    for &b in &neighbors[i + 1..] {
                        prop_assert!(g.has_link(a, b));
                    }
                }
            }
        }
    }

    #[test]
    fn common_neighbors_symmetric_and_bounded(edges in edges_strategy(10, 30)) {
        prop_assume!(edges.iter().any(|&(u, v)| u != v));
        let g = Graph::from_edges(&edges);
        let n = g.node_count() as u32;
        for u in 0..n {
            for v in (u + 1)..n {
                let a = g.common_neighbor_count(u, v).unwrap();
                let b = g.common_neighbor_count(v, u).unwrap();
                prop_assert_eq!(a, b);
                prop_assert!(a <= g.degree(u).unwrap().min(g.degree(v).unwrap()));
            }
        }
    }

    #[test]
    fn feature_vectors_are_symmetric_and_finite(edges in edges_strategy(10, 30)) {
        prop_assume!(edges.iter().any(|&(u, v)| u != v));
        let g = Graph::from_edges(&edges);
        let n = g.node_count() as u32;
        for u in 0..n {
            for v in (u + 1)..n {
                let f = featurize(&g, u, v).unwrap();
                prop_assert_eq!(f, featurize(&g, v, u).unwrap());
                for x in f {
                    prop_assert!(x.is_finite() && x >= 0.0);
                }
            }
        }
    }

    #[test]
    fn first_order_pairs_equal_links(edges in edges_strategy(12, 40)) {
        prop_assume!(edges.iter().any(|&(u, v)| u != v));
        let g = Graph::from_edges(&edges);
        let pairs = sample_pairs(&g, false, None, 0);
        prop_assert_eq!(pairs.len(), g.link_count());
        for (u, v, order) in pairs {
            prop_assert_eq!(order, PairOrder::First);
            prop_assert!(g.has_link(u, v));
        }
    }

    #[test]
    fn modularity_invariant_under_weight_scaling(
        edges in edges_strategy(10, 30),
        scale in 0.01f64..100.0,
        labels in prop::collection::vec(0u32..4, 12),
    ) {
        prop_assume!(edges.iter().any(|&(u, v)| u != v));
        let g = Graph::from_edges(&edges);
        let partition = Partition::from_labels(&labels[..g.node_count()]);
        let q1 = weighted_modularity(&g, &partition).unwrap();
        let scaled = g.reweighted(|_, _| scale).unwrap();
        let q2 = weighted_modularity(&scaled, &partition).unwrap();
        prop_assert!((q1 - q2).abs() < 1e-9);
    }

    #[test]
    fn nmi_ari_symmetry_and_relabeling(
        a_labels in prop::collection::vec(0u32..4, 8),
        b_labels in prop::collection::vec(0u32..4, 8),
        permutation_salt in 1u32..50,
    ) {
        let a = Partition::from_labels(&a_labels);
        let b = Partition::from_labels(&b_labels);
        prop_assert!((nmi(&a, &b).unwrap() - nmi(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((ari(&a, &b).unwrap() - ari(&b, &a).unwrap()).abs() < 1e-12);
        // Injective relabeling leaves both metrics unchanged.
        let relabeled: Vec<u32> = b_labels.iter().map(|&l| l * permutation_salt + 3).collect();
        let b2 = Partition::from_labels(&relabeled);
        prop_assert!((nmi(&a, &b).unwrap() - nmi(&a, &b2).unwrap()).abs() < 1e-12);
        prop_assert!((ari(&a, &b).unwrap() - ari(&a, &b2).unwrap()).abs() < 1e-12);
        prop_assert!(ari(&a, &b).unwrap() <= 1.0 + 1e-15);
    }

    #[test]
    fn weave_weights_are_floored_squares(
        edges in edges_strategy(10, 25),
        probs in prop::collection::vec(0.0f64..=1.0, 60),
    ) {
        prop_assume!(edges.iter().any(|&(u, v)| u != v));
        let g = Graph::from_edges(&edges);
        let partition = Partition::from_labels(&vec![0; g.node_count()]);
        let mut ds = build_dataset(&g, &partition, &SamplingConfig::default()).unwrap();
        prop_assume!(ds.len() <= probs.len());
        for (s, &p) in ds.samples.iter_mut().zip(&probs) {
            s.oof_probability = Some(p);
        }
        let options = WeaveOptions::default();
        let sim = build_similarity_network(&g, &ds, &options).unwrap();
        prop_assert_eq!(sim.graph.link_count(), g.link_count());
        for (u, v, w) in sim.graph.links() {
            let p = ds
                .samples
                .iter()
                .find(|s| (s.u, s.v) == (u, v))
                .and_then(|s| s.oof_probability)
                .unwrap();
            prop_assert!((w - (p * p).max(options.epsilon)).abs() < 1e-15);
            prop_assert!((options.epsilon..=1.0).contains(&w));
        }
    }

    #[test]
    fn soft_vote_is_exact_member_mean(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 2), 12..40),
        flips in prop::collection::vec(any::<bool>(), 40),
    ) {
        let y: Vec<u8> = rows
            .iter()
            .zip(&flips)
            .map(|(r, &flip)| ((r[0] > 5.0) ^ flip) as u8)
            .collect();
        let pos = y.iter().filter(|&&v| v == 1).count();
        prop_assume!(pos > 0 && pos < y.len());
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let config = LearnerConfig {
            dt_min_samples_leaf: 1,
            rf_trees: 5,
            xgb_rounds: 5,
            ..LearnerConfig::new(Learner::VcSoft)
        };
        let model = fit(&x, &y, &config).unwrap();
        let commweave_core::ml::ModelKind::Voting { members, .. } = &model.kind else {
            panic!("expected a voting model");
        };
        for row in &rows {
            let mean: f64 = members
                .iter()
                .map(|m| m.predict_proba(row).unwrap())
                .sum::<f64>()
                / 3.0;
            let soft = vote(members, row, VoteMode::Soft).unwrap();
            prop_assert!((soft - mean).abs() < 1e-12);
            let hard = vote(members, row, VoteMode::Hard).unwrap();
            prop_assert!([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]
                .iter()
                .any(|&v| (hard - v).abs() < 1e-15));
        }
    }

    #[test]
    fn deoverlap_then_prune_leaves_no_small_communities(
        edges in edges_strategy(10, 25),
        memberships in prop::collection::vec(prop::collection::vec(0u32..4, 0..3), 10),
        seed in 0u64..100,
    ) {
        prop_assume!(edges.iter().any(|&(u, v)| u != v));
        let g = Graph::from_edges(&edges);
        let mut raw = OverlappingAssignment::new(g.node_count());
        for (node, comms) in memberships.iter().take(g.node_count()).enumerate() {
            for &c in comms {
                raw.add(node as u32, c);
            }
        }
        let crisp = deoverlap(&raw, seed);
        let pruned = prune_links(&g, &crisp);
        for &size in pruned.partition.community_sizes() {
            prop_assert!(size >= 2);
        }
        // Every surviving link has both endpoints assigned.
        prop_assert_eq!(pruned.partition.node_count(), pruned.graph.node_count());
        // Surviving nodes keep at least one link.
        for v in 0..pruned.graph.node_count() as u32 {
            prop_assert!(pruned.graph.degree(v).unwrap() >= 1);
        }
    }

    #[test]
    fn dataset_build_is_deterministic(edges in edges_strategy(10, 25), seed in 0u64..50) {
        prop_assume!(edges.iter().any(|&(u, v)| u != v));
        let g = Graph::from_edges(&edges);
        let partition = Partition::from_labels(&vec![0; g.node_count()]);
        let config = SamplingConfig { rng_seed: seed, max_second_order: Some(10), ..SamplingConfig::default() };
        let a = build_dataset(&g, &partition, &config).unwrap();
        let b = build_dataset(&g, &partition, &config).unwrap();
        prop_assert_eq!(a.samples, b.samples);
    }
}

#[test]
fn one_modularity_sanity_against_empty_partition_errors() {
    let g = Graph::from_edges(&[(0, 1)]);
    let p = Partition::from_labels(&[0]);
    assert!(modularity(&g, &p).is_err());
}
