//! Louvain: greedy local moves followed by community aggregation,
//! repeated until a pass gains less than the configured tolerance.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{Graph, Partition};
use crate::metrics::weighted_modularity;

use super::{check_detectable, compose, local_move, DetectionResult, DetectorConfig, LevelGraph};

pub fn louvain(graph: &Graph, config: &DetectorConfig) -> Result<DetectionResult> {
    check_detectable(graph, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut level = LevelGraph::from_graph(graph);
    let mut node_to_level: Vec<u32> = (0..graph.node_count() as u32).collect();

    let mut trace = Vec::new();
    let mut best_q = f64::NEG_INFINITY;
    let mut best_labels: Vec<u32> = node_to_level.clone();
    let mut prev_q = weighted_modularity(graph, &Partition::singletons(graph.node_count()))?;
    let mut passes_used = 0;

    for _ in 0..config.max_passes {
        let labels = local_move(&level, None, &mut rng, config.resolution);
        passes_used += 1;

        let mut flat = node_to_level.clone();
        compose(&mut flat, &labels);
        let q = weighted_modularity(graph, &Partition::from_labels(&flat))?;
        trace.push(q);
        if q > best_q {
            best_q = q;
            best_labels = flat;
        }

        let community_count = labels.iter().copied().max().unwrap() as usize + 1;
        let converged = community_count == level.node_count() || q - prev_q < config.tolerance;
        prev_q = q;
        if converged {
            break;
        }
        level = level.aggregate(&labels);
        compose(&mut node_to_level, &labels);
    }

    Ok(DetectionResult {
        partition: Partition::from_labels(&best_labels),
        objective: best_q,
        passes_used,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::DetectorKind;

    fn clique(offset: u32, size: u32) -> Vec<(u32, u32)> {
        let mut edges = Vec::new();
        for i in 0..size {
            for j in (i + 1)..size {
                edges.push((offset + i, offset + j));
            }
        }
        edges
    }

    fn two_cliques_with_bridge(size: u32) -> Graph {
        let mut edges = clique(0, size);
        edges.extend(clique(size, size));
        edges.push((0, size));
        Graph::from_edges(&edges)
    }

    #[test]
    fn recovers_two_cliques() {
        let g = two_cliques_with_bridge(4);
        let result = louvain(&g, &DetectorConfig::with_seed(DetectorKind::Louvain, 3)).unwrap();
        let expected = Partition::from_labels(&[0, 0, 0, 0, 1, 1, 1, 1]);
        assert!(result.partition.same_grouping(&expected));
        assert!(
            (result.objective - weighted_modularity(&g, &result.partition).unwrap()).abs()
                < 1e-12
        );
    }

    #[test]
    fn single_triangle_is_one_community() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 0)]);
        let result = louvain(&g, &DetectorConfig::with_seed(DetectorKind::Louvain, 0)).unwrap();
        assert_eq!(result.partition.community_count(), 1);
        assert!(result.objective.abs() < 1e-12);
    }

    #[test]
    fn deterministic_under_seed() {
        let g = two_cliques_with_bridge(5);
        let config = DetectorConfig::with_seed(DetectorKind::Louvain, 42);
        let a = louvain(&g, &config).unwrap();
        let b = louvain(&g, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_is_monotone() {
        let g = two_cliques_with_bridge(6);
        for seed in 0..20 {
            let result =
                louvain(&g, &DetectorConfig::with_seed(DetectorKind::Louvain, seed)).unwrap();
            for pair in result.objective_trace.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-12);
            }
        }
    }

    #[test]
    fn rejects_degenerate_graphs() {
        let empty = Graph::from_edges(&[]);
        assert!(louvain(&empty, &DetectorConfig::new(DetectorKind::Louvain)).is_err());
    }
}
