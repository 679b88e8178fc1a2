//! Leiden: Louvain-style moves plus a refinement phase that regrows each
//! community from singletons through random merges into connected,
//! well-linked subcommunities. Aggregation happens over the refined
//! subcommunities, seeded with the move-phase assignment, which is what
//! keeps returned communities connected.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{Graph, Partition};
use crate::metrics::weighted_modularity;

use super::{
    check_detectable, compose, densify, local_move, split_into_connected, DetectionResult,
    DetectorConfig, LevelGraph,
};

/// Splits each community into connected, well-linked subcommunities.
/// Only singleton subcommunities move; a singleton may merge into a
/// subcommunity it is linked to when both sides pass the well-linkedness
/// threshold and the merge has positive modularity gain. The target is
/// chosen uniformly at random among eligible candidates.
fn refine<R: Rng>(
    level: &LevelGraph,
    labels: &[u32],
    rng: &mut R,
    resolution: f64,
) -> Vec<u32> {
    let n = level.node_count();
    let two_w = 2.0 * level.total_weight;
    let mut refined: Vec<u32> = (0..n as u32).collect();

    let community_count = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); community_count];
    for (node, &c) in labels.iter().enumerate() {
        members[c as usize].push(node as u32);
    }

    let mut sub_strength: Vec<f64> = level.strength.clone();
    let mut sub_size: Vec<u32> = vec![1; n];
    // Weight from each (singleton) subcommunity to the rest of its
    // community; maintained incrementally during merges.
    let mut sub_conn: Vec<f64> = vec![0.0; n];

    for community in members {
        if community.len() <= 1 {
            continue;
        }
        let comm_strength: f64 = community.iter().map(|&v| level.strength[v as usize]).sum();
        for &node in &community {
            sub_conn[node as usize] = level.adj[node as usize]
                .iter()
                .filter(|&&(nbr, _)| labels[nbr as usize] == labels[node as usize])
                .map(|&(_, w)| w)
                .sum();
        }

        let mut order = community.clone();
        order.shuffle(rng);
        let mut weight_to: BTreeMap<u32, f64> = BTreeMap::new();
        for &node in &order {
            let node = node as usize;
            let rep = refined[node];
            if sub_size[rep as usize] > 1 {
                continue;
            }
            let s_node = level.strength[node];
            // The mover itself must be well-linked to its community.
            if sub_conn[rep as usize]
                < resolution * s_node * (comm_strength - s_node) / two_w
            {
                continue;
            }
            weight_to.clear();
            for &(nbr, w) in &level.adj[node] {
                if labels[nbr as usize] == labels[node] {
                    *weight_to.entry(refined[nbr as usize]).or_insert(0.0) += w;
                }
            }
            let mut candidates: Vec<u32> = Vec::new();
            for (&target, &w_to) in &weight_to {
                if target == rep || w_to <= 0.0 {
                    continue;
                }
                let target_strength = sub_strength[target as usize];
                let well_linked = sub_conn[target as usize]
                    >= resolution * target_strength * (comm_strength - target_strength) / two_w;
                let gain = w_to - resolution * s_node * target_strength / two_w;
                if well_linked && gain > 1e-12 {
                    candidates.push(target);
                }
            }
            if candidates.is_empty() {
                continue;
            }
            let target = candidates[rng.gen_range(0..candidates.len())];
            let w_to = weight_to[&target];
            sub_strength[target as usize] += s_node;
            sub_size[target as usize] += 1;
            sub_conn[target as usize] += sub_conn[rep as usize] - 2.0 * w_to;
            sub_size[rep as usize] = 0;
            refined[node] = target;
        }
    }
    densify(&refined)
}

pub fn leiden(graph: &Graph, config: &DetectorConfig) -> Result<DetectionResult> {
    check_detectable(graph, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut level = LevelGraph::from_graph(graph);
    let mut node_to_level: Vec<u32> = (0..graph.node_count() as u32).collect();
    let mut init: Option<Vec<u32>> = None;

    let mut trace = Vec::new();
    let mut best_q = f64::NEG_INFINITY;
    let mut best_labels = node_to_level.clone();
    let mut prev_q = weighted_modularity(graph, &Partition::singletons(graph.node_count()))?;
    let mut passes_used = 0;

    for _ in 0..config.max_passes {
        let labels = local_move(&level, init.as_deref(), &mut rng, config.resolution);
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

        let refined = refine(&level, &labels, &mut rng, config.resolution);
        let refined_count = refined.iter().copied().max().unwrap() as usize + 1;
        // Seed the next move phase with the unrefined communities.
        let mut parent = vec![0u32; refined_count];
        for node in 0..level.node_count() {
            parent[refined[node] as usize] = labels[node];
        }
        level = level.aggregate(&refined);
        compose(&mut node_to_level, &refined);
        init = Some(parent);
    }

    // Guarantee: every returned community induces a connected subgraph.
    let connected = split_into_connected(graph, &best_labels);
    let partition = Partition::from_labels(&connected);
    let objective = weighted_modularity(graph, &partition)?;
    Ok(DetectionResult {
        partition,
        objective,
        passes_used,
        objective_trace: trace,
    })
}
