//! Two-level Infomap: minimizes the map equation over module assignments
//! with Louvain-style move/aggregate passes. Node visit rates on an
//! undirected weighted graph are `strength / 2W`; no teleportation.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fmath::plogp;
use crate::graph::{Graph, Partition};

use super::{
    check_detectable, compose, densify, DetectionResult, DetectorConfig, LevelGraph,
};

/// Exact two-level map equation in bits:
/// `L(M) = q H(Q) + Σ_m p_m H(P_m)`, expanded into plogp terms. Module
/// exit rates are the inter-module link weights incident to the module
/// over `2W`; visit rates are `strength / 2W`.
pub fn map_equation(graph: &Graph, partition: &Partition) -> Result<f64> {
    if partition.node_count() != graph.node_count() {
        return Err(Error::PartitionMismatch {
            partition_nodes: partition.node_count(),
            graph_nodes: graph.node_count(),
        });
    }
    if graph.link_count() == 0 || graph.total_weight() <= 0.0 {
        return Err(Error::NoLinks);
    }
    let two_w = 2.0 * graph.total_weight();
    let labels = partition.labels();
    let k = partition.community_count();

    let mut exit = vec![0.0; k];
    for (u, v, w) in graph.links() {
        let (cu, cv) = (labels[u as usize], labels[v as usize]);
        if cu != cv {
            exit[cu as usize] += w / two_w;
            exit[cv as usize] += w / two_w;
        }
    }
    let mut node_sum = vec![0.0; k];
    let mut sum_node_plogp = 0.0;
    for node in 0..graph.node_count() as u32 {
        let rate = graph.strength(node)? / two_w;
        node_sum[labels[node as usize] as usize] += rate;
        sum_node_plogp += plogp(rate);
    }

    let q: f64 = exit.iter().sum();
    let sum_exit_plogp: f64 = exit.iter().map(|&e| plogp(e)).sum();
    let sum_total_plogp: f64 = (0..k).map(|m| plogp(exit[m] + node_sum[m])).sum();
    Ok(plogp(q) - 2.0 * sum_exit_plogp + sum_total_plogp - sum_node_plogp)
}

/// One sweep phase: nodes move to the neighboring module that most
/// decreases the codelength until a full sweep moves nothing.
fn sweep<R: Rng>(level: &LevelGraph, rng: &mut R) -> Vec<u32> {
    let n = level.node_count();
    let two_w = 2.0 * level.total_weight;
    let mut labels: Vec<u32> = (0..n as u32).collect();

    let p_node: Vec<f64> = level.strength.iter().map(|&s| s / two_w).collect();
    let s_adj: Vec<f64> = level
        .adj
        .iter()
        .map(|list| list.iter().map(|&(_, w)| w).sum::<f64>())
        .collect();

    let mut exit: Vec<f64> = s_adj.iter().map(|&s| s / two_w).collect();
    let mut node_sum: Vec<f64> = p_node.clone();
    let mut q: f64 = exit.iter().sum();

    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut weight_to = vec![0.0; n];
    let mut is_touched = vec![false; n];
    let mut touched: Vec<u32> = Vec::new();
    const MIN_DROP: f64 = 1e-12;

    loop {
        let mut moved_any = false;
        order.shuffle(rng);
        for &node in &order {
            let node = node as usize;
            let a = labels[node];
            for &(nbr, w) in &level.adj[node] {
                let m = labels[nbr as usize];
                if !is_touched[m as usize] {
                    is_touched[m as usize] = true;
                    touched.push(m);
                }
                weight_to[m as usize] += w;
            }
            let w_to_a = weight_to[a as usize];
            let exit_a_new = (exit[a as usize] + (2.0 * w_to_a - s_adj[node]) / two_w).max(0.0);

            touched.sort_unstable();
            let mut best = a;
            let mut best_drop = 0.0;
            for &b in &touched {
                if b == a {
                    continue;
                }
                let w_to_b = weight_to[b as usize];
                let exit_b_new =
                    (exit[b as usize] + (s_adj[node] - 2.0 * w_to_b) / two_w).max(0.0);
                let q_new = (q + 2.0 * (w_to_a - w_to_b) / two_w).max(0.0);
                let delta = plogp(q_new) - plogp(q)
                    - 2.0
                        * (plogp(exit_a_new) - plogp(exit[a as usize]) + plogp(exit_b_new)
                            - plogp(exit[b as usize]))
                    + plogp(exit_a_new + node_sum[a as usize] - p_node[node])
                    - plogp(exit[a as usize] + node_sum[a as usize])
                    + plogp(exit_b_new + node_sum[b as usize] + p_node[node])
                    - plogp(exit[b as usize] + node_sum[b as usize]);
                // Lower codelength wins; ascending scan ties to lowest id.
                if delta < -(best_drop + MIN_DROP) {
                    best_drop = -delta;
                    best = b;
                }
            }
            if best != a {
                let b = best;
                let w_to_b = weight_to[b as usize];
                q = (q + 2.0 * (w_to_a - w_to_b) / two_w).max(0.0);
                exit[a as usize] = exit_a_new;
                exit[b as usize] =
                    (exit[b as usize] + (s_adj[node] - 2.0 * w_to_b) / two_w).max(0.0);
                node_sum[a as usize] -= p_node[node];
                node_sum[b as usize] += p_node[node];
                labels[node] = b;
                moved_any = true;
            }
            for &m in &touched {
                weight_to[m as usize] = 0.0;
                is_touched[m as usize] = false;
            }
            touched.clear();
        }
        if !moved_any {
            break;
        }
    }
    densify(&labels)
}

pub fn infomap(graph: &Graph, config: &DetectorConfig) -> Result<DetectionResult> {
    check_detectable(graph, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut level = LevelGraph::from_graph(graph);
    let mut node_to_level: Vec<u32> = (0..graph.node_count() as u32).collect();

    let mut trace = Vec::new();
    let mut best_len = f64::INFINITY;
    let mut best_labels = node_to_level.clone();
    let mut prev_len = map_equation(graph, &Partition::singletons(graph.node_count()))?;
    let mut passes_used = 0;

    for _ in 0..config.max_passes {
        let labels = sweep(&level, &mut rng);
        passes_used += 1;

        let mut flat = node_to_level.clone();
        compose(&mut flat, &labels);
        let len = map_equation(graph, &Partition::from_labels(&flat))?;
        trace.push(len);
        if len < best_len {
            best_len = len;
            best_labels = flat;
        }

        let module_count = labels.iter().copied().max().unwrap() as usize + 1;
        let converged = module_count == level.node_count() || prev_len - len < config.tolerance;
        prev_len = len;
        if converged {
            break;
        }
        level = level.aggregate(&labels);
        compose(&mut node_to_level, &labels);
    }

    Ok(DetectionResult {
        partition: Partition::from_labels(&best_labels),
        objective: best_len,
        passes_used,
        objective_trace: trace,
    })
}
