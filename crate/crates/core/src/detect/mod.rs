//! The four community detectors: Louvain, Leiden, Fast-Greedy (CNM), and
//! two-level Infomap, plus the exact map-equation evaluator. All four run
//! on weighted graphs and report a deterministic result for a fixed
//! `(graph, config)` pair.

mod fast_greedy;
mod infomap;
mod leiden;
mod louvain;

pub use fast_greedy::fast_greedy;
pub use infomap::{infomap, map_equation};
pub use leiden::leiden;
pub use louvain::louvain;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DetectorKind {
    Louvain,
    Leiden,
    FastGreedy,
    Infomap,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [
        DetectorKind::Louvain,
        DetectorKind::Leiden,
        DetectorKind::FastGreedy,
        DetectorKind::Infomap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::Louvain => "louvain",
            DetectorKind::Leiden => "leiden",
            DetectorKind::FastGreedy => "fast_greedy",
            DetectorKind::Infomap => "infomap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectorConfig {
    pub detector: DetectorKind,
    /// Scales the null-model term of the modularity gain; 1.0 reproduces
    /// plain weighted modularity.
    pub resolution: f64,
    pub rng_seed: u64,
    pub max_passes: usize,
    /// Minimum objective gain per pass to keep iterating.
    pub tolerance: f64,
}

impl DetectorConfig {
    pub fn new(detector: DetectorKind) -> DetectorConfig {
        DetectorConfig {
            detector,
            resolution: 1.0,
            rng_seed: 0,
            max_passes: 50,
            tolerance: 1e-7,
        }
    }

    pub fn with_seed(detector: DetectorKind, rng_seed: u64) -> DetectorConfig {
        DetectorConfig {
            rng_seed,
            ..DetectorConfig::new(detector)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution.is_nan() || self.resolution <= 0.0 {
            return Err(Error::InvalidConfig(String::from("resolution must be > 0")));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidConfig(String::from("max_passes must be >= 1")));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig(String::from("tolerance must be > 0")));
        }
        Ok(())
    }
}

/// Outcome of one detector run. `objective` is the weighted modularity of
/// the returned partition for the modularity-based detectors and the
/// two-level codelength in bits for Infomap; `objective_trace` holds the
/// per-pass values behind it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DetectionResult {
    pub partition: Partition,
    pub objective: f64,
    pub passes_used: usize,
    pub objective_trace: Vec<f64>,
}

/// Runs the detector selected by `config.detector`.
pub fn detect(graph: &Graph, config: &DetectorConfig) -> Result<DetectionResult> {
    match config.detector {
        DetectorKind::Louvain => louvain(graph, config),
        DetectorKind::Leiden => leiden(graph, config),
        DetectorKind::FastGreedy => fast_greedy(graph, config),
        DetectorKind::Infomap => infomap(graph, config),
    }
}

pub(crate) fn check_detectable(graph: &Graph, config: &DetectorConfig) -> Result<()> {
    config.validate()?;
    if graph.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if graph.link_count() == 0 || graph.total_weight() <= 0.0 {
        return Err(Error::NoLinks);
    }
    Ok(())
}

/// Working graph for the move/aggregate detectors. Aggregated intra
/// weights live in `self_weight` (counted once); `strength` counts a
/// self-loop twice so that strengths always sum to `2 * total_weight`.
#[derive(Debug, Clone)]
pub(crate) struct LevelGraph {
    pub adj: Vec<Vec<(u32, f64)>>,
    pub self_weight: Vec<f64>,
    pub strength: Vec<f64>,
    pub total_weight: f64,
}

impl LevelGraph {
    pub fn from_graph(graph: &Graph) -> LevelGraph {
        let n = graph.node_count();
        let mut adj = Vec::with_capacity(n);
        let mut strength = Vec::with_capacity(n);
        for node in 0..n as NodeId {
            let list: Vec<(u32, f64)> = graph.neighbors(node).to_vec();
            strength.push(list.iter().map(|&(_, w)| w).sum());
            adj.push(list);
        }
        LevelGraph {
            adj,
            self_weight: vec![0.0; n],
            strength,
            total_weight: graph.total_weight(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Collapses nodes by `labels` (dense 0..k) into a smaller level.
    pub fn aggregate(&self, labels: &[u32]) -> LevelGraph {
        let k = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut self_weight = vec![0.0; k];
        let mut between: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); k];
        for node in 0..self.node_count() {
            let c = labels[node] as usize;
            self_weight[c] += self.self_weight[node];
            for &(nbr, w) in &self.adj[node] {
                let nc = labels[nbr as usize] as usize;
                if nc == c {
                    if (nbr as usize) > node {
                        self_weight[c] += w;
                    }
                } else {
                    *between[c].entry(nc as u32).or_insert(0.0) += w;
                }
            }
        }
        let adj: Vec<Vec<(u32, f64)>> = between
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        let strength = (0..k)
            .map(|c| adj[c].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self_weight[c])
            .collect();
        LevelGraph {
            adj,
            self_weight,
            strength,
            total_weight: self.total_weight,
        }
    }
}

/// Greedy modularity-gain sweeps: nodes visit in a seeded random order
/// and move to the neighboring community with the largest positive gain
/// (ties to the lowest community id) until a full sweep moves nothing.
/// Returns dense community labels.
pub(crate) fn local_move<R: Rng>(
    level: &LevelGraph,
    init: Option<&[u32]>,
    rng: &mut R,
    resolution: f64,
) -> Vec<u32> {
    let n = level.node_count();
    let mut labels: Vec<u32> = match init {
        Some(init) => init.to_vec(),
        None => (0..n as u32).collect(),
    };
    let slots = labels.iter().copied().max().map_or(1, |m| m as usize + 1);
    let mut comm_strength = vec![0.0; slots.max(n)];
    for node in 0..n {
        comm_strength[labels[node] as usize] += level.strength[node];
    }
    let two_w = 2.0 * level.total_weight;

    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut weight_to: Vec<f64> = vec![0.0; comm_strength.len()];
    let mut is_touched = vec![false; comm_strength.len()];
    let mut touched: Vec<u32> = Vec::new();
    const MIN_GAIN: f64 = 1e-12;

    loop {
        let mut moved_any = false;
        order.shuffle(rng);
        for &node in &order {
            let node = node as usize;
            let current = labels[node];
            for &(nbr, w) in &level.adj[node] {
                let c = labels[nbr as usize];
                if !is_touched[c as usize] {
                    is_touched[c as usize] = true;
                    touched.push(c);
                }
                weight_to[c as usize] += w;
            }
            let s_node = level.strength[node];
            comm_strength[current as usize] -= s_node;

            let score_of = |c: u32| {
                weight_to[c as usize] - resolution * s_node * comm_strength[c as usize] / two_w
            };
            // Ascending scan + strict improvement resolves equal gains to
            // the lowest community id.
            touched.sort_unstable();
            let base = score_of(current);
            let mut best = current;
            let mut best_gain = 0.0;
            for &c in &touched {
                if c == current {
                    continue;
                }
                let gain = score_of(c) - base;
                if gain > best_gain + MIN_GAIN {
                    best_gain = gain;
                    best = c;
                }
            }
            if best != current {
                labels[node] = best;
                moved_any = true;
            }
            comm_strength[labels[node] as usize] += s_node;
            for &c in &touched {
                weight_to[c as usize] = 0.0;
                is_touched[c as usize] = false;
            }
            touched.clear();
        }
        if !moved_any {
            break;
        }
    }
    densify(&labels)
}

/// Remaps arbitrary labels to 0..k in order of first appearance.
pub(crate) fn densify(labels: &[u32]) -> Vec<u32> {
    let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = remap.len() as u32;
            *remap.entry(l).or_insert(next)
        })
        .collect()
}

/// Splits every community of `labels` into its connected components on
/// `graph`. Splitting a disconnected community never lowers weighted
/// modularity.
pub(crate) fn split_into_connected(graph: &Graph, labels: &[u32]) -> Vec<u32> {
    let n = graph.node_count();
    let mut component = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut queue: Vec<u32> = Vec::new();
    for start in 0..n {
        if component[start] != u32::MAX {
            continue;
        }
        component[start] = next;
        queue.push(start as u32);
        while let Some(node) = queue.pop() {
            for &(nbr, _) in graph.neighbors(node) {
                if component[nbr as usize] == u32::MAX && labels[nbr as usize] == labels[start] {
                    component[nbr as usize] = next;
                    queue.push(nbr);
                }
            }
        }
        next += 1;
    }
    densify(&component)
}

/// True when every community induces a connected subgraph.
pub fn communities_connected(graph: &Graph, partition: &Partition) -> bool {
    let split = split_into_connected(graph, partition.labels());
    split.iter().copied().max().map_or(0, |m| m + 1) as usize == partition.community_count()
}

/// Flattens level labels onto original nodes in place.
pub(crate) fn compose(node_to_level: &mut [u32], level_labels: &[u32]) {
    for slot in node_to_level.iter_mut() {
        *slot = level_labels[*slot as usize];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_graph_strengths_sum_to_twice_weight() {
        let g = Graph::from_weighted_edges(&[(0, 1, 2.0), (1, 2, 1.0), (2, 0, 0.5)]).unwrap();
        let level = LevelGraph::from_graph(&g);
        let total: f64 = level.strength.iter().sum();
        assert!((total - 2.0 * g.total_weight()).abs() < 1e-12);

        let agg = level.aggregate(&[0, 0, 1]);
        assert_eq!(agg.node_count(), 2);
        // Intra weight of {0,1} is the (0,1) link.
        assert!((agg.self_weight[0] - 2.0).abs() < 1e-12);
        let agg_total: f64 = agg.strength.iter().sum();
        assert!((agg_total - 2.0 * g.total_weight()).abs() < 1e-12);
        assert!((agg.total_weight - g.total_weight()).abs() < 1e-12);
    }

    #[test]
    fn aggregate_to_single_node_is_all_self_weight() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 0)]);
        let level = LevelGraph::from_graph(&g);
        let agg = level.aggregate(&[0, 0, 0]);
        assert_eq!(agg.node_count(), 1);
        assert!(agg.adj[0].is_empty());
        assert!((agg.self_weight[0] - 3.0).abs() < 1e-12);
        assert!((agg.strength[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn split_into_connected_detects_disconnection() {
        let g = Graph::from_edges(&[(0, 1), (2, 3)]);
        let labels = vec![0, 0, 0, 0];
        let split = split_into_connected(&g, &labels);
        assert_eq!(split, vec![0, 0, 1, 1]);
        let p = Partition::from_labels(&labels);
        assert!(!communities_connected(&g, &p));
        let q = Partition::from_labels(&split);
        assert!(communities_connected(&g, &q));
    }

    #[test]
    fn densify_orders_by_first_appearance() {
        assert_eq!(densify(&[5, 5, 2, 7, 2]), vec![0, 0, 1, 2, 1]);
    }
}
