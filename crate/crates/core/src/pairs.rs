//! Node-pair sampling, same-community labeling, and the three structural
//! heterogeneity features (degree gap, clustering gap, common neighbors)
//! that feed the tree-ensemble learners.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Partition};

pub const FEATURE_NAMES: [&str; 3] = ["r_deg", "r_cc", "r_cn"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PairOrder {
    /// The pair is a link of the graph.
    First,
    /// Unlinked pair at distance exactly two (>= 1 common neighbor).
    Second,
}

/// One labeled node pair with `u < v`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairSample {
    pub u: NodeId,
    pub v: NodeId,
    pub order: PairOrder,
    pub features: [f64; 3],
    /// 1 = intra-community, 0 = inter-community.
    pub label: u8,
    pub oof_probability: Option<f64>,
}

/// The binary-classification dataset over sampled pairs.
#[derive(Debug, Clone, Default)]
pub struct PairDataset {
    pub samples: Vec<PairSample>,
    /// (intra, inter) sample counts.
    pub class_counts: (usize, usize),
}

impl PairDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_names(&self) -> [&'static str; 3] {
        FEATURE_NAMES
    }

    fn recount(&mut self) {
        let intra = self.samples.iter().filter(|s| s.label == 1).count();
        self.class_counts = (intra, self.samples.len() - intra);
    }
}

/// Sampling knobs for [`build_dataset`].
#[derive(Debug, Clone)]
pub struct SamplingConfig {
    pub include_second_order: bool,
    /// Cap on the number of second-order pairs; `None` applies the
    /// default cap of `5 * link_count`. Use `usize::MAX` to disable.
    pub max_second_order: Option<usize>,
    /// Features to keep; masked features are zeroed so the vector shape
    /// stays fixed.
    pub feature_mask: [bool; 3],
    /// Downsample the majority class to the minority count.
    pub downsample_majority: bool,
    pub rng_seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            include_second_order: true,
            max_second_order: None,
            feature_mask: [true, true, true],
            downsample_majority: false,
            rng_seed: 0,
        }
    }
}

/// Emits every link as a first-order pair and, optionally, the unlinked
/// pairs at distance exactly two as second-order pairs. Pairs are
/// normalized to `u < v`, deduplicated, and sorted. When the second-order
/// set exceeds the cap a uniform subsample is drawn under `rng_seed`.
pub fn sample_pairs(
    graph: &Graph,
    include_second_order: bool,
    max_second_order: Option<usize>,
    rng_seed: u64,
) -> Vec<(NodeId, NodeId, PairOrder)> {
    let mut pairs: Vec<(NodeId, NodeId, PairOrder)> = graph
        .links()
        .map(|(u, v, _)| (u, v, PairOrder::First))
        .collect();

    if include_second_order {
        let n = graph.node_count();
        let mut second: Vec<(NodeId, NodeId)> = Vec::new();
        let mut seen = alloc::vec![false; n];
        let mut touched: Vec<NodeId> = Vec::new();
        for u in 0..n as NodeId {
            for &(mid, _) in graph.neighbors(u) {
                for &(v, _) in graph.neighbors(mid) {
                    if v > u && !seen[v as usize] && !graph.has_link(u, v) {
                        seen[v as usize] = true;
                        touched.push(v);
                        second.push((u, v));
                    }
                }
            }
            for &v in &touched {
                seen[v as usize] = false;
            }
            touched.clear();
        }

        let cap = max_second_order.unwrap_or(5 * graph.link_count());
        if second.len() > cap {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let chosen = rand::seq::index::sample(&mut rng, second.len(), cap);
            let mut picked: Vec<(NodeId, NodeId)> = chosen.iter().map(|i| second[i]).collect();
            picked.sort_unstable();
            second = picked;
        }
        pairs.extend(second.into_iter().map(|(u, v)| (u, v, PairOrder::Second)));
    }

    pairs.sort_by_key(|&(u, v, _)| (u, v));
    pairs
}

/// `[ |K_u - K_v|, |C_u - C_v|, |N_u ∩ N_v| ]` on the unweighted topology.
pub fn featurize(graph: &Graph, u: NodeId, v: NodeId) -> Result<[f64; 3]> {
    if u == v {
        return Err(Error::IdenticalPair(u));
    }
    let deg_gap = (graph.degree(u)? as f64 - graph.degree(v)? as f64).abs();
    let cc_gap = (graph.clustering_coefficient(u)? - graph.clustering_coefficient(v)?).abs();
    let common = graph.common_neighbor_count(u, v)? as f64;
    Ok([deg_gap, cc_gap, common])
}

/// Label 1 iff both endpoints share a community.
pub fn label_pairs(pairs: &[(NodeId, NodeId, PairOrder)], partition: &Partition) -> Result<Vec<u8>> {
    pairs
        .iter()
        .map(|&(u, v, _)| Ok((partition.community_of(u)? == partition.community_of(v)?) as u8))
        .collect()
}

/// Samples, labels, and featurizes pairs in one pass.
pub fn build_dataset(
    graph: &Graph,
    partition: &Partition,
    config: &SamplingConfig,
) -> Result<PairDataset> {
    if partition.node_count() != graph.node_count() {
        return Err(Error::PartitionMismatch {
            partition_nodes: partition.node_count(),
            graph_nodes: graph.node_count(),
        });
    }
    let pairs = sample_pairs(
        graph,
        config.include_second_order,
        config.max_second_order,
        config.rng_seed,
    );
    let labels = label_pairs(&pairs, partition)?;

    // Per-node primitives are cached once; featurize would recompute the
    // clustering coefficient for every incident pair.
    let n = graph.node_count() as NodeId;
    let degree: Vec<f64> = (0..n).map(|v| graph.degree(v).unwrap() as f64).collect();
    let clustering: Vec<f64> = (0..n)
        .map(|v| graph.clustering_coefficient(v).unwrap())
        .collect();

    let mut samples = Vec::with_capacity(pairs.len());
    for (&(u, v, order), &label) in pairs.iter().zip(&labels) {
        let mut features = [
            (degree[u as usize] - degree[v as usize]).abs(),
            (clustering[u as usize] - clustering[v as usize]).abs(),
            graph.common_neighbor_count(u, v)? as f64,
        ];
        for (slot, keep) in features.iter_mut().zip(&config.feature_mask) {
            if !keep {
                *slot = 0.0;
            }
        }
        samples.push(PairSample {
            u,
            v,
            order,
            features,
            label,
            oof_probability: None,
        });
    }
    let mut dataset = PairDataset {
        samples,
        class_counts: (0, 0),
    };
    dataset.recount();

    if config.downsample_majority {
        downsample_majority(&mut dataset, config.rng_seed);
    }
    Ok(dataset)
}

fn downsample_majority(dataset: &mut PairDataset, rng_seed: u64) {
    let (intra, inter) = dataset.class_counts;
    if intra == inter || intra == 0 || inter == 0 {
        return;
    }
    let (majority_label, keep) = if intra > inter { (1u8, inter) } else { (0u8, intra) };
    let majority_idx: Vec<usize> = dataset
        .samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.label == majority_label)
        .map(|(i, _)| i)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ 0x9e37_79b9_7f4a_7c15);
    let chosen = rand::seq::index::sample(&mut rng, majority_idx.len(), keep);
    let mut keep_flags = alloc::vec![false; dataset.samples.len()];
    for (i, s) in dataset.samples.iter().enumerate() {
        if s.label != majority_label {
            keep_flags[i] = true;
        }
    }
    for i in chosen.iter() {
        keep_flags[majority_idx[i]] = true;
    }
    dataset.samples = {
        let mut kept = Vec::with_capacity(2 * keep);
        for (i, s) in dataset.samples.iter().enumerate() {
            if keep_flags[i] {
                kept.push(s.clone());
            }
        }
        kept
    };
    dataset.recount();
}
