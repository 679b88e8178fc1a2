//! Turns out-of-fold likelihoods into a weighted similarity network:
//! each link of the original topology gets weight `max(p^2, epsilon)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::pairs::PairDataset;

#[derive(Debug, Clone)]
pub struct WeaveOptions {
    /// Floor for link weights so zero-likelihood links do not vanish in
    /// flow-based detection.
    pub epsilon: f64,
    /// Experimental: also install second-order pair similarities as new
    /// links. Off by default; the original link set is preserved.
    pub add_second_order_links: bool,
}

impl Default for WeaveOptions {
    fn default() -> Self {
        WeaveOptions {
            epsilon: 1e-6,
            add_second_order_links: false,
        }
    }
}

/// The original topology reweighted by squared likelihoods, plus the raw
/// squared similarity of every sampled pair (used by the similarity-gap
/// metrics; second-order pairs are not links).
#[derive(Debug, Clone)]
pub struct SimilarityNetwork {
    pub graph: Graph,
    pair_similarities: Vec<(NodeId, NodeId, f64)>,
}

impl SimilarityNetwork {
    /// All sampled pair similarities, sorted by `(u, v)`.
    pub fn pair_similarities(&self) -> &[(NodeId, NodeId, f64)] {
        &self.pair_similarities
    }

    /// Squared likelihood of a sampled pair, if it was sampled.
    pub fn similarity(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.pair_similarities
            .binary_search_by_key(&key, |&(a, b, _)| (a, b))
            .ok()
            .map(|i| self.pair_similarities[i].2)
    }
}

/// Builds the similarity network from a dataset whose samples carry
/// out-of-fold probabilities. Every link of `graph` must appear in the
/// dataset with a probability set.
pub fn build_similarity_network(
    graph: &Graph,
    dataset: &PairDataset,
    options: &WeaveOptions,
) -> Result<SimilarityNetwork> {
    let mut pair_similarities: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(dataset.len());
    for sample in &dataset.samples {
        let p = sample.oof_probability.ok_or(Error::MissingLikelihood {
            u: sample.u,
            v: sample.v,
        })?;
        pair_similarities.push((sample.u, sample.v, p * p));
    }
    pair_similarities.sort_by_key(|&(u, v, _)| (u, v));

    let lookup = |u: NodeId, v: NodeId| -> Result<f64> {
        let key = if u < v { (u, v) } else { (v, u) };
        pair_similarities
            .binary_search_by_key(&key, |&(a, b, _)| (a, b))
            .map(|i| pair_similarities[i].2)
            .map_err(|_| Error::MissingLikelihood { u: key.0, v: key.1 })
    };

    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(graph.link_count());
    for (u, v, _) in graph.links() {
        edges.push((u, v, lookup(u, v)?.max(options.epsilon)));
    }
    if options.add_second_order_links {
        for &(u, v, s) in &pair_similarities {
            if !graph.has_link(u, v) {
                edges.push((u, v, s.max(options.epsilon)));
            }
        }
    }
    let weighted = Graph::from_weighted_edges(&edges)?;

    Ok(SimilarityNetwork {
        graph: weighted,
        pair_similarities,
    })
}
