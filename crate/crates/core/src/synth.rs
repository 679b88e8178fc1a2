//! Tree-like benchmark generator with planted communities: the graph
//! grows one node at a time from a seed clique; new nodes either found a
//! community or join one proportionally to size, and each of their links
//! lands inside the own community with probability `p_intra` (degree
//! preferential on both sides of the coin).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Partition};

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BenchmarkParams {
    /// Links attached by each newly added node.
    pub links_per_node: usize,
    /// Total node count to grow to.
    pub n_target: usize,
    /// Community-birth tuning parameter in [0, 1]: a new node founds a
    /// community with probability `min(beta, smallest community size /
    /// current node count)`.
    pub beta: f64,
    /// Fraction of links placed within the joining node's community.
    pub p_intra: f64,
    /// Size of the fully linked seed clique (community 0).
    pub k_init: usize,
    pub rng_seed: u64,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        BenchmarkParams {
            links_per_node: 1,
            n_target: 100,
            beta: 0.15,
            p_intra: 0.9,
            k_init: 3,
            rng_seed: 0,
        }
    }
}

impl BenchmarkParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(String::from(msg)));
        if self.links_per_node < 1 {
            return bad("links_per_node must be >= 1");
        }
        if self.k_init < 3 {
            return bad("k_init must be >= 3");
        }
        if self.n_target <= self.k_init {
            return bad("n_target must exceed k_init");
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad("beta must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.p_intra) {
            return bad("p_intra must be in [0, 1]");
        }
        Ok(())
    }
}

/// Picks a candidate proportionally to its degree. `candidates` must be
/// non-empty and every degree >= 1.
fn preferential_pick<R: Rng>(candidates: &[NodeId], degree: &[u64], rng: &mut R) -> NodeId {
    let total: u64 = candidates.iter().map(|&v| degree[v as usize]).sum();
    let mut ticket = rng.gen_range(0..total);
    for &v in candidates {
        let d = degree[v as usize];
        if ticket < d {
            return v;
        }
        ticket -= d;
    }
    *candidates.last().unwrap()
}

/// Grows the benchmark network and returns it with its planted partition.
pub fn generate(params: &BenchmarkParams) -> Result<(Graph, Partition)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);

    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for i in 0..params.k_init as NodeId {
        for j in (i + 1)..params.k_init as NodeId {
            edges.push((i, j));
        }
    }
    let mut degree: Vec<u64> = vec![(params.k_init - 1) as u64; params.k_init];
    let mut community_of: Vec<u32> = vec![0; params.k_init];
    let mut members: Vec<Vec<NodeId>> = vec![(0..params.k_init as NodeId).collect()];

    for new in params.k_init..params.n_target {
        let node = new as NodeId;
        let existing = new;
        let smallest = members.iter().map(|m| m.len()).min().unwrap();
        let p_new = params.beta.min(smallest as f64 / existing as f64);

        let community = if rng.gen_bool(p_new) {
            members.push(Vec::new());
            members.len() - 1
        } else {
            // Join proportionally to community size.
            let mut ticket = rng.gen_range(0..existing);
            let mut chosen = members.len() - 1;
            for (c, m) in members.iter().enumerate() {
                if ticket < m.len() {
                    chosen = c;
                    break;
                }
                ticket -= m.len();
            }
            chosen
        };
        community_of.push(community as u32);
        degree.push(0);

        let mut chosen_targets: Vec<NodeId> = Vec::with_capacity(params.links_per_node);
        for _ in 0..params.links_per_node.min(existing) {
            let want_intra = rng.gen_bool(params.p_intra);
            let intra: Vec<NodeId> = members[community]
                .iter()
                .copied()
                .filter(|v| !chosen_targets.contains(v))
                .collect();
            let outside: Vec<NodeId> = (0..node)
                .filter(|v| {
                    community_of[*v as usize] != community as u32
                        && !chosen_targets.contains(v)
                })
                .collect();
            // A fresh community has no members to link to yet; fall back
            // to the other side rather than dropping the link.
            let pool = if want_intra && !intra.is_empty() {
                intra
            } else if !outside.is_empty() {
                outside
            } else if !intra.is_empty() {
                intra
            } else {
                break;
            };
            let target = preferential_pick(&pool, &degree, &mut rng);
            chosen_targets.push(target);
            edges.push((node, target));
            degree[node as usize] += 1;
            degree[target as usize] += 1;
        }
        members[community].push(node);
    }

    let graph = Graph::from_edges(&edges);
    Ok((graph, Partition::from_labels(&community_of)))
}

/// Fraction of links whose endpoints share a planted community.
pub fn intra_link_fraction(graph: &Graph, partition: &Partition) -> f64 {
    let labels = partition.labels();
    let intra = graph
        .links()
        .filter(|&(u, v, _)| labels[u as usize] == labels[v as usize])
        .count();
    intra as f64 / graph.link_count() as f64
}

/// True when the graph is one connected component.
pub fn is_connected(graph: &Graph) -> bool {
    let n = graph.node_count();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut queue = vec![0u32];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop() {
        for &(nbr, _) in graph.neighbors(v) {
            if !seen[nbr as usize] {
                seen[nbr as usize] = true;
                count += 1;
                queue.push(nbr);
            }
        }
    }
    count == n
}
