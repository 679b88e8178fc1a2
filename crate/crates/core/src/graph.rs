//! Undirected simple graphs, crisp partitions, and the local structural
//! primitives (degree, clustering coefficient, common neighbors) used by
//! the pair-feature and detection stages.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type NodeId = u32;

/// Undirected simple graph over dense node ids `0..n`.
///
/// Adjacency lists are sorted by neighbor id; each undirected link is
/// stored in both endpoint lists but counted once in `link_count` and
/// `total_weight`. No self-loops, no parallel links.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<(NodeId, f64)>>,
    link_count: usize,
    total_weight: f64,
}

impl Graph {
    /// Builds an unweighted graph from raw node pairs. Self-loops are
    /// dropped, duplicate and reversed pairs collapse to one link with
    /// weight 1.0. The node set is `0..=max_id`.
    pub fn from_edges(edges: &[(NodeId, NodeId)]) -> Graph {
        let weighted: Vec<(NodeId, NodeId, f64)> =
            edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        // Unit weights cannot violate the non-negativity check.
        Graph::from_weighted_edges(&weighted).expect("unit weights are valid")
    }

    /// Builds a weighted graph. Duplicate/reversed pairs collapse to the
    /// first occurrence; self-loops are dropped; negative weights are
    /// rejected.
    pub fn from_weighted_edges(edges: &[(NodeId, NodeId, f64)]) -> Result<Graph> {
        let mut n = 0usize;
        for &(u, v, w) in edges {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::NegativeWeight { u, v, weight: w });
            }
            n = n.max(u as usize + 1).max(v as usize + 1);
        }
        let mut normalized: Vec<(NodeId, NodeId, f64)> = edges
            .iter()
            .filter(|&&(u, v, _)| u != v)
            .map(|&(u, v, w)| if u < v { (u, v, w) } else { (v, u, w) })
            .collect();
        normalized.sort_by_key(|e| (e.0, e.1));
        normalized.dedup_by_key(|e| (e.0, e.1));

        let mut adjacency = vec![Vec::new(); n];
        let mut total_weight = 0.0;
        for &(u, v, w) in &normalized {
            adjacency[u as usize].push((v, w));
            adjacency[v as usize].push((u, w));
            total_weight += w;
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        Ok(Graph {
            adjacency,
            link_count: normalized.len(),
            total_weight,
        })
    }

    /// Same topology with link weights replaced by `weight_of(u, v)`
    /// (called once per undirected link with `u < v`). Isolated nodes are
    /// preserved.
    pub fn reweighted<F: FnMut(NodeId, NodeId) -> f64>(&self, mut weight_of: F) -> Result<Graph> {
        let mut edges = Vec::with_capacity(self.link_count);
        for (u, v, _) in self.links() {
            edges.push((u, v, weight_of(u, v)));
        }
        let mut graph = Graph::from_weighted_edges(&edges)?;
        while graph.adjacency.len() < self.node_count() {
            graph.adjacency.push(Vec::new());
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn link_count(&self) -> usize {
        self.link_count
    }

    /// Sum of link weights, each undirected link counted once.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[node as usize]
    }

    pub fn has_node(&self, node: NodeId) -> bool {
        (node as usize) < self.adjacency.len()
    }

    pub fn has_link(&self, u: NodeId, v: NodeId) -> bool {
        self.has_node(u)
            && self.has_node(v)
            && self.adjacency[u as usize]
                .binary_search_by_key(&v, |&(x, _)| x)
                .is_ok()
    }

    /// Iterates every undirected link once as `(u, v, w)` with `u < v`.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = u as NodeId;
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    fn check_node(&self, node: NodeId) -> Result<()> {
        if self.has_node(node) {
            Ok(())
        } else {
            Err(Error::UnknownNode(node))
        }
    }

    /// Topological degree (neighbor count, weights ignored).
    pub fn degree(&self, node: NodeId) -> Result<usize> {
        self.check_node(node)?;
        Ok(self.adjacency[node as usize].len())
    }

    /// Sum of incident link weights.
    pub fn strength(&self, node: NodeId) -> Result<f64> {
        self.check_node(node)?;
        Ok(self.adjacency[node as usize].iter().map(|&(_, w)| w).sum())
    }

    /// Local clustering coefficient `2*T / (K*(K-1))`; 0 for degree <= 1.
    pub fn clustering_coefficient(&self, node: NodeId) -> Result<f64> {
        self.check_node(node)?;
        let neighbors = &self.adjacency[node as usize];
        let k = neighbors.len();
        if k < 2 {
            return Ok(0.0);
        }
        let mut triangles = 0usize;
        for (i, &(a, _)) in neighbors.iter().enumerate() {
            for &(b, _) in &neighbors[i + 1..] {
                if self.has_link(a, b) {
                    triangles += 1;
                }
            }
        }
        Ok(2.0 * triangles as f64 / (k * (k - 1)) as f64)
    }

    /// `|N(u) ∩ N(v)|` for distinct nodes.
    pub fn common_neighbor_count(&self, u: NodeId, v: NodeId) -> Result<usize> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::IdenticalPair(u));
        }
        let (a, b) = (&self.adjacency[u as usize], &self.adjacency[v as usize]);
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(count)
    }

    /// Mean local clustering coefficient over all nodes.
    pub fn average_clustering(&self) -> Result<f64> {
        if self.node_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut sum = 0.0;
        for node in 0..self.node_count() as NodeId {
            sum += self.clustering_coefficient(node)?;
        }
        Ok(sum / self.node_count() as f64)
    }
}

/// Crisp partition: every node carries exactly one community label,
/// labels are dense `0..k` in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Partition {
    labels: Vec<u32>,
    community_sizes: Vec<u32>,
}

impl Partition {
    /// Canonicalizes arbitrary labels to dense 0..k.
    pub fn from_labels(raw: &[u32]) -> Partition {
        let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
        let mut labels = Vec::with_capacity(raw.len());
        for &label in raw {
            let next = remap.len() as u32;
            let dense = *remap.entry(label).or_insert(next);
            labels.push(dense);
        }
        let mut community_sizes = vec![0u32; remap.len()];
        for &label in &labels {
            community_sizes[label as usize] += 1;
        }
        Partition {
            labels,
            community_sizes,
        }
    }

    /// Every node in its own community.
    pub fn singletons(node_count: usize) -> Partition {
        Partition {
            labels: (0..node_count as u32).collect(),
            community_sizes: vec![1; node_count],
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn community_count(&self) -> usize {
        self.community_sizes.len()
    }

    pub fn community_of(&self, node: NodeId) -> Result<u32> {
        self.labels
            .get(node as usize)
            .copied()
            .ok_or(Error::UnknownNode(node))
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn community_sizes(&self) -> &[u32] {
        &self.community_sizes
    }

    /// Member lists indexed by community id.
    pub fn communities(&self) -> Vec<Vec<NodeId>> {
        let mut members = vec![Vec::new(); self.community_count()];
        for (node, &c) in self.labels.iter().enumerate() {
            members[c as usize].push(node as NodeId);
        }
        members
    }

    /// True when the two partitions group nodes identically, ignoring
    /// label values.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.labels.len() == other.labels.len()
            && Partition::from_labels(&self.labels).labels
                == Partition::from_labels(&other.labels).labels
    }
}

/// Raw, possibly overlapping community memberships as read from a
/// ground-truth file. A node may list zero or many communities.
#[derive(Debug, Clone, Default)]
pub struct OverlappingAssignment {
    memberships: Vec<Vec<u32>>,
}

impl OverlappingAssignment {
    pub fn new(node_count: usize) -> OverlappingAssignment {
        OverlappingAssignment {
            memberships: vec![Vec::new(); node_count],
        }
    }

    pub fn add(&mut self, node: NodeId, community: u32) {
        let list = &mut self.memberships[node as usize];
        if !list.contains(&community) {
            list.push(community);
        }
    }

    pub fn node_count(&self) -> usize {
        self.memberships.len()
    }

    pub fn memberships_of(&self, node: NodeId) -> &[u32] {
        &self.memberships[node as usize]
    }

    /// Number of distinct community ids that appear.
    pub fn community_count(&self) -> usize {
        let mut seen: Vec<u32> = self.memberships.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Outcome of collapsing overlapping memberships to a crisp assignment:
/// `assignment[node]` is `None` for dropped nodes (no membership, or the
/// node's community shrank to a single member).
#[derive(Debug, Clone)]
pub struct DeoverlapResult {
    pub assignment: Vec<Option<u32>>,
}

impl DeoverlapResult {
    pub fn dropped_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_none()).count()
    }
}

/// Collapses overlapping memberships into a crisp assignment: each node
/// goes to its largest community (sizes measured on the raw membership
/// counts), ties broken uniformly at random under `rng_seed`; communities
/// left with a single member are then removed and their nodes dropped.
pub fn deoverlap(raw: &OverlappingAssignment, rng_seed: u64) -> DeoverlapResult {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut raw_sizes: BTreeMap<u32, u32> = BTreeMap::new();
    for node in 0..raw.node_count() as NodeId {
        for &c in raw.memberships_of(node) {
            *raw_sizes.entry(c).or_insert(0) += 1;
        }
    }

    let mut assignment: Vec<Option<u32>> = Vec::with_capacity(raw.node_count());
    for node in 0..raw.node_count() as NodeId {
        let memberships = raw.memberships_of(node);
        if memberships.is_empty() {
            assignment.push(None);
            continue;
        }
        let best_size = memberships.iter().map(|c| raw_sizes[c]).max().unwrap();
        let mut candidates: Vec<u32> = memberships
            .iter()
            .copied()
            .filter(|c| raw_sizes[c] == best_size)
            .collect();
        candidates.sort_unstable();
        assignment.push(Some(*candidates.choose(&mut rng).unwrap()));
    }

    // Community sizes are recomputed after reassignment; singleton
    // communities are removed in one pass.
    let mut post_sizes: BTreeMap<u32, u32> = BTreeMap::new();
    for c in assignment.iter().flatten() {
        *post_sizes.entry(*c).or_insert(0) += 1;
    }
    for slot in assignment.iter_mut() {
        if let Some(c) = slot {
            if post_sizes[c] <= 1 {
                *slot = None;
            }
        }
    }
    DeoverlapResult { assignment }
}

/// Ground-truth subgraph produced by [`prune_links`]: surviving nodes are
/// re-densified, `node_map[new] = old`.
#[derive(Debug, Clone)]
pub struct PrunedGraph {
    pub graph: Graph,
    pub partition: Partition,
    pub node_map: Vec<NodeId>,
}

/// Keeps only the links whose endpoints are both assigned to surviving
/// communities, drops isolated nodes, and re-densifies ids. Node removal
/// can shrink a community below two members or isolate further nodes, so
/// the filter runs to a fixed point; the returned partition always has
/// communities of two or more connected members.
pub fn prune_links(graph: &Graph, crisp: &DeoverlapResult) -> PrunedGraph {
    let n = graph.node_count();
    assert_eq!(n, crisp.assignment.len(), "assignment must cover the graph");
    let mut assigned: Vec<Option<u32>> = crisp.assignment.clone();

    loop {
        let mut comm_sizes: BTreeMap<u32, u32> = BTreeMap::new();
        for c in assigned.iter().flatten() {
            *comm_sizes.entry(*c).or_insert(0) += 1;
        }
        let mut changed = false;
        // Drop members of communities that shrank below two nodes.
        for slot in assigned.iter_mut() {
            if let Some(c) = slot {
                if comm_sizes[c] <= 1 {
                    *slot = None;
                    changed = true;
                }
            }
        }
        // Drop nodes with no surviving incident link.
        for node in 0..n {
            if assigned[node].is_none() {
                continue;
            }
            let live = graph
                .neighbors(node as NodeId)
                .iter()
                .any(|&(v, _)| assigned[v as usize].is_some());
            if !live {
                assigned[node] = None;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let node_map: Vec<NodeId> = (0..n as NodeId)
        .filter(|&v| assigned[v as usize].is_some())
        .collect();
    let mut dense_of = vec![NodeId::MAX; n];
    for (new, &old) in node_map.iter().enumerate() {
        dense_of[old as usize] = new as NodeId;
    }

    let mut edges = Vec::new();
    for (u, v, w) in graph.links() {
        if assigned[u as usize].is_some() && assigned[v as usize].is_some() {
            edges.push((dense_of[u as usize], dense_of[v as usize], w));
        }
    }
    let mut sub = Graph::from_weighted_edges(&edges).expect("weights already validated");
    // A trailing isolated node would otherwise shrink the node set.
    while sub.node_count() < node_map.len() {
        sub.adjacency.push(Vec::new());
    }

    let labels: Vec<u32> = node_map
        .iter()
        .map(|&old| assigned[old as usize].unwrap())
        .collect();
    PrunedGraph {
        graph: sub,
        partition: Partition::from_labels(&labels),
        node_map,
    }
}
