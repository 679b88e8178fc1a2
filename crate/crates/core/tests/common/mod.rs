//! Shared fixtures for the oracle suites: seeded random graphs and
//! partitions, plus the clique-pair family. Each test binary uses its
//! own subset.
#![allow(dead_code)]

use commweave_core::graph::{Graph, Partition};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Erdos-Renyi-style random graph; resamples until it has >= 1 link.
pub fn random_graph(n: usize, p_link: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if rng.gen_bool(p_link) {
                    edges.push((u, v));
                }
            }
        }
        if !edges.is_empty() {
            let g = Graph::from_edges(&edges);
            if g.node_count() == n {
                return g;
            }
            // Trailing isolated nodes shrink the node set; pin it with a
            // link touching the last node.
            edges.push((n as u32 - 1, 0));
            return Graph::from_edges(&edges);
        }
    }
}

/// Random connected graph: a random spanning tree plus extra links.
pub fn random_connected_graph(n: usize, extra_links: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n as u32 {
        let parent = rng.gen_range(0..v);
        edges.push((parent, v));
    }
    let mut added = 0;
    let mut guard = 0;
    while added < extra_links && guard < 100 * extra_links + 100 {
        guard += 1;
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u != v && !edges.contains(&(u.min(v), u.max(v))) && !edges.contains(&(u.max(v), u.min(v)))
        {
            edges.push((u, v));
            added += 1;
        }
    }
    Graph::from_edges(&edges)
}

pub fn random_partition(n: usize, max_communities: usize, seed: u64) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=max_communities.max(1));
    let labels: Vec<u32> = (0..n).map(|_| rng.gen_range(0..k as u32)).collect();
    Partition::from_labels(&labels)
}

/// Two equal cliques joined by a single bridge link (0, size).
pub fn clique_pair(size: u32) -> (Graph, Partition) {
    let mut edges = Vec::new();
    for offset in [0, size] {
        for i in 0..size {
            for j in (i + 1)..size {
                edges.push((offset + i, offset + j));
            }
        }
    }
    edges.push((0, size));
    let labels: Vec<u32> = (0..2 * size).map(|v| (v >= size) as u32).collect();
    (Graph::from_edges(&edges), Partition::from_labels(&labels))
}

/// Calls `visit` with every set partition of `n` items, encoded as
/// restricted-growth labels.
pub fn for_each_partition(n: usize, mut visit: impl FnMut(&[u32])) {
    fn recurse(labels: &mut Vec<u32>, used: u32, n: usize, visit: &mut impl FnMut(&[u32])) {
        if labels.len() == n {
            visit(labels);
            return;
        }
        for c in 0..=used {
            labels.push(c);
            let next_used = used.max(c + 1);
            recurse(labels, next_used, n, visit);
            labels.pop();
        }
    }
    let mut labels = Vec::with_capacity(n);
    recurse(&mut labels, 0, n, &mut visit);
}
