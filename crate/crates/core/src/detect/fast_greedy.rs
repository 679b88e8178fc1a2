//! Clauset-Newman-Moore agglomeration: start from singletons and keep
//! merging the community pair with the largest modularity increase until
//! no merge improves. Candidate gains live in a lazily revalidated
//! max-heap.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::graph::{Graph, Partition};
use crate::metrics::weighted_modularity;

use super::{check_detectable, DetectionResult, DetectorConfig};

#[derive(Debug, Clone, Copy)]
struct Merge {
    gain: f64,
    a: u32,
    b: u32,
}

impl PartialEq for Merge {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == core::cmp::Ordering::Equal
    }
}
impl Eq for Merge {}

impl Ord for Merge {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // Max-heap on gain; equal gains pop the smallest (a, b) first.
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.a.cmp(&self.a))
            .then_with(|| other.b.cmp(&self.b))
    }
}
impl PartialOrd for Merge {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

pub fn fast_greedy(graph: &Graph, config: &DetectorConfig) -> Result<DetectionResult> {
    check_detectable(graph, config)?;
    let n = graph.node_count();
    let w_total = graph.total_weight();
    let two_w2 = 2.0 * w_total * w_total;
    let gamma = config.resolution;

    let mut alive = vec![true; n];
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut strength: Vec<f64> = (0..n as u32).map(|v| graph.strength(v).unwrap()).collect();
    let mut between: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); n];
    for (u, v, w) in graph.links() {
        between[u as usize].insert(v, w);
        between[v as usize].insert(u, w);
    }

    let gain_of = |w_ab: f64, s_a: f64, s_b: f64| w_ab / w_total - gamma * s_a * s_b / two_w2;
    let plain_gain = |w_ab: f64, s_a: f64, s_b: f64| w_ab / w_total - s_a * s_b / two_w2;

    let mut heap = BinaryHeap::new();
    for (u, v, w) in graph.links() {
        heap.push(Merge {
            gain: gain_of(w, strength[u as usize], strength[v as usize]),
            a: u,
            b: v,
        });
    }

    // Modularity of the all-singleton start.
    let mut q: f64 = -strength
        .iter()
        .map(|&s| (s / (2.0 * w_total)) * (s / (2.0 * w_total)))
        .sum::<f64>();
    let mut trace = vec![q];
    let mut merges = 0usize;

    while let Some(Merge { gain, a, b }) = heap.pop() {
        let (a, b) = (a as usize, b as usize);
        if !alive[a] || !alive[b] {
            continue;
        }
        let Some(&w_ab) = between[a].get(&(b as u32)) else {
            continue;
        };
        let current = gain_of(w_ab, strength[a], strength[b]);
        if (current - gain).abs() > 1e-12 {
            // Stale entry: requeue with the up-to-date gain.
            heap.push(Merge {
                gain: current,
                a: a as u32,
                b: b as u32,
            });
            continue;
        }
        if current <= 1e-15 {
            break;
        }

        q += plain_gain(w_ab, strength[a], strength[b]);
        trace.push(q);
        merges += 1;

        // Merge b into a.
        alive[b] = false;
        parent[b] = a as u32;
        strength[a] += strength[b];
        let b_neighbors = core::mem::take(&mut between[b]);
        between[a].remove(&(b as u32));
        for (x, w) in b_neighbors {
            let x = x as usize;
            if x == a {
                continue;
            }
            *between[a].entry(x as u32).or_insert(0.0) += w;
            between[x].remove(&(b as u32));
            *between[x].entry(a as u32).or_insert(0.0) += w;
        }
        for (&x, &w) in &between[a] {
            let a32 = a as u32;
            let (lo, hi) = if a32 < x { (a32, x) } else { (x, a32) };
            heap.push(Merge {
                gain: gain_of(w, strength[a], strength[x as usize]),
                a: lo,
                b: hi,
            });
        }
    }

    // Resolve the merge forest to flat labels.
    let labels: Vec<u32> = (0..n as u32)
        .map(|node| {
            let mut root = node;
            while parent[root as usize] != root {
                root = parent[root as usize];
            }
            root
        })
        .collect();
    let partition = Partition::from_labels(&labels);
    let objective = weighted_modularity(graph, &partition)?;
    Ok(DetectionResult {
        partition,
        objective,
        passes_used: merges,
        objective_trace: trace,
    })
}
