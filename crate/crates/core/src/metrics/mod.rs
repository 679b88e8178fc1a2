//! Partition quality metrics: modularity (count and weighted forms),
//! per-community modularity terms, NMI, ARI, the internal/external
//! similarity-gap statistics, and Pearson correlation with a Student-t
//! p-value.

mod correlation;

pub use correlation::{improvement_delta, pearson_with_ttest, CorrelationResult};

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;
use crate::graph::{Graph, Partition};
use crate::weave::SimilarityNetwork;

fn check_cover(graph: &Graph, partition: &Partition) -> Result<()> {
    if partition.node_count() != graph.node_count() {
        return Err(Error::PartitionMismatch {
            partition_nodes: partition.node_count(),
            graph_nodes: graph.node_count(),
        });
    }
    Ok(())
}

/// Per-community internal weight and total strength, the two quantities
/// every modularity form needs.
fn community_weights(graph: &Graph, partition: &Partition) -> (Vec<f64>, Vec<f64>) {
    let k = partition.community_count();
    let labels = partition.labels();
    let mut internal = vec![0.0; k];
    let mut strength = vec![0.0; k];
    for (u, v, w) in graph.links() {
        let (cu, cv) = (labels[u as usize] as usize, labels[v as usize] as usize);
        strength[cu] += w;
        strength[cv] += w;
        if cu == cv {
            internal[cu] += w;
        }
    }
    (internal, strength)
}

/// Count-based modularity over the unweighted topology (weights ignored).
pub fn modularity(graph: &Graph, partition: &Partition) -> Result<f64> {
    check_cover(graph, partition)?;
    if graph.link_count() == 0 {
        return Err(Error::NoLinks);
    }
    let k = partition.community_count();
    let labels = partition.labels();
    let mut internal = vec![0usize; k];
    let mut degree = vec![0usize; k];
    for (u, v, _) in graph.links() {
        let (cu, cv) = (labels[u as usize] as usize, labels[v as usize] as usize);
        degree[cu] += 1;
        degree[cv] += 1;
        if cu == cv {
            internal[cu] += 1;
        }
    }
    let l = graph.link_count() as f64;
    let mut q = 0.0;
    for c in 0..k {
        let frac = internal[c] as f64 / l;
        let expected = degree[c] as f64 / (2.0 * l);
        q += frac - expected * expected;
    }
    Ok(q)
}

/// Weighted modularity; equals [`modularity`] when all weights are 1.
pub fn weighted_modularity(graph: &Graph, partition: &Partition) -> Result<f64> {
    check_cover(graph, partition)?;
    let w_total = graph.total_weight();
    if graph.link_count() == 0 || w_total <= 0.0 {
        return Err(Error::NoLinks);
    }
    let (internal, strength) = community_weights(graph, partition);
    let mut q = 0.0;
    for c in 0..partition.community_count() {
        let frac = internal[c] / w_total;
        let expected = strength[c] / (2.0 * w_total);
        q += frac - expected * expected;
    }
    Ok(q)
}

/// The single community's summand of the weighted modularity sum.
pub fn community_modularity(graph: &Graph, partition: &Partition, community: u32) -> Result<f64> {
    check_cover(graph, partition)?;
    let w_total = graph.total_weight();
    if graph.link_count() == 0 || w_total <= 0.0 {
        return Err(Error::NoLinks);
    }
    if community as usize >= partition.community_count() {
        return Err(Error::UnknownCommunity(community));
    }
    let (internal, strength) = community_weights(graph, partition);
    let c = community as usize;
    let frac = internal[c] / w_total;
    let expected = strength[c] / (2.0 * w_total);
    Ok(frac - expected * expected)
}

fn contingency(a: &Partition, b: &Partition) -> BTreeMap<(u32, u32), u64> {
    let mut table = BTreeMap::new();
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        *table.entry((la, lb)).or_insert(0u64) += 1;
    }
    table
}

fn entropy(sizes: &[u32], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * fmath::ln(p)
        })
        .sum()
}

/// Normalized mutual information, `2 I(A;B) / (H(A) + H(B))` with natural
/// logs. Both partitions single-community: 1.0; exactly one: 0.0.
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64> {
    if a.node_count() != b.node_count() || a.node_count() == 0 {
        return Err(Error::NodeSetMismatch {
            left: a.node_count(),
            right: b.node_count(),
        });
    }
    let n = a.node_count() as f64;
    let h_a = entropy(a.community_sizes(), n);
    let h_b = entropy(b.community_sizes(), n);
    if h_a == 0.0 && h_b == 0.0 {
        return Ok(1.0);
    }
    if h_a == 0.0 || h_b == 0.0 {
        return Ok(0.0);
    }
    let mut mutual = 0.0;
    for (&(la, lb), &count) in &contingency(a, b) {
        let joint = count as f64 / n;
        let pa = a.community_sizes()[la as usize] as f64 / n;
        let pb = b.community_sizes()[lb as usize] as f64 / n;
        mutual += joint * fmath::ln(joint / (pa * pb));
    }
    Ok((2.0 * mutual / (h_a + h_b)).clamp(0.0, 1.0))
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Hubert-Arabie adjusted Rand index. Degenerate identical partitions
/// (denominator 0) return 1.0.
pub fn ari(a: &Partition, b: &Partition) -> Result<f64> {
    if a.node_count() != b.node_count() || a.node_count() == 0 {
        return Err(Error::NodeSetMismatch {
            left: a.node_count(),
            right: b.node_count(),
        });
    }
    if a.node_count() < 2 {
        return Err(Error::InvalidConfig(alloc::string::String::from(
            "ari needs at least 2 nodes",
        )));
    }
    let n = a.node_count() as u64;
    let sum_cells: f64 = contingency(a, b).values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = a.community_sizes().iter().map(|&s| choose2(s as u64)).sum();
    let sum_b: f64 = b.community_sizes().iter().map(|&s| choose2(s as u64)).sum();
    let expected = sum_a * sum_b / choose2(n);
    let denominator = 0.5 * (sum_a + sum_b) - expected;
    if denominator == 0.0 {
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / denominator)
}

/// Normalized internal/external similarity averages, per community and
/// network-wide. Normalization divides each link-class sum by
/// `S_total * link_class_count`, where `S_total` sums the similarity of
/// every sampled pair. Communities missing a link class report 0.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimilarityGap {
    pub per_community: Vec<CommunityGap>,
    pub global_internal: f64,
    pub global_external: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CommunityGap {
    pub community: u32,
    pub internal: f64,
    pub external: f64,
}

impl SimilarityGap {
    pub fn gap(&self) -> f64 {
        self.global_internal - self.global_external
    }
}

pub fn similarity_gap(sim: &SimilarityNetwork, partition: &Partition) -> Result<SimilarityGap> {
    check_cover(&sim.graph, partition)?;
    let s_total: f64 = sim.pair_similarities().iter().map(|&(_, _, s)| s).sum();
    if s_total <= 0.0 {
        return Err(Error::ZeroSimilarityMass);
    }
    let k = partition.community_count();
    let labels = partition.labels();
    let mut in_sum = vec![0.0; k];
    let mut in_count = vec![0usize; k];
    let mut out_sum = vec![0.0; k];
    let mut out_count = vec![0usize; k];
    let (mut global_in_sum, mut global_in_count) = (0.0, 0usize);
    let (mut global_out_sum, mut global_out_count) = (0.0, 0usize);

    for (u, v, _) in sim.graph.links() {
        let s = sim.similarity(u, v).unwrap_or(0.0);
        let (cu, cv) = (labels[u as usize] as usize, labels[v as usize] as usize);
        if cu == cv {
            in_sum[cu] += s;
            in_count[cu] += 1;
            global_in_sum += s;
            global_in_count += 1;
        } else {
            out_sum[cu] += s;
            out_count[cu] += 1;
            out_sum[cv] += s;
            out_count[cv] += 1;
            global_out_sum += s;
            global_out_count += 1;
        }
    }

    let norm = |sum: f64, count: usize| {
        if count == 0 {
            0.0
        } else {
            sum / (s_total * count as f64)
        }
    };
    let per_community = (0..k)
        .map(|c| CommunityGap {
            community: c as u32,
            internal: norm(in_sum[c], in_count[c]),
            external: norm(out_sum[c], out_count[c]),
        })
        .collect();
    Ok(SimilarityGap {
        per_community,
        global_internal: norm(global_in_sum, global_in_count),
        global_external: norm(global_out_sum, global_out_count),
    })
}

/// Everything the evaluation stage reports for one partition.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricReport {
    pub q_weighted: f64,
    /// Against ground truth, when one was supplied.
    pub nmi: Option<f64>,
    pub ari: Option<f64>,
    pub per_community: Vec<CommunityReport>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CommunityReport {
    pub community: u32,
    pub size: u32,
    pub q_i: f64,
    pub s_in: f64,
    pub s_out: f64,
}

/// Builds a [`MetricReport`] for `partition` on `graph`. Similarity-gap
/// columns are filled when `sim` is given; NMI/ARI when `truth` is given
/// (over the same node set — project first if nodes were dropped).
pub fn metric_report(
    graph: &Graph,
    partition: &Partition,
    sim: Option<&SimilarityNetwork>,
    truth: Option<&Partition>,
) -> Result<MetricReport> {
    check_cover(graph, partition)?;
    let w_total = graph.total_weight();
    if graph.link_count() == 0 || w_total <= 0.0 {
        return Err(Error::NoLinks);
    }
    let (internal, strength) = community_weights(graph, partition);
    let gaps = match sim {
        Some(s) => Some(similarity_gap(s, partition)?),
        None => None,
    };
    let mut q_weighted = 0.0;
    let mut per_community = Vec::with_capacity(partition.community_count());
    for c in 0..partition.community_count() {
        let frac = internal[c] / w_total;
        let expected = strength[c] / (2.0 * w_total);
        let q_i = frac - expected * expected;
        q_weighted += q_i;
        let (s_in, s_out) = gaps
            .as_ref()
            .map(|g| (g.per_community[c].internal, g.per_community[c].external))
            .unwrap_or((0.0, 0.0));
        per_community.push(CommunityReport {
            community: c as u32,
            size: partition.community_sizes()[c],
            q_i,
            s_in,
            s_out,
        });
    }
    let (nmi_value, ari_value) = match truth {
        Some(t) => (Some(nmi(partition, t)?), Some(ari(partition, t)?)),
        None => (None, None),
    };
    Ok(MetricReport {
        q_weighted,
        nmi: nmi_value,
        ari: ari_value,
        per_community,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairs::{build_dataset, SamplingConfig};
    use crate::weave::{build_similarity_network, WeaveOptions};

    fn two_cliques() -> (Graph, Partition) {
        // Two disconnected triangles.
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        let p = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        (g, p)
    }

    #[test]
    fn one_community_modularity_is_zero() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 0)]);
        let p = Partition::from_labels(&[0, 0, 0]);
        assert!(modularity(&g, &p).unwrap().abs() < 1e-15);
        assert!(weighted_modularity(&g, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn two_equal_disconnected_cliques_score_half() {
        let (g, p) = two_cliques();
        assert!((modularity(&g, &p).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weighted_equals_unweighted_on_unit_weights() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        let p = Partition::from_labels(&[0, 0, 1, 1]);
        let q = modularity(&g, &p).unwrap();
        let qw = weighted_modularity(&g, &p).unwrap();
        assert!((q - qw).abs() < 1e-12);
    }

    #[test]
    fn weighted_modularity_scale_invariant() {
        let g = Graph::from_weighted_edges(&[(0, 1, 0.2), (1, 2, 0.7), (2, 3, 1.4), (3, 0, 0.1)])
            .unwrap();
        let p = Partition::from_labels(&[0, 0, 1, 1]);
        let q1 = weighted_modularity(&g, &p).unwrap();
        let scaled = g.reweighted(|u, v| {
            3.7 * g
                .neighbors(u)
                .iter()
                .find(|&&(x, _)| x == v)
                .unwrap()
                .1
        })
        .unwrap();
        let q2 = weighted_modularity(&scaled, &p).unwrap();
        assert!((q1 - q2).abs() < 1e-12);
    }

    #[test]
    fn community_terms_sum_to_total() {
        let (g, p) = two_cliques();
        let total = weighted_modularity(&g, &p).unwrap();
        let sum: f64 = (0..p.community_count() as u32)
            .map(|c| community_modularity(&g, &p, c).unwrap())
            .sum();
        assert!((total - sum).abs() < 1e-12);
        assert_eq!(
            community_modularity(&g, &p, 9),
            Err(Error::UnknownCommunity(9))
        );
    }

    #[test]
    fn nmi_identical_is_one() {
        let p = Partition::from_labels(&[0, 0, 1, 1, 2]);
        assert!((nmi(&p, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nmi_against_single_community_is_zero() {
        let a = Partition::from_labels(&[0, 0, 0, 0]);
        let b = Partition::from_labels(&[0, 0, 1, 1]);
        assert_eq!(nmi(&a, &b).unwrap(), 0.0);
        assert_eq!(nmi(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn nmi_known_pair() {
        // {1,2,3 | 4,5,6} vs {1,2 | 3,4,5,6}, contingency 2/1/0/3.
        let a = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        let b = Partition::from_labels(&[0, 0, 1, 1, 1, 1]);
        let n = 6.0;
        let h_a = -(2.0 * (3.0 / n) * (3.0f64 / n).ln());
        let h_b = -((2.0 / n) * (2.0f64 / n).ln() + (4.0 / n) * (4.0f64 / n).ln());
        let mut mutual = 0.0;
        for (nij, ai, bj) in [(2.0, 3.0, 2.0), (1.0, 3.0, 4.0), (3.0, 3.0, 4.0)] {
            mutual += (nij / n) * ((nij * n) / (ai * bj)).ln();
        }
        let expected = 2.0 * mutual / (h_a + h_b);
        assert!((nmi(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn nmi_symmetric_and_relabel_invariant() {
        let a = Partition::from_labels(&[0, 1, 1, 2, 0, 2]);
        let b = Partition::from_labels(&[5, 5, 3, 3, 9, 9]);
        assert!((nmi(&a, &b).unwrap() - nmi(&b, &a).unwrap()).abs() < 1e-15);
        let b_relabeled = Partition::from_labels(&[1, 1, 2, 2, 0, 0]);
        assert!((nmi(&a, &b).unwrap() - nmi(&a, &b_relabeled).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn ari_identical_is_one() {
        let p = Partition::from_labels(&[0, 1, 1, 2, 2, 2]);
        assert_eq!(ari(&p, &p).unwrap(), 1.0);
        let single = Partition::from_labels(&[0, 0, 0]);
        assert_eq!(ari(&single, &single).unwrap(), 1.0);
    }

    #[test]
    fn ari_node_set_mismatch() {
        let a = Partition::from_labels(&[0, 1]);
        let b = Partition::from_labels(&[0, 1, 2]);
        assert!(matches!(ari(&a, &b), Err(Error::NodeSetMismatch { .. })));
        assert!(matches!(nmi(&a, &b), Err(Error::NodeSetMismatch { .. })));
    }

    #[test]
    fn similarity_gap_symmetry_and_boundaries() {
        // Two triangles joined by two links; all similarities equal.
        let g = Graph::from_edges(&[
            (0, 1),
            (1, 2),
            (2, 0),
            (3, 4),
            (4, 5),
            (5, 3),
            (2, 3),
            (0, 5),
        ]);
        let p = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        let mut ds = build_dataset(&g, &p, &SamplingConfig::default()).unwrap();
        for s in &mut ds.samples {
            s.oof_probability = Some(0.6);
        }
        let sim = build_similarity_network(&g, &ds, &WeaveOptions::default()).unwrap();
        let gap = similarity_gap(&sim, &p).unwrap();
        // Each community: 3 internal links, 2 external links, equal
        // similarity everywhere -> internal == external per community.
        for c in &gap.per_community {
            assert!((c.internal - c.external).abs() < 1e-15);
        }
        assert!((gap.global_internal - gap.global_external).abs() < 1e-15);

        // No external links at all: external reported as 0.
        let (g2, p2) = two_cliques();
        let mut ds2 = build_dataset(&g2, &p2, &SamplingConfig::default()).unwrap();
        for s in &mut ds2.samples {
            s.oof_probability = Some(0.9);
        }
        let sim2 = build_similarity_network(&g2, &ds2, &WeaveOptions::default()).unwrap();
        let gap2 = similarity_gap(&sim2, &p2).unwrap();
        assert_eq!(gap2.per_community[0].external, 0.0);
        assert!(gap2.per_community[0].internal > 0.0);
    }

    #[test]
    fn similarity_gap_direct_evaluation() {
        // Hand-evaluated 3-community network.
        let g = Graph::from_edges(&[(0, 1), (2, 3), (4, 5), (1, 2), (3, 4)]);
        let p = Partition::from_labels(&[0, 0, 1, 1, 2, 2]);
        let mut ds = build_dataset(&g, &p, &SamplingConfig::default()).unwrap();
        // Distinct probabilities per pair, keyed by endpoints.
        for s in &mut ds.samples {
            s.oof_probability = Some(0.1 * (s.u + s.v) as f64 / 2.0 + 0.1);
        }
        let sim = build_similarity_network(&g, &ds, &WeaveOptions::default()).unwrap();
        let gap = similarity_gap(&sim, &p).unwrap();

        let s_of = |u: u32, v: u32| {
            let p = 0.1 * (u + v) as f64 / 2.0 + 0.1;
            p * p
        };
        let s_total: f64 = sim
            .pair_similarities()
            .iter()
            .map(|&(u, v, _)| s_of(u, v))
            .sum();
        // Community 0 = {0,1}: internal link (0,1); external link (1,2).
        let expected_in = s_of(0, 1) / (s_total * 1.0);
        let expected_out = s_of(1, 2) / (s_total * 1.0);
        assert!((gap.per_community[0].internal - expected_in).abs() < 1e-12);
        assert!((gap.per_community[0].external - expected_out).abs() < 1e-12);
        // Global: internal links (0,1),(2,3),(4,5); external (1,2),(3,4).
        let g_in = (s_of(0, 1) + s_of(2, 3) + s_of(4, 5)) / (s_total * 3.0);
        let g_out = (s_of(1, 2) + s_of(3, 4)) / (s_total * 2.0);
        assert!((gap.global_internal - g_in).abs() < 1e-12);
        assert!((gap.global_external - g_out).abs() < 1e-12);
    }

    #[test]
    fn report_sums_and_optional_fields() {
        let (g, p) = two_cliques();
        let report = metric_report(&g, &p, None, Some(&p)).unwrap();
        let q = weighted_modularity(&g, &p).unwrap();
        assert!((report.q_weighted - q).abs() < 1e-12);
        let sum: f64 = report.per_community.iter().map(|c| c.q_i).sum();
        assert!((sum - report.q_weighted).abs() < 1e-12);
        assert_eq!(report.nmi, Some(1.0));
        assert_eq!(report.ari, Some(1.0));
        let bare = metric_report(&g, &p, None, None).unwrap();
        assert_eq!(bare.nmi, None);
    }
}
