//! Parsers and writers for the on-disk formats: SNAP-style edge lists
//! ('#' comments, whitespace-separated pairs), weighted edge lists,
//! ground-truth community files in both conventions, partition files,
//! and the pair-dataset CSV export.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use anyhow::{bail, Context, Result};
use commweave_core::graph::{Graph, NodeId, OverlappingAssignment, Partition};
use commweave_core::pairs::{PairDataset, PairOrder};

/// A parsed graph plus the mapping between dense internal ids and the
/// dataset's original ids.
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub graph: Graph,
    /// dense id -> original id.
    pub id_map: Vec<u64>,
    /// original id -> dense id.
    pub index: BTreeMap<u64, NodeId>,
}

impl EdgeList {
    pub fn original_id(&self, dense: NodeId) -> u64 {
        self.id_map[dense as usize]
    }

    /// Restrict the id maps to a pruned subgraph (`node_map[new] = old`).
    pub fn remapped(&self, node_map: &[NodeId]) -> (Vec<u64>, BTreeMap<u64, NodeId>) {
        let id_map: Vec<u64> = node_map
            .iter()
            .map(|&old| self.id_map[old as usize])
            .collect();
        let index = id_map
            .iter()
            .enumerate()
            .map(|(dense, &orig)| (orig, dense as NodeId))
            .collect();
        (id_map, index)
    }
}

fn parse_tokens<const N: usize>(line: &str, line_no: usize) -> Result<Option<[u64; N]>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut out = [0u64; N];
    let mut count = 0;
    for token in trimmed.split_whitespace() {
        if count >= N {
            bail!("line {line_no}: expected {N} fields, got more: {trimmed:?}");
        }
        out[count] = token
            .parse::<u64>()
            .with_context(|| format!("line {line_no}: non-integer token {token:?}"))?;
        count += 1;
    }
    if count != N {
        bail!("line {line_no}: expected {N} fields, got {count}: {trimmed:?}");
    }
    Ok(Some(out))
}

/// Reads a SNAP-convention edge list: one "u v" pair per line, '#'
/// comments, tabs or spaces. Duplicates, reversed pairs, and self-loops
/// collapse; ids are densified with the original ids retained.
/// `directed_input` only documents the source convention; both
/// directions fold onto one undirected link either way.
pub fn load_edge_list(reader: impl BufRead, directed_input: bool) -> Result<EdgeList> {
    let _ = directed_input;
    let mut raw_edges: Vec<(u64, u64)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.context("read error")?;
        if let Some([u, v]) = parse_tokens::<2>(&line, i + 1)? {
            raw_edges.push((u, v));
        }
    }
    if raw_edges.is_empty() {
        bail!("edge list contains no links");
    }
    let (dense_edges, id_map, index) = densify_edges(&raw_edges);
    Ok(EdgeList {
        graph: Graph::from_edges(&dense_edges),
        id_map,
        index,
    })
}

/// Reads a weighted "u v w" edge list (the similarity-network export).
pub fn load_weighted_edge_list(reader: impl BufRead) -> Result<EdgeList> {
    let mut raw: Vec<(u64, u64, f64)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.context("read error")?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            bail!("line {}: expected 'u v w', got {trimmed:?}", i + 1);
        }
        let u: u64 = fields[0]
            .parse()
            .with_context(|| format!("line {}: non-integer node id {:?}", i + 1, fields[0]))?;
        let v: u64 = fields[1]
            .parse()
            .with_context(|| format!("line {}: non-integer node id {:?}", i + 1, fields[1]))?;
        let w: f64 = fields[2]
            .parse()
            .with_context(|| format!("line {}: non-numeric weight {:?}", i + 1, fields[2]))?;
        raw.push((u, v, w));
    }
    if raw.is_empty() {
        bail!("edge list contains no links");
    }
    let pairs: Vec<(u64, u64)> = raw.iter().map(|&(u, v, _)| (u, v)).collect();
    let (_, id_map, index) = densify_edges(&pairs);
    let dense: Vec<(NodeId, NodeId, f64)> = raw
        .iter()
        .map(|&(u, v, w)| (index[&u], index[&v], w))
        .collect();
    Ok(EdgeList {
        graph: Graph::from_weighted_edges(&dense)
            .map_err(|e| anyhow::anyhow!("invalid weights: {e}"))?,
        id_map,
        index,
    })
}

type DenseEdges = (Vec<(NodeId, NodeId)>, Vec<u64>, BTreeMap<u64, NodeId>);

fn densify_edges(raw: &[(u64, u64)]) -> DenseEdges {
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index: BTreeMap<u64, NodeId> = ids
        .iter()
        .enumerate()
        .map(|(dense, &orig)| (orig, dense as NodeId))
        .collect();
    let dense_edges = raw.iter().map(|&(u, v)| (index[&u], index[&v])).collect();
    (dense_edges, ids, index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommunitiesFormat {
    /// Lines of "node community" pairs (email-Eu-core departments).
    NodeLabelPairs,
    /// Each line lists the member node ids of one community (SNAP cmty
    /// files); the line number is the community id.
    OneCommunityPerLine,
}

/// Reads ground-truth memberships into the graph's dense id space.
/// Nodes that never appear keep an empty membership set; file nodes
/// missing from the graph are ignored.
pub fn load_communities(
    reader: impl BufRead,
    format: CommunitiesFormat,
    edge_list: &EdgeList,
) -> Result<OverlappingAssignment> {
    let mut raw = OverlappingAssignment::new(edge_list.graph.node_count());
    match format {
        CommunitiesFormat::NodeLabelPairs => {
            let mut label_ids: BTreeMap<u64, u32> = BTreeMap::new();
            for (i, line) in reader.lines().enumerate() {
                let line = line.context("read error")?;
                if let Some([node, label]) = parse_tokens::<2>(&line, i + 1)? {
                    let next = label_ids.len() as u32;
                    let community = *label_ids.entry(label).or_insert(next);
                    if let Some(&dense) = edge_list.index.get(&node) {
                        raw.add(dense, community);
                    }
                }
            }
        }
        CommunitiesFormat::OneCommunityPerLine => {
            let mut community = 0u32;
            for (i, line) in reader.lines().enumerate() {
                let line = line.context("read error")?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                let mut any = false;
                for token in trimmed.split_whitespace() {
                    let node: u64 = token.parse().with_context(|| {
                        format!("line {}: non-integer token {token:?}", i + 1)
                    })?;
                    if let Some(&dense) = edge_list.index.get(&node) {
                        raw.add(dense, community);
                    }
                    any = true;
                }
                if any {
                    community += 1;
                }
            }
        }
    }
    Ok(raw)
}

/// Reads a detected partition ("node community" lines, original ids).
pub fn load_partition(reader: impl BufRead, edge_list: &EdgeList) -> Result<Partition> {
    let mut labels: Vec<Option<u32>> = vec![None; edge_list.graph.node_count()];
    for (i, line) in reader.lines().enumerate() {
        let line = line.context("read error")?;
        if let Some([node, community]) = parse_tokens::<2>(&line, i + 1)? {
            let Some(&dense) = edge_list.index.get(&node) else {
                bail!("line {}: node {node} is not in the graph", i + 1);
            };
            labels[dense as usize] = Some(community as u32);
        }
    }
    let missing = labels.iter().filter(|l| l.is_none()).count();
    if missing > 0 {
        bail!("partition file misses {missing} graph nodes");
    }
    Ok(Partition::from_labels(
        &labels.into_iter().map(Option::unwrap).collect::<Vec<_>>(),
    ))
}

/// Writes "node community" lines in original dataset ids.
pub fn write_partition(
    mut writer: impl Write,
    partition: &Partition,
    id_map: &[u64],
) -> Result<()> {
    for (dense, &label) in partition.labels().iter().enumerate() {
        writeln!(writer, "{} {}", id_map[dense], label)?;
    }
    Ok(())
}

/// Formats a weight with nine significant digits in plain decimal.
pub fn format_weight(w: f64) -> String {
    if w == 0.0 {
        return "0.0".to_string();
    }
    let exponent = w.abs().log10().floor() as i32;
    let decimals = (8 - exponent).max(0) as usize;
    format!("{w:.decimals$}")
}

/// Writes a weighted "u v w" edge list in original ids, weights printed
/// with nine significant digits.
pub fn write_weighted_edges(mut writer: impl Write, graph: &Graph, id_map: &[u64]) -> Result<()> {
    for (u, v, w) in graph.links() {
        writeln!(
            writer,
            "{} {} {}",
            id_map[u as usize],
            id_map[v as usize],
            format_weight(w)
        )?;
    }
    Ok(())
}

/// Pair-dataset CSV export with the fixed header
/// `u,v,order,r_deg,r_cc,r_cn,label`.
pub fn write_pairs_csv(mut writer: impl Write, dataset: &PairDataset, id_map: &[u64]) -> Result<()> {
    writeln!(writer, "u,v,order,r_deg,r_cc,r_cn,label")?;
    for s in &dataset.samples {
        let order = match s.order {
            PairOrder::First => "first",
            PairOrder::Second => "second",
        };
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            id_map[s.u as usize],
            id_map[s.v as usize],
            order,
            s.features[0],
            s.features[1],
            s.features[2],
            s.label
        )?;
    }
    Ok(())
}
