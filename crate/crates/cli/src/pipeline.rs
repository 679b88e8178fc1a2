//! End-to-end runs: [load -> (preprocess ground truth | detect)] ->
//! pair dataset -> out-of-fold likelihoods -> similarity network ->
//! re-detect -> evaluate, per seed, with seed-mean aggregation.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use commweave_core::detect::{detect, DetectorConfig};
use commweave_core::graph::{deoverlap, prune_links, Graph, NodeId, Partition};
use commweave_core::metrics::{
    ari, metric_report, modularity, nmi, similarity_gap, CommunityReport,
};
use commweave_core::ml::{cross_val_oof, LearnerConfig};
use commweave_core::pairs::build_dataset;
use commweave_core::weave::build_similarity_network;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, RunConfig};
use crate::io::{load_communities, load_edge_list};

/// Ground-truth labels over a subset of the working graph's nodes
/// (preprocessing may drop nodes; evaluation uses the intersection).
#[derive(Debug, Clone)]
pub struct TruthLabels {
    pub nodes: Vec<NodeId>,
    pub labels: Vec<u32>,
}

/// Input graph plus optional ground truth, ready for pipeline runs.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub dataset_label: String,
    pub graph: Graph,
    pub id_map: Vec<u64>,
    /// Evaluation labels (subset of nodes in statistical-physics mode,
    /// all nodes in ground-truth mode).
    pub truth: Option<TruthLabels>,
    /// Training partition for ground-truth mode (covers every node of
    /// `graph`).
    pub truth_partition: Option<Partition>,
}

/// Loads the edge list and, depending on the mode, preprocesses ground
/// truth. In ground-truth mode the working graph is the pruned subgraph;
/// in statistical-physics mode the full graph is kept and truth (if any)
/// is used for evaluation only.
pub fn prepare_data(config: &RunConfig) -> Result<PreparedData> {
    let file = File::open(&config.edges)
        .with_context(|| format!("cannot open edge list {}", config.edges.display()))?;
    let edge_list = load_edge_list(BufReader::new(file), true)?;
    let dataset_label = config
        .edges
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());

    let truth_raw = match &config.communities {
        Some(path) => {
            let file = File::open(path)
                .with_context(|| format!("cannot open communities {}", path.display()))?;
            Some(load_communities(
                BufReader::new(file),
                config.communities_format,
                &edge_list,
            )?)
        }
        None => None,
    };

    match config.mode {
        Mode::GroundTruth => {
            let raw = truth_raw.ok_or_else(|| anyhow!("ground_truth mode needs communities"))?;
            let crisp = deoverlap(&raw, config.deoverlap_seed);
            let pruned = prune_links(&edge_list.graph, &crisp);
            if pruned.graph.link_count() == 0 {
                bail!("ground-truth preprocessing removed every link");
            }
            let (id_map, _) = edge_list.remapped(&pruned.node_map);
            let truth = TruthLabels {
                nodes: (0..pruned.graph.node_count() as NodeId).collect(),
                labels: pruned.partition.labels().to_vec(),
            };
            Ok(PreparedData {
                dataset_label,
                graph: pruned.graph,
                id_map,
                truth: Some(truth),
                truth_partition: Some(pruned.partition),
            })
        }
        Mode::StatisticalPhysics => {
            let truth = truth_raw.map(|raw| {
                let crisp = deoverlap(&raw, config.deoverlap_seed);
                let pruned = prune_links(&edge_list.graph, &crisp);
                TruthLabels {
                    nodes: pruned.node_map.clone(),
                    labels: pruned.partition.labels().to_vec(),
                }
            });
            Ok(PreparedData {
                dataset_label,
                graph: edge_list.graph,
                id_map: edge_list.id_map,
                truth,
                truth_partition: None,
            })
        }
    }
}

/// NMI/ARI of a detected partition against truth, over the truth's node
/// subset.
pub fn score_against_truth(partition: &Partition, truth: &TruthLabels) -> Result<(f64, f64)> {
    let detected: Vec<u32> = truth
        .nodes
        .iter()
        .map(|&v| partition.community_of(v).map_err(anyhow::Error::msg))
        .collect::<Result<_>>()?;
    let a = Partition::from_labels(&detected);
    let b = Partition::from_labels(&truth.labels);
    Ok((
        nmi(&a, &b).map_err(anyhow::Error::msg)?,
        ari(&a, &b).map_err(anyhow::Error::msg)?,
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    /// Weighted modularity of the final partition on the graph the final
    /// detection ran on (similarity network for pipeline runs, the input
    /// graph for baselines).
    pub q_weighted: f64,
    /// Unweighted modularity of the final partition on the input
    /// topology.
    pub q_original: f64,
    pub nmi: Option<f64>,
    pub ari: Option<f64>,
    pub s_in: Option<f64>,
    pub s_out: Option<f64>,
    pub community_count: usize,
    /// The detector's own objective (weighted modularity, or codelength
    /// for Infomap).
    pub objective: f64,
    pub seconds: f64,
    /// Per-community size, modularity term, and similarity averages.
    pub per_community: Vec<CommunityReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    /// "RF-Leiden" style cell name, or the bare detector name for
    /// baselines.
    pub name: String,
    /// "statistical_physics", "ground_truth", or "original".
    pub rule: String,
    pub detector: String,
    pub learner: Option<String>,
    /// For VC cells: the voting strategy the record reports.
    pub vc_mode: Option<String>,
    pub dataset: String,
    pub seeds: Vec<SeedOutcome>,
    pub mean_q_weighted: f64,
    pub mean_q_original: f64,
    pub mean_nmi: Option<f64>,
    pub mean_ari: Option<f64>,
    /// Seed-mean of global S_in - S_out.
    pub mean_similarity_gap: Option<f64>,
    pub wall_seconds: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        None
    } else {
        Some(collected.iter().sum::<f64>() / collected.len() as f64)
    }
}

#[allow(clippy::too_many_arguments)]
fn aggregate(
    name: String,
    rule: String,
    detector: String,
    learner: Option<String>,
    vc_mode: Option<String>,
    dataset: String,
    seeds: Vec<SeedOutcome>,
    wall_seconds: f64,
) -> RunRecord {
    let mean_q_weighted = mean(seeds.iter().map(|s| s.q_weighted)).unwrap_or(f64::NAN);
    let mean_q_original = mean(seeds.iter().map(|s| s.q_original)).unwrap_or(f64::NAN);
    let mean_nmi = mean(seeds.iter().filter_map(|s| s.nmi));
    let mean_ari = mean(seeds.iter().filter_map(|s| s.ari));
    let mean_similarity_gap = mean(
        seeds
            .iter()
            .filter_map(|s| Some(s.s_in? - s.s_out?)),
    );
    RunRecord {
        name,
        rule,
        detector,
        learner,
        vc_mode,
        dataset,
        seeds,
        mean_q_weighted,
        mean_q_original,
        mean_nmi,
        mean_ari,
        mean_similarity_gap,
        wall_seconds,
    }
}

/// Per-seed artifacts of a pipeline run.
pub struct SeedArtifacts {
    pub seed: u64,
    pub partition: Partition,
    pub weighted_graph: Graph,
    /// The step-(b) pseudo-ground-truth partition (None in ground-truth
    /// mode, where step (b) is omitted).
    pub initial_partition: Option<Partition>,
}

fn seed_run(
    data: &PreparedData,
    config: &RunConfig,
    seed: u64,
) -> Result<(SeedOutcome, SeedArtifacts)> {
    let start = Instant::now();
    let err = anyhow::Error::msg;

    let (pseudo, initial_partition) = match config.mode {
        Mode::GroundTruth => (
            data.truth_partition
                .clone()
                .ok_or_else(|| anyhow!("missing truth partition"))?,
            None,
        ),
        Mode::StatisticalPhysics => {
            let detector_b = DetectorConfig {
                rng_seed: seed,
                ..config.detector_b.clone()
            };
            let result = detect(&data.graph, &detector_b).map_err(err)?;
            (result.partition.clone(), Some(result.partition))
        }
    };

    let sampling = config.sampling.to_core(seed);
    let mut dataset = build_dataset(&data.graph, &pseudo, &sampling).map_err(err)?;
    let learner = LearnerConfig {
        rng_seed: seed,
        ..config.learner.clone()
    };
    let (intra, inter) = dataset.class_counts;
    if intra == 0 || inter == 0 {
        // Degenerate pseudo-labels (e.g. every sampled pair intra, as on
        // disjoint communities with no distance-2 pairs between them):
        // cross-validation has nothing to learn, the likelihood of every
        // pair is the class prevalence.
        let prevalence = if inter == 0 { 1.0 } else { 0.0 };
        for sample in &mut dataset.samples {
            sample.oof_probability = Some(prevalence);
        }
    } else {
        cross_val_oof(&mut dataset, &learner, config.cv_folds).map_err(err)?;
    }
    let sim = build_similarity_network(&data.graph, &dataset, &config.weave_options())
        .map_err(err)?;

    let detector_g = DetectorConfig {
        rng_seed: seed,
        ..config.detector_g.clone()
    };
    let result = detect(&sim.graph, &detector_g).map_err(err)?;
    let partition = result.partition;

    let report = metric_report(&sim.graph, &partition, Some(&sim), None).map_err(err)?;
    let q_original = modularity(&data.graph, &partition).map_err(err)?;
    let gap = similarity_gap(&sim, &partition).map_err(err)?;
    let (nmi_value, ari_value) = match &data.truth {
        Some(truth) => {
            let (n, a) = score_against_truth(&partition, truth)?;
            (Some(n), Some(a))
        }
        None => (None, None),
    };

    let outcome = SeedOutcome {
        seed,
        q_weighted: report.q_weighted,
        q_original,
        nmi: nmi_value,
        ari: ari_value,
        s_in: Some(gap.global_internal),
        s_out: Some(gap.global_external),
        community_count: partition.community_count(),
        objective: result.objective,
        seconds: start.elapsed().as_secs_f64(),
        per_community: report.per_community,
    };
    let artifacts = SeedArtifacts {
        seed,
        partition,
        weighted_graph: sim.graph,
        initial_partition,
    };
    Ok((outcome, artifacts))
}

/// Runs the full pipeline for every seed in the config. A record is
/// produced only if all seeds complete.
pub fn run_pipeline(data: &PreparedData, config: &RunConfig) -> Result<(RunRecord, Vec<SeedArtifacts>)> {
    config.validate()?;
    let start = Instant::now();
    let mut results: Vec<(SeedOutcome, SeedArtifacts)> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            seed_run(data, config, seed).with_context(|| format!("seed {seed} failed"))
        })
        .collect::<Result<_>>()?;
    results.sort_by_key(|(outcome, _)| outcome.seed);
    let (outcomes, artifacts): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let detector = config.detector_g.detector;
    let learner_name = config.learner.learner.name().to_string();
    let report_learner = match config.learner.learner {
        commweave_core::ml::Learner::Dt => crate::naming::ReportLearner::Dt,
        commweave_core::ml::Learner::Rf => crate::naming::ReportLearner::Rf,
        commweave_core::ml::Learner::Xgb => crate::naming::ReportLearner::Xgb,
        commweave_core::ml::Learner::VcSoft | commweave_core::ml::Learner::VcHard => {
            crate::naming::ReportLearner::Vc
        }
    };
    let vc_mode = match config.learner.learner {
        commweave_core::ml::Learner::VcSoft => Some("soft".to_string()),
        commweave_core::ml::Learner::VcHard => Some("hard".to_string()),
        _ => None,
    };
    let record = aggregate(
        crate::naming::format_name(report_learner, detector),
        config.mode.name().to_string(),
        detector.name().to_string(),
        Some(learner_name),
        vc_mode,
        data.dataset_label.clone(),
        outcomes,
        start.elapsed().as_secs_f64(),
    );
    Ok((record, artifacts))
}

/// Runs one plain detector on the (unweighted) working graph, per seed:
/// the "Original" baseline rows.
pub fn run_baseline(
    data: &PreparedData,
    detector: &DetectorConfig,
    seeds: &[u64],
) -> Result<RunRecord> {
    let start = Instant::now();
    let err = anyhow::Error::msg;
    let mut outcomes: Vec<SeedOutcome> = seeds
        .par_iter()
        .map(|&seed| -> Result<SeedOutcome> {
            let t0 = Instant::now();
            let config = DetectorConfig {
                rng_seed: seed,
                ..detector.clone()
            };
            let result = detect(&data.graph, &config).map_err(err)?;
            let report = metric_report(&data.graph, &result.partition, None, None).map_err(err)?;
            let q_original = modularity(&data.graph, &result.partition).map_err(err)?;
            let (nmi_value, ari_value) = match &data.truth {
                Some(truth) => {
                    let (n, a) = score_against_truth(&result.partition, truth)?;
                    (Some(n), Some(a))
                }
                None => (None, None),
            };
            Ok(SeedOutcome {
                seed,
                q_weighted: report.q_weighted,
                q_original,
                nmi: nmi_value,
                ari: ari_value,
                s_in: None,
                s_out: None,
                community_count: result.partition.community_count(),
                objective: result.objective,
                seconds: t0.elapsed().as_secs_f64(),
                per_community: report.per_community,
            })
        })
        .collect::<Result<_>>()?;
    outcomes.sort_by_key(|o| o.seed);
    Ok(aggregate(
        crate::naming::detector_label(detector.detector).to_string(),
        "original".to_string(),
        detector.detector.name().to_string(),
        None,
        None,
        data.dataset_label.clone(),
        outcomes,
        start.elapsed().as_secs_f64(),
    ))
}

/// Writes one record as pretty JSON under `dir/<name>.json`.
pub fn write_record(dir: &Path, record: &RunRecord) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.json", record.name.replace(['/', ' '], "_")));
    let file = File::create(&path)?;
    serde_json::to_writer_pretty(BufWriter::new(file), record)?;
    Ok(path)
}

pub fn read_record(path: &Path) -> Result<RunRecord> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}
