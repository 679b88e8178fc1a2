use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use commweave_core::detect::{detect, DetectorConfig, DetectorKind};
use commweave_core::metrics::{ari, modularity, nmi, weighted_modularity};
use commweave_core::ml::Learner;
use commweave_core::synth::{generate, BenchmarkParams};

use commweave_cli::config::{ConfigFile, Mode, RunConfig};
use commweave_cli::grid::run_grid;
use commweave_cli::io::{
    load_edge_list, load_partition, load_weighted_edge_list, write_partition,
    write_weighted_edges, CommunitiesFormat, EdgeList,
};
use commweave_cli::pipeline::{prepare_data, run_pipeline, write_record};
use commweave_cli::report::{load_records_dir, write_reports};

#[derive(Parser)]
#[command(
    name = "commweave",
    about = "Community detection with machine-learned similarity weights",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tree-like benchmark network with planted communities.
    Generate(GenerateArgs),
    /// Run a single detector on an edge list.
    Detect(DetectArgs),
    /// Run one pipeline configuration end to end.
    Pipeline(PipelineArgs),
    /// Run the 16-cell learner x detector grid plus baselines.
    Grid(PipelineArgs),
    /// Build tables, improvement deltas, and correlations from records.
    Report(ReportArgs),
    /// Score a detected partition (optionally against ground truth).
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 100)]
    nodes: usize,
    #[arg(long, default_value_t = 1)]
    links_per_node: usize,
    #[arg(long, default_value_t = 0.15)]
    beta: f64,
    #[arg(long, default_value_t = 0.9)]
    p_intra: f64,
    #[arg(long, default_value_t = 3)]
    k_init: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_edges: PathBuf,
    /// Ground-truth file ("node community" pairs).
    #[arg(long)]
    out_communities: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    edges: PathBuf,
    /// Input is a weighted "u v w" edge list.
    #[arg(long, default_value_t = false)]
    weighted: bool,
    /// louvain | leiden | fast_greedy | infomap
    #[arg(long)]
    algorithm: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
    #[arg(long, default_value_t = 50)]
    max_passes: usize,
    #[arg(long, default_value_t = 1e-7)]
    tolerance: f64,
    /// Partition output ("node community" lines).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the result as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// TOML config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// statistical_physics | ground_truth
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    communities: Option<PathBuf>,
    /// pairs | lines
    #[arg(long)]
    communities_format: Option<String>,
    /// Detector for steps (b) and (g).
    #[arg(long)]
    detector: Option<String>,
    #[arg(long)]
    resolution: Option<f64>,
    /// dt | rf | xgb | vc_soft | vc_hard
    #[arg(long)]
    learner: Option<String>,
    /// Comma-separated seed list, e.g. "1,2,3".
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    cv_folds: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_second_order: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Skip per-seed partition and weighted-edge artifacts.
    #[arg(long, default_value_t = false)]
    no_artifacts: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory of RunRecord JSON files.
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long, default_value_t = false)]
    weighted: bool,
    /// Detected partition ("node community" lines).
    #[arg(long)]
    partition: PathBuf,
    /// Second partition to compare against (e.g. ground truth).
    #[arg(long)]
    truth: Option<PathBuf>,
}

fn parse_detector(name: &str) -> Result<DetectorKind> {
    Ok(match name {
        "louvain" => DetectorKind::Louvain,
        "leiden" => DetectorKind::Leiden,
        "fast_greedy" | "fg" => DetectorKind::FastGreedy,
        "infomap" => DetectorKind::Infomap,
        _ => bail!("unknown detector {name:?} (louvain|leiden|fast_greedy|infomap)"),
    })
}

fn parse_learner(name: &str) -> Result<Learner> {
    Ok(match name {
        "dt" => Learner::Dt,
        "rf" => Learner::Rf,
        "xgb" => Learner::Xgb,
        "vc_soft" => Learner::VcSoft,
        "vc_hard" => Learner::VcHard,
        _ => bail!("unknown learner {name:?} (dt|rf|xgb|vc_soft|vc_hard)"),
    })
}

fn parse_mode(name: &str) -> Result<Mode> {
    Ok(match name {
        "statistical_physics" | "sp" => Mode::StatisticalPhysics,
        "ground_truth" | "gt" => Mode::GroundTruth,
        _ => bail!("unknown mode {name:?} (statistical_physics|ground_truth)"),
    })
}

fn parse_format(name: &str) -> Result<CommunitiesFormat> {
    Ok(match name {
        "pairs" | "node_label_pairs" => CommunitiesFormat::NodeLabelPairs,
        "lines" | "one_community_per_line" => CommunitiesFormat::OneCommunityPerLine,
        _ => bail!("unknown communities format {name:?} (pairs|lines)"),
    })
}

fn parse_seeds(list: &str) -> Result<Vec<u64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .with_context(|| format!("bad seed {s:?}"))
        })
        .collect()
}

fn resolve_config(args: &PipelineArgs) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => ConfigFile::load(path)?.resolve()?,
        None => ConfigFile::default().resolve()?,
    };
    if let Some(mode) = &args.mode {
        config.mode = parse_mode(mode)?;
    }
    if let Some(edges) = &args.edges {
        config.edges = edges.clone();
    }
    if let Some(communities) = &args.communities {
        config.communities = Some(communities.clone());
    }
    if let Some(format) = &args.communities_format {
        config.communities_format = parse_format(format)?;
    }
    if let Some(detector) = &args.detector {
        let kind = parse_detector(detector)?;
        config.detector_b.detector = kind;
        config.detector_g.detector = kind;
    }
    if let Some(resolution) = args.resolution {
        config.detector_b.resolution = resolution;
        config.detector_g.resolution = resolution;
    }
    if let Some(learner) = &args.learner {
        config.learner.learner = parse_learner(learner)?;
    }
    if let Some(seeds) = &args.seeds {
        config.seeds = parse_seeds(seeds)?;
    }
    if let Some(folds) = args.cv_folds {
        config.cv_folds = folds;
    }
    if let Some(epsilon) = args.epsilon {
        config.weave_epsilon = epsilon;
    }
    if let Some(cap) = args.max_second_order {
        config.sampling.max_second_order = cap;
    }
    if let Some(dir) = &args.out_dir {
        config.output_dir = dir.clone();
    }
    if args.no_artifacts {
        config.write_artifacts = false;
    }
    if config.edges.as_os_str().is_empty() {
        bail!("an edge list is required (--edges or [dataset].edges in the config)");
    }
    Ok(config)
}

fn load_graph(path: &PathBuf, weighted: bool) -> Result<EdgeList> {
    let file =
        File::open(path).with_context(|| format!("cannot open edge list {}", path.display()))?;
    let reader = BufReader::new(file);
    if weighted {
        load_weighted_edge_list(reader)
    } else {
        load_edge_list(reader, true)
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let params = BenchmarkParams {
        links_per_node: args.links_per_node,
        n_target: args.nodes,
        beta: args.beta,
        p_intra: args.p_intra,
        k_init: args.k_init,
        rng_seed: args.seed,
    };
    let (graph, partition) = generate(&params).map_err(anyhow::Error::msg)?;
    let mut edges = BufWriter::new(File::create(&args.out_edges)?);
    writeln!(edges, "# tree-like benchmark, seed {}", args.seed)?;
    for (u, v, _) in graph.links() {
        writeln!(edges, "{u} {v}")?;
    }
    edges.flush()?;
    if let Some(path) = &args.out_communities {
        let id_map: Vec<u64> = (0..graph.node_count() as u64).collect();
        let mut file = BufWriter::new(File::create(path)?);
        write_partition(&mut file, &partition, &id_map)?;
        file.flush()?;
    }
    println!(
        "generated {} nodes, {} links, {} communities -> {}",
        graph.node_count(),
        graph.link_count(),
        partition.community_count(),
        args.out_edges.display()
    );
    Ok(())
}

fn cmd_detect(args: DetectArgs) -> Result<()> {
    let edge_list = load_graph(&args.edges, args.weighted)?;
    let config = DetectorConfig {
        detector: parse_detector(&args.algorithm)?,
        resolution: args.resolution,
        rng_seed: args.seed,
        max_passes: args.max_passes,
        tolerance: args.tolerance,
    };
    let result = detect(&edge_list.graph, &config).map_err(anyhow::Error::msg)?;
    println!(
        "{}: {} communities, objective {:.6}, passes {}",
        args.algorithm,
        result.partition.community_count(),
        result.objective,
        result.passes_used
    );
    if let Some(path) = &args.out {
        let mut file = BufWriter::new(File::create(path)?);
        write_partition(&mut file, &result.partition, &edge_list.id_map)?;
        file.flush()?;
    }
    if let Some(path) = &args.json {
        let file = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(file, &result)?;
    }
    Ok(())
}

fn write_artifacts(
    config: &RunConfig,
    data: &commweave_cli::pipeline::PreparedData,
    record_name: &str,
    artifacts: &[commweave_cli::pipeline::SeedArtifacts],
) -> Result<()> {
    let dir = config.output_dir.join(record_name);
    std::fs::create_dir_all(&dir)?;
    for artifact in artifacts {
        let partition_path = dir.join(format!("seed{}_partition.txt", artifact.seed));
        let mut file = BufWriter::new(File::create(partition_path)?);
        write_partition(&mut file, &artifact.partition, &data.id_map)?;
        file.flush()?;
        let edges_path = dir.join(format!("seed{}_weighted.edges", artifact.seed));
        let mut file = BufWriter::new(File::create(edges_path)?);
        write_weighted_edges(&mut file, &artifact.weighted_graph, &data.id_map)?;
        file.flush()?;
        if let Some(initial) = &artifact.initial_partition {
            let path = dir.join(format!("seed{}_initial_partition.txt", artifact.seed));
            let mut file = BufWriter::new(File::create(path)?);
            write_partition(&mut file, initial, &data.id_map)?;
            file.flush()?;
        }
    }
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let config = resolve_config(&args)?;
    config.validate()?;
    let data = prepare_data(&config)?;
    let (record, artifacts) = run_pipeline(&data, &config)?;
    let path = write_record(&config.output_dir, &record)?;
    if config.write_artifacts {
        write_artifacts(&config, &data, &record.name, &artifacts)?;
    }
    println!(
        "{}: mean Q^w {:.4}{}{} ({} seeds) -> {}",
        record.name,
        record.mean_q_weighted,
        record
            .mean_nmi
            .map(|v| format!(", NMI {v:.4}"))
            .unwrap_or_default(),
        record
            .mean_ari
            .map(|v| format!(", ARI {v:.4}"))
            .unwrap_or_default(),
        record.seeds.len(),
        path.display()
    );
    Ok(())
}

fn cmd_grid(args: PipelineArgs) -> Result<()> {
    let config = resolve_config(&args)?;
    // Grid cells override the detector; only dataset/learner knobs and
    // seeds matter here, so validate per cell instead of up front.
    let data = prepare_data(&config)?;
    let outcome = run_grid(&data, &config)?;
    let records_dir = config.output_dir.join("records");
    for record in outcome.baselines.iter().chain(&outcome.cells) {
        write_record(&records_dir, record)?;
    }
    for record in &outcome.vc_variants {
        let mut named = record.clone();
        named.name = format!(
            "{}_{}",
            record.name,
            record.vc_mode.as_deref().unwrap_or("raw")
        );
        write_record(&records_dir.join("vc_variants"), &named)?;
    }
    let summary = write_reports(
        &config.output_dir,
        &outcome
            .baselines
            .iter()
            .chain(&outcome.cells)
            .cloned()
            .collect::<Vec<_>>(),
    )?;
    for failure in &outcome.failures {
        eprintln!("cell {} failed: {}", failure.cell, failure.error);
    }
    for notice in &summary.notices {
        eprintln!("note: {notice}");
    }
    println!(
        "grid complete: {} baselines, {} cells, {} failures -> {}",
        outcome.baselines.len(),
        outcome.cells.len(),
        outcome.failures.len(),
        config.output_dir.display()
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let records = load_records_dir(&args.records)?;
    if records.is_empty() {
        bail!("no records found under {}", args.records.display());
    }
    let summary = write_reports(&args.out_dir, &records)?;
    for notice in &summary.notices {
        eprintln!("note: {notice}");
    }
    println!(
        "report written: {} records, {} delta rows, {} correlations -> {}",
        records.len(),
        summary.deltas.len(),
        summary.correlations.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let edge_list = load_graph(&args.edges, args.weighted)?;
    let file = File::open(&args.partition)
        .with_context(|| format!("cannot open {}", args.partition.display()))?;
    let partition = load_partition(BufReader::new(file), &edge_list)?;
    let q = modularity(&edge_list.graph, &partition).map_err(anyhow::Error::msg)?;
    let qw = weighted_modularity(&edge_list.graph, &partition).map_err(anyhow::Error::msg)?;

    let mut output = serde_json::json!({
        "modularity": q,
        "weighted_modularity": qw,
        "communities": partition.community_count(),
    });
    if let Some(path) = &args.truth {
        let file =
            File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        let truth = load_partition(BufReader::new(file), &edge_list)?;
        output["nmi"] = nmi(&partition, &truth).map_err(anyhow::Error::msg)?.into();
        output["ari"] = ari(&partition, &truth).map_err(anyhow::Error::msg)?.into();
    }
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => cmd_generate(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Report(args) => cmd_report(args),
        Command::Metrics(args) => cmd_metrics(args),
    }
}
