//! End-to-end pipeline behavior on small fixtures: both modes, the
//! grid, determinism, and the truth-isolation guarantee of the
//! statistical-physics mode.

use std::io::Write;
use std::path::PathBuf;

use commweave_cli::config::{Mode, RunConfig};
use commweave_cli::grid::run_grid;
use commweave_cli::io::CommunitiesFormat;
use commweave_cli::pipeline::{prepare_data, run_pipeline};
use commweave_core::detect::DetectorKind;
use commweave_core::ml::Learner;
use tempfile::TempDir;

fn write_file(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let path = dir.path().join(name);
    let mut file = std::fs::File::create(&path).unwrap();
    file.write_all(content.as_bytes()).unwrap();
    path
}

fn two_triangles(dir: &TempDir) -> (PathBuf, PathBuf) {
    let edges = write_file(dir, "two_triangles.txt", "0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n");
    let truth = write_file(dir, "truth.txt", "0 0\n1 0\n2 0\n3 1\n4 1\n5 1\n");
    (edges, truth)
}

fn fast_learner(config: &mut RunConfig) {
    config.learner.rf_trees = 10;
    config.learner.xgb_rounds = 10;
    config.learner.dt_min_samples_leaf = 1;
}

#[test]
fn ground_truth_mode_on_disjoint_triangles_is_perfect() {
    let dir = TempDir::new().unwrap();
    let (edges, truth) = two_triangles(&dir);
    for detector in DetectorKind::ALL {
        for learner in [Learner::Dt, Learner::Rf, Learner::Xgb, Learner::VcSoft, Learner::VcHard] {
            let mut config = RunConfig::defaults(Mode::GroundTruth, edges.clone());
            config.communities = Some(truth.clone());
            config.communities_format = CommunitiesFormat::NodeLabelPairs;
            config.detector_b.detector = detector;
            config.detector_g.detector = detector;
            config.learner.learner = learner;
            config.seeds = vec![1, 2];
            fast_learner(&mut config);
            let data = prepare_data(&config).unwrap();
            let (record, _) = run_pipeline(&data, &config).unwrap();
            assert_eq!(
                record.mean_nmi,
                Some(1.0),
                "{detector:?}/{learner:?} NMI"
            );
            assert_eq!(record.mean_ari, Some(1.0), "{detector:?}/{learner:?} ARI");
        }
    }
}

#[test]
fn statistical_physics_never_touches_truth_before_evaluation() {
    let dir = TempDir::new().unwrap();
    // A graph with enough structure for both classes of pairs.
    let edges = write_file(
        &dir,
        "bridged.txt",
        "0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n2 3\n0 4\n",
    );
    let truth = write_file(&dir, "truth.txt", "0 0\n1 0\n2 0\n3 1\n4 1\n5 1\n");

    let mut with_truth = RunConfig::defaults(Mode::StatisticalPhysics, edges.clone());
    with_truth.communities = Some(truth);
    with_truth.seeds = vec![7, 8];
    fast_learner(&mut with_truth);
    let mut without_truth = with_truth.clone();
    without_truth.communities = None;

    let data_with = prepare_data(&with_truth).unwrap();
    let data_without = prepare_data(&without_truth).unwrap();
    let (record_with, artifacts_with) = run_pipeline(&data_with, &with_truth).unwrap();
    let (record_without, artifacts_without) =
        run_pipeline(&data_without, &without_truth).unwrap();

    // Identical partitions and scores seed by seed; truth only adds
    // NMI/ARI columns.
    for (a, b) in artifacts_with.iter().zip(&artifacts_without) {
        assert_eq!(a.partition, b.partition);
    }
    for (a, b) in record_with.seeds.iter().zip(&record_without.seeds) {
        assert_eq!(a.q_weighted, b.q_weighted);
        assert_eq!(a.s_in, b.s_in);
    }
    assert!(record_with.mean_nmi.is_some());
    assert!(record_without.mean_nmi.is_none());
}

#[test]
fn pipeline_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let edges = write_file(
        &dir,
        "bridged.txt",
        "0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n2 3\n",
    );
    let mut config = RunConfig::defaults(Mode::StatisticalPhysics, edges);
    config.seeds = vec![3, 4, 5];
    fast_learner(&mut config);
    let data = prepare_data(&config).unwrap();
    let (mut a, _) = run_pipeline(&data, &config).unwrap();
    let (mut b, _) = run_pipeline(&data, &config).unwrap();
    for outcome in a.seeds.iter_mut().chain(b.seeds.iter_mut()) {
        outcome.seconds = 0.0;
    }
    let (ajs, bjs) = (
        serde_json::to_string(&a.seeds).unwrap(),
        serde_json::to_string(&b.seeds).unwrap(),
    );
    assert_eq!(ajs, bjs);
}

#[test]
fn means_are_exact_seed_averages() {
    let dir = TempDir::new().unwrap();
    let edges = write_file(
        &dir,
        "bridged.txt",
        "0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n2 3\n0 4\n1 5\n",
    );
    let mut config = RunConfig::defaults(Mode::StatisticalPhysics, edges);
    config.seeds = vec![1, 2, 3, 4];
    fast_learner(&mut config);
    let data = prepare_data(&config).unwrap();
    let (record, _) = run_pipeline(&data, &config).unwrap();
    let expected: f64 = record.seeds.iter().map(|s| s.q_weighted).sum::<f64>()
        / record.seeds.len() as f64;
    assert!((record.mean_q_weighted - expected).abs() < 1e-12);
    let gap: f64 = record
        .seeds
        .iter()
        .map(|s| s.s_in.unwrap() - s.s_out.unwrap())
        .sum::<f64>()
        / record.seeds.len() as f64;
    assert!((record.mean_similarity_gap.unwrap() - gap).abs() < 1e-12);
}

#[test]
fn grid_has_expected_shape_and_bounds() {
    let dir = TempDir::new().unwrap();
    let (edges, truth) = {
        // Three 4-cliques in a ring: nontrivial structure, both classes.
        let mut text = String::new();
        for c in 0..3u32 {
            let base = 4 * c;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    text += &format!("{} {}\n", base + i, base + j);
                }
            }
        }
        text += "0 4\n4 8\n8 0\n";
        let edges = write_file(&dir, "ring.txt", &text);
        let mut labels = String::new();
        for v in 0..12 {
            labels += &format!("{} {}\n", v, v / 4);
        }
        (edges, write_file(&dir, "ring_truth.txt", &labels))
    };

    let mut config = RunConfig::defaults(Mode::GroundTruth, edges);
    config.communities = Some(truth);
    config.seeds = vec![1, 2];
    fast_learner(&mut config);
    let data = prepare_data(&config).unwrap();
    let outcome = run_grid(&data, &config).unwrap();

    assert_eq!(outcome.baselines.len(), 4);
    assert_eq!(outcome.cells.len(), 16);
    assert_eq!(outcome.vc_variants.len(), 8);
    assert!(outcome.failures.is_empty(), "{:?}", outcome.failures);

    // Names parse back into (learner, detector).
    for cell in &outcome.cells {
        assert!(
            commweave_cli::naming::parse_name(&cell.name).is_some(),
            "{}",
            cell.name
        );
    }
    // best-of-grid >= every record, per metric (max definition).
    let best_q = outcome
        .best(|r| Some(r.mean_q_weighted), false)
        .unwrap()
        .1;
    for cell in &outcome.cells {
        assert!(best_q >= cell.mean_q_weighted);
    }
    // VC cells report the better strategy under the driving metric
    // (NMI in ground-truth mode).
    for detector in DetectorKind::ALL {
        let cell_name = format!("VC-{}", commweave_cli::naming::detector_label(detector));
        let cell = outcome.cells.iter().find(|c| c.name == cell_name).unwrap();
        let variants: Vec<_> = outcome
            .vc_variants
            .iter()
            .filter(|v| v.detector == detector.name())
            .collect();
        assert_eq!(variants.len(), 2);
        let best_variant = variants
            .iter()
            .map(|v| v.mean_nmi.unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((cell.mean_nmi.unwrap() - best_variant).abs() < 1e-15);
    }

    // Grid determinism under a fixed seed list.
    let again = run_grid(&data, &config).unwrap();
    let strip = |records: &[commweave_cli::pipeline::RunRecord]| -> String {
        let mut cleaned = records.to_vec();
        for record in &mut cleaned {
            record.wall_seconds = 0.0;
            for seed in &mut record.seeds {
                seed.seconds = 0.0;
            }
        }
        serde_json::to_string(&cleaned).unwrap()
    };
    assert_eq!(strip(&outcome.cells), strip(&again.cells));
    assert_eq!(strip(&outcome.baselines), strip(&again.baselines));
}

#[test]
fn model_summary_exports_as_json() {
    let rows: Vec<[f64; 3]> = (0..40)
        .map(|i| [(i % 5) as f64, (i / 5) as f64, (i % 3) as f64])
        .collect();
    let y: Vec<u8> = rows.iter().map(|r| (r[0] > 2.0) as u8).collect();
    let x = commweave_core::ml::FeatureMatrix::from_rows(&rows).unwrap();
    let config = commweave_core::ml::LearnerConfig {
        dt_min_samples_leaf: 1,
        rf_trees: 5,
        xgb_rounds: 5,
        ..commweave_core::ml::LearnerConfig::new(Learner::VcSoft)
    };
    let model = commweave_core::ml::fit(&x, &y, &config).unwrap();
    let summary = model.summary();
    let json = serde_json::to_value(&summary).unwrap();
    assert_eq!(json["kind"], "voting_soft");
    assert!(json["tree_count"].as_u64().unwrap() >= 7);
    assert_eq!(json["feature_importance"].as_array().unwrap().len(), 3);
    // Feature 0 carries the labels; it must dominate the importance.
    let importance = summary.feature_importance;
    assert!(importance[0] > importance[1] && importance[0] > importance[2]);
}
