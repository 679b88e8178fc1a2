//! Run configuration: the TOML file schema, defaults, and validation.
//! Every field can also be set from a CLI flag; flags win over the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use commweave_core::detect::{DetectorConfig, DetectorKind};
use commweave_core::ml::{Learner, LearnerConfig};
use commweave_core::pairs::SamplingConfig;
use commweave_core::weave::WeaveOptions;
use serde::{Deserialize, Serialize};

use crate::io::CommunitiesFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Pseudo-ground-truth from an initial detector run (step (b)).
    StatisticalPhysics,
    /// Real community labels; step (b) omitted.
    GroundTruth,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::StatisticalPhysics => "statistical_physics",
            Mode::GroundTruth => "ground_truth",
        }
    }
}

/// Fully resolved configuration of one pipeline run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub edges: PathBuf,
    pub communities: Option<PathBuf>,
    pub communities_format: CommunitiesFormat,
    /// Step (b) detector; ignored in ground-truth mode. In
    /// statistical-physics mode it must equal `detector_g`.
    pub detector_b: DetectorConfig,
    /// Step (g) detector, run on the weighted similarity network.
    pub detector_g: DetectorConfig,
    pub learner: LearnerConfig,
    pub seeds: Vec<u64>,
    pub cv_folds: usize,
    pub sampling: SamplingExposed,
    pub weave_epsilon: f64,
    pub weave_second_order_links: bool,
    /// Seed for the tie-breaking draw in ground-truth de-overlapping.
    pub deoverlap_seed: u64,
    pub output_dir: PathBuf,
    /// Write per-seed partition and weighted-edge artifacts.
    pub write_artifacts: bool,
}

/// Serializable mirror of the sampling options.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingExposed {
    pub include_second_order: bool,
    /// 0 means the default cap of 5x the link count.
    pub max_second_order: usize,
    pub feature_mask: [bool; 3],
    pub downsample_majority: bool,
}

impl Default for SamplingExposed {
    fn default() -> Self {
        SamplingExposed {
            include_second_order: true,
            max_second_order: 0,
            feature_mask: [true, true, true],
            downsample_majority: false,
        }
    }
}

impl SamplingExposed {
    pub fn to_core(&self, rng_seed: u64) -> SamplingConfig {
        SamplingConfig {
            include_second_order: self.include_second_order,
            max_second_order: if self.max_second_order == 0 {
                None
            } else {
                Some(self.max_second_order)
            },
            feature_mask: self.feature_mask,
            downsample_majority: self.downsample_majority,
            rng_seed,
        }
    }
}

impl RunConfig {
    pub fn defaults(mode: Mode, edges: PathBuf) -> RunConfig {
        RunConfig {
            mode,
            edges,
            communities: None,
            communities_format: CommunitiesFormat::NodeLabelPairs,
            detector_b: DetectorConfig::new(DetectorKind::Leiden),
            detector_g: DetectorConfig::new(DetectorKind::Leiden),
            learner: LearnerConfig::new(Learner::Rf),
            seeds: (1..=10).collect(),
            cv_folds: 5,
            sampling: SamplingExposed::default(),
            weave_epsilon: 1e-6,
            weave_second_order_links: false,
            deoverlap_seed: 0,
            output_dir: PathBuf::from("runs"),
            write_artifacts: true,
        }
    }

    pub fn weave_options(&self) -> WeaveOptions {
        WeaveOptions {
            epsilon: self.weave_epsilon,
            add_second_order_links: self.weave_second_order_links,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.detector_b.validate().map_err(anyhow::Error::msg)?;
        self.detector_g.validate().map_err(anyhow::Error::msg)?;
        self.learner.validate().map_err(anyhow::Error::msg)?;
        if self.seeds.is_empty() {
            bail!("at least one seed is required");
        }
        if self.cv_folds < 2 {
            bail!("cv_folds must be >= 2");
        }
        if !(self.weave_epsilon > 0.0 && self.weave_epsilon <= 1.0) {
            bail!("weave epsilon must be in (0, 1]");
        }
        match self.mode {
            Mode::GroundTruth => {
                if self.communities.is_none() {
                    bail!("ground_truth mode requires a communities file");
                }
            }
            Mode::StatisticalPhysics => {
                let mut b = self.detector_b.clone();
                b.rng_seed = self.detector_g.rng_seed;
                if b != self.detector_g {
                    bail!(
                        "statistical_physics mode requires detector_b == detector_g \
                         (steps (b) and (g) stay consistent)"
                    );
                }
            }
        }
        Ok(())
    }
}

// ------------------------------------------------------------------
// TOML schema: everything optional, merged over defaults.
// ------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: Option<Mode>,
    pub seeds: Option<Vec<u64>>,
    pub cv_folds: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub write_artifacts: Option<bool>,
    pub deoverlap_seed: Option<u64>,
    #[serde(default)]
    pub dataset: DatasetSection,
    /// Sets both detector_b and detector_g.
    pub detector: Option<DetectorSection>,
    pub detector_b: Option<DetectorSection>,
    pub detector_g: Option<DetectorSection>,
    pub learner: Option<LearnerSection>,
    pub sampling: Option<SamplingExposed>,
    pub similarity: Option<SimilaritySection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub edges: Option<PathBuf>,
    pub communities: Option<PathBuf>,
    pub communities_format: Option<CommunitiesFormat>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub algorithm: Option<DetectorKind>,
    pub resolution: Option<f64>,
    pub max_passes: Option<usize>,
    pub tolerance: Option<f64>,
}

impl DetectorSection {
    fn apply(&self, config: &mut DetectorConfig) {
        if let Some(algorithm) = self.algorithm {
            config.detector = algorithm;
        }
        if let Some(resolution) = self.resolution {
            config.resolution = resolution;
        }
        if let Some(max_passes) = self.max_passes {
            config.max_passes = max_passes;
        }
        if let Some(tolerance) = self.tolerance {
            config.tolerance = tolerance;
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub kind: Option<Learner>,
    pub dt_max_depth: Option<usize>,
    pub dt_min_samples_leaf: Option<usize>,
    pub rf_trees: Option<usize>,
    pub rf_feature_subsample: Option<f64>,
    pub rf_row_subsample: Option<f64>,
    pub rf_bootstrap: Option<bool>,
    pub xgb_rounds: Option<usize>,
    pub xgb_learning_rate: Option<f64>,
    pub xgb_max_depth: Option<usize>,
    pub xgb_lambda: Option<f64>,
}

impl LearnerSection {
    fn apply(&self, config: &mut LearnerConfig) {
        if let Some(kind) = self.kind {
            config.learner = kind;
        }
        if let Some(v) = self.dt_max_depth {
            config.dt_max_depth = v;
        }
        if let Some(v) = self.dt_min_samples_leaf {
            config.dt_min_samples_leaf = v;
        }
        if let Some(v) = self.rf_trees {
            config.rf_trees = v;
        }
        if let Some(v) = self.rf_feature_subsample {
            config.rf_feature_subsample = v;
        }
        if let Some(v) = self.rf_row_subsample {
            config.rf_row_subsample = v;
        }
        if let Some(v) = self.rf_bootstrap {
            config.rf_bootstrap = v;
        }
        if let Some(v) = self.xgb_rounds {
            config.xgb_rounds = v;
        }
        if let Some(v) = self.xgb_learning_rate {
            config.xgb_learning_rate = v;
        }
        if let Some(v) = self.xgb_max_depth {
            config.xgb_max_depth = v;
        }
        if let Some(v) = self.xgb_lambda {
            config.xgb_lambda = v;
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilaritySection {
    pub epsilon: Option<f64>,
    pub add_second_order_links: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Merges the file over built-in defaults into a resolved RunConfig.
    /// `edges` may still be empty afterwards; callers validate.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mode = self.mode.unwrap_or(Mode::StatisticalPhysics);
        let edges = self.dataset.edges.clone().unwrap_or_default();
        let mut config = RunConfig::defaults(mode, edges);
        config.communities = self.dataset.communities.clone();
        if let Some(format) = self.dataset.communities_format {
            config.communities_format = format;
        }
        if let Some(seeds) = &self.seeds {
            config.seeds = seeds.clone();
        }
        if let Some(folds) = self.cv_folds {
            config.cv_folds = folds;
        }
        if let Some(dir) = &self.output_dir {
            config.output_dir = dir.clone();
        }
        if let Some(write) = self.write_artifacts {
            config.write_artifacts = write;
        }
        if let Some(seed) = self.deoverlap_seed {
            config.deoverlap_seed = seed;
        }
        if let Some(shared) = &self.detector {
            shared.apply(&mut config.detector_b);
            shared.apply(&mut config.detector_g);
        }
        if let Some(section) = &self.detector_b {
            section.apply(&mut config.detector_b);
        }
        if let Some(section) = &self.detector_g {
            section.apply(&mut config.detector_g);
        }
        if let Some(section) = &self.learner {
            section.apply(&mut config.learner);
        }
        if let Some(sampling) = &self.sampling {
            config.sampling = sampling.clone();
        }
        if let Some(similarity) = &self.similarity {
            if let Some(epsilon) = similarity.epsilon {
                config.weave_epsilon = epsilon;
            }
            if let Some(flag) = similarity.add_second_order_links {
                config.weave_second_order_links = flag;
            }
        }
        Ok(config)
    }
}
