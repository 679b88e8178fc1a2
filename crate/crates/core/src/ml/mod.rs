//! From-scratch tree ensembles over node-pair features: decision tree,
//! random forest, gradient-boosted trees, a soft/hard voting combiner,
//! and stratified k-fold cross-validation that attaches an out-of-fold
//! same-community probability to every sample.

mod boost;
mod cv;
mod tree;

pub use boost::RegressionNode;
pub use cv::{cross_val_oof, stratified_folds};
pub use tree::TreeNode;

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fmath::sigmoid;

/// Row-major dense feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    n_features: usize,
}

impl FeatureMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<FeatureMatrix> {
        let n_features = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if n_features == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut data = Vec::with_capacity(rows.len() * n_features);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_features {
                return Err(Error::FeatureLengthMismatch {
                    expected: n_features,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(FeatureMatrix { data, n_features })
    }

    pub fn n_rows(&self) -> usize {
        self.data.len().checked_div(self.n_features).unwrap_or(0)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Learner {
    Dt,
    Rf,
    Xgb,
    VcSoft,
    VcHard,
}

impl Learner {
    pub fn name(&self) -> &'static str {
        match self {
            Learner::Dt => "dt",
            Learner::Rf => "rf",
            Learner::Xgb => "xgb",
            Learner::VcSoft => "vc_soft",
            Learner::VcHard => "vc_hard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum VoteMode {
    Soft,
    Hard,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LearnerConfig {
    pub learner: Learner,
    pub dt_max_depth: usize,
    pub dt_min_samples_leaf: usize,
    pub rf_trees: usize,
    /// Fraction of features drawn per split.
    pub rf_feature_subsample: f64,
    /// Fraction of rows drawn per tree.
    pub rf_row_subsample: f64,
    /// Draw rows with replacement (bagging). Disabled with a fraction of
    /// 1.0, each tree sees the full dataset.
    pub rf_bootstrap: bool,
    pub xgb_rounds: usize,
    pub xgb_learning_rate: f64,
    pub xgb_max_depth: usize,
    /// L2 regularization on leaf values.
    pub xgb_lambda: f64,
    pub rng_seed: u64,
}

impl LearnerConfig {
    pub fn new(learner: Learner) -> LearnerConfig {
        LearnerConfig {
            learner,
            dt_max_depth: 6,
            dt_min_samples_leaf: 20,
            rf_trees: 100,
            rf_feature_subsample: 1.0,
            rf_row_subsample: 1.0,
            rf_bootstrap: true,
            xgb_rounds: 100,
            xgb_learning_rate: 0.1,
            xgb_max_depth: 3,
            xgb_lambda: 1.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(String::from(msg)));
        if self.dt_max_depth == 0 || self.dt_min_samples_leaf == 0 {
            return bad("decision-tree depth and leaf size must be >= 1");
        }
        if self.rf_trees == 0 || self.xgb_max_depth == 0 {
            return bad("tree counts and depths must be >= 1");
        }
        if !(self.rf_feature_subsample > 0.0 && self.rf_feature_subsample <= 1.0) {
            return bad("rf_feature_subsample must be in (0, 1]");
        }
        if !(self.rf_row_subsample > 0.0 && self.rf_row_subsample <= 1.0) {
            return bad("rf_row_subsample must be in (0, 1]");
        }
        if self.xgb_learning_rate.is_nan() || self.xgb_learning_rate <= 0.0 {
            return bad("xgb_learning_rate must be > 0");
        }
        if self.xgb_lambda.is_nan() || self.xgb_lambda < 0.0 {
            return bad("xgb_lambda must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelKind {
    DecisionTree(TreeNode),
    RandomForest(Vec<TreeNode>),
    GradientBoost {
        base_score: f64,
        trees: Vec<RegressionNode>,
    },
    Voting {
        mode: VoteMode,
        members: Vec<FittedModel>,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FittedModel {
    pub kind: ModelKind,
    pub n_features: usize,
    /// Total impurity decrease (Gini for classification trees, boosting
    /// gain for regression trees), per feature.
    pub feature_importance: Vec<f64>,
}

impl FittedModel {
    /// Class-1 probability for one feature vector.
    pub fn predict_proba(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.n_features {
            return Err(Error::FeatureLengthMismatch {
                expected: self.n_features,
                got: features.len(),
            });
        }
        Ok(match &self.kind {
            ModelKind::DecisionTree(root) => root.predict(features),
            ModelKind::RandomForest(trees) => {
                trees.iter().map(|t| t.predict(features)).sum::<f64>() / trees.len() as f64
            }
            ModelKind::GradientBoost { base_score, trees } => {
                boost::boost_probability(*base_score, trees, features)
            }
            ModelKind::Voting { mode, members } => vote(members, features, *mode)?,
        })
    }

    /// Diagnostics: (tree count, max depth).
    pub fn shape(&self) -> (usize, usize) {
        match &self.kind {
            ModelKind::DecisionTree(root) => (1, root.depth()),
            ModelKind::RandomForest(trees) => (
                trees.len(),
                trees.iter().map(|t| t.depth()).max().unwrap_or(0),
            ),
            ModelKind::GradientBoost { trees, .. } => (
                trees.len(),
                trees.iter().map(|t| t.depth()).max().unwrap_or(0),
            ),
            ModelKind::Voting { members, .. } => members
                .iter()
                .map(|m| m.shape())
                .fold((0, 0), |acc, s| (acc.0 + s.0, acc.1.max(s.1))),
        }
    }

    /// Compact diagnostics record (serializable with the `serde`
    /// feature).
    pub fn summary(&self) -> ModelSummary {
        let (tree_count, max_depth) = self.shape();
        let kind = match &self.kind {
            ModelKind::DecisionTree(_) => "decision_tree",
            ModelKind::RandomForest(_) => "random_forest",
            ModelKind::GradientBoost { .. } => "gradient_boost",
            ModelKind::Voting {
                mode: VoteMode::Soft,
                ..
            } => "voting_soft",
            ModelKind::Voting {
                mode: VoteMode::Hard,
                ..
            } => "voting_hard",
        };
        ModelSummary {
            kind,
            tree_count,
            max_depth,
            feature_importance: self.feature_importance.clone(),
        }
    }
}

/// Tree counts, depths, and per-feature total impurity decrease.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ModelSummary {
    pub kind: &'static str,
    pub tree_count: usize,
    pub max_depth: usize,
    pub feature_importance: Vec<f64>,
}

/// Soft = mean of member probabilities; hard = fraction of members voting
/// class 1 (probability >= 0.5), so the result is still a likelihood.
pub fn vote(members: &[FittedModel], features: &[f64], mode: VoteMode) -> Result<f64> {
    if members.len() != 3 {
        return Err(Error::VoteMemberCount(members.len()));
    }
    let mut probs = [0.0f64; 3];
    for (slot, member) in probs.iter_mut().zip(members) {
        *slot = member.predict_proba(features)?;
    }
    Ok(match mode {
        VoteMode::Soft => probs.iter().sum::<f64>() / 3.0,
        VoteMode::Hard => probs.iter().filter(|&&p| p >= 0.5).count() as f64 / 3.0,
    })
}

fn check_training_input(x: &FeatureMatrix, y: &[u8]) -> Result<()> {
    if x.n_rows() == 0 || y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if x.n_rows() != y.len() {
        return Err(Error::FeatureLengthMismatch {
            expected: x.n_rows(),
            got: y.len(),
        });
    }
    Ok(())
}

pub fn fit_decision_tree(x: &FeatureMatrix, y: &[u8], config: &LearnerConfig) -> Result<FittedModel> {
    config.validate()?;
    check_training_input(x, y)?;
    let mut builder = tree::TreeBuilder::new(x, y, config.dt_max_depth, config.dt_min_samples_leaf);
    let all: Vec<usize> = (0..x.n_features()).collect();
    let rows: Vec<u32> = (0..x.n_rows() as u32).collect();
    let root = builder.build(rows, 0, &mut || all.clone());
    Ok(FittedModel {
        kind: ModelKind::DecisionTree(root),
        n_features: x.n_features(),
        feature_importance: builder.importance,
    })
}

pub fn fit_random_forest(x: &FeatureMatrix, y: &[u8], config: &LearnerConfig) -> Result<FittedModel> {
    config.validate()?;
    check_training_input(x, y)?;
    let n = x.n_rows();
    let n_features = x.n_features();
    let per_tree =
        (crate::fmath::ceil(config.rf_row_subsample * n as f64) as usize).clamp(1, n);
    let k_features = (crate::fmath::ceil(config.rf_feature_subsample * n_features as f64)
        as usize)
        .clamp(1, n_features);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let mut trees = Vec::with_capacity(config.rf_trees);
    let mut importance = alloc::vec![0.0; n_features];
    for _ in 0..config.rf_trees {
        let rows: Vec<u32> = if config.rf_bootstrap {
            (0..per_tree).map(|_| rng.gen_range(0..n) as u32).collect()
        } else if per_tree == n {
            (0..n as u32).collect()
        } else {
            let mut picked = rand::seq::index::sample(&mut rng, n, per_tree).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| i as u32).collect()
        };
        let mut builder =
            tree::TreeBuilder::new(x, y, config.dt_max_depth, config.dt_min_samples_leaf);
        let root = builder.build(rows, 0, &mut || {
            if k_features == n_features {
                (0..n_features).collect()
            } else {
                let mut picked =
                    rand::seq::index::sample(&mut rng, n_features, k_features).into_vec();
                picked.sort_unstable();
                picked
            }
        });
        for (total, part) in importance.iter_mut().zip(&builder.importance) {
            *total += part;
        }
        trees.push(root);
    }
    Ok(FittedModel {
        kind: ModelKind::RandomForest(trees),
        n_features,
        feature_importance: importance,
    })
}

pub fn fit_gradient_boost(x: &FeatureMatrix, y: &[u8], config: &LearnerConfig) -> Result<FittedModel> {
    config.validate()?;
    check_training_input(x, y)?;
    let n = x.n_rows();
    let base_score = boost::prior_log_odds(y);
    let mut scores = alloc::vec![base_score; n];
    let mut trees = Vec::with_capacity(config.xgb_rounds);
    let mut importance = alloc::vec![0.0; x.n_features()];

    for _ in 0..config.xgb_rounds {
        let mut grad = Vec::with_capacity(n);
        let mut hess = Vec::with_capacity(n);
        for (i, &label) in y.iter().enumerate() {
            let p = sigmoid(scores[i]);
            grad.push(p - label as f64);
            hess.push(p * (1.0 - p));
        }
        let mut builder = boost::BoostBuilder {
            x,
            grad: &grad,
            hess: &hess,
            max_depth: config.xgb_max_depth,
            lambda: config.xgb_lambda,
            learning_rate: config.xgb_learning_rate,
            importance: alloc::vec![0.0; x.n_features()],
        };
        let rows: Vec<u32> = (0..n as u32).collect();
        let tree = builder.build(rows, 0);
        for (i, slot) in scores.iter_mut().enumerate() {
            *slot += tree.predict(x.row(i));
        }
        for (total, part) in importance.iter_mut().zip(&builder.importance) {
            *total += part;
        }
        trees.push(tree);
    }
    Ok(FittedModel {
        kind: ModelKind::GradientBoost { base_score, trees },
        n_features: x.n_features(),
        feature_importance: importance,
    })
}

fn derive_seed(base: u64, stream: u64) -> u64 {
    // splitmix64 step keeps sub-model seeds decorrelated.
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fits the learner selected by `config.learner`; the voting learners
/// fit all three constituents on the same data.
pub fn fit(x: &FeatureMatrix, y: &[u8], config: &LearnerConfig) -> Result<FittedModel> {
    match config.learner {
        Learner::Dt => fit_decision_tree(x, y, config),
        Learner::Rf => fit_random_forest(x, y, config),
        Learner::Xgb => fit_gradient_boost(x, y, config),
        Learner::VcSoft | Learner::VcHard => {
            let mode = if config.learner == Learner::VcSoft {
                VoteMode::Soft
            } else {
                VoteMode::Hard
            };
            let mut members = Vec::with_capacity(3);
            for (stream, learner) in [Learner::Dt, Learner::Rf, Learner::Xgb]
                .into_iter()
                .enumerate()
            {
                let member_config = LearnerConfig {
                    learner,
                    rng_seed: derive_seed(config.rng_seed, stream as u64 + 1),
                    ..config.clone()
                };
                members.push(fit(x, y, &member_config)?);
            }
            let n_features = x.n_features();
            let feature_importance = members.iter().fold(
                alloc::vec![0.0; n_features],
                |mut acc, m| {
                    for (slot, v) in acc.iter_mut().zip(&m.feature_importance) {
                        *slot += v;
                    }
                    acc
                },
            );
            Ok(FittedModel {
                kind: ModelKind::Voting { mode, members },
                n_features,
                feature_importance,
            })
        }
    }
}
