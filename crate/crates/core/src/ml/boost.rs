//! Gradient boosting with the binary logistic objective: each round fits
//! a regression tree to gradient/hessian statistics, leaf values are the
//! second-order step `-G / (H + lambda)` scaled by the learning rate.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::fmath::sigmoid;

use super::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RegressionNode {
    Split {
        feature_index: usize,
        threshold: f64,
        left: Box<RegressionNode>,
        right: Box<RegressionNode>,
    },
    Leaf {
        value: f64,
    },
}

impl RegressionNode {
    pub fn predict(&self, features: &[f64]) -> f64 {
        match self {
            RegressionNode::Leaf { value } => *value,
            RegressionNode::Split {
                feature_index,
                threshold,
                left,
                right,
            } => {
                if features[*feature_index] < *threshold {
                    left.predict(features)
                } else {
                    right.predict(features)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RegressionNode::Leaf { .. } => 0,
            RegressionNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

pub(crate) struct BoostBuilder<'a> {
    pub x: &'a FeatureMatrix,
    pub grad: &'a [f64],
    pub hess: &'a [f64],
    pub max_depth: usize,
    pub lambda: f64,
    pub learning_rate: f64,
    pub importance: Vec<f64>,
}

impl<'a> BoostBuilder<'a> {
    fn sums(&self, rows: &[u32]) -> (f64, f64) {
        let mut g = 0.0;
        let mut h = 0.0;
        for &i in rows {
            g += self.grad[i as usize];
            h += self.hess[i as usize];
        }
        (g, h)
    }

    fn leaf(&self, g: f64, h: f64) -> RegressionNode {
        RegressionNode::Leaf {
            value: self.learning_rate * (-g / (h + self.lambda)),
        }
    }

    fn objective(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.lambda)
    }

    /// Sorts once per feature, then grows by stable partition.
    pub fn build(&mut self, rows: Vec<u32>, depth: usize) -> RegressionNode {
        let per_feature: Vec<Vec<u32>> = (0..self.x.n_features())
            .map(|feature| {
                let mut sorted = rows.clone();
                sorted.sort_by(|&a, &b| {
                    self.x.row(a as usize)[feature]
                        .partial_cmp(&self.x.row(b as usize)[feature])
                        .unwrap()
                });
                sorted
            })
            .collect();
        self.build_node(per_feature, depth)
    }

    fn build_node(&mut self, per_feature: Vec<Vec<u32>>, depth: usize) -> RegressionNode {
        let rows = &per_feature[0];
        let (g_total, h_total) = self.sums(rows);
        if depth >= self.max_depth || rows.len() < 2 {
            return self.leaf(g_total, h_total);
        }

        // Best gain over all features and midpoints; ties to the lowest
        // feature index, then threshold (ascending scan, strict wins).
        let mut best: Option<(f64, usize, f64)> = None;
        for (feature, sorted) in per_feature.iter().enumerate() {
            let (mut g_left, mut h_left) = (0.0, 0.0);
            for cut in 1..sorted.len() {
                let prev = sorted[cut - 1] as usize;
                g_left += self.grad[prev];
                h_left += self.hess[prev];
                let lo = self.x.row(prev)[feature];
                let hi = self.x.row(sorted[cut] as usize)[feature];
                if lo == hi {
                    continue;
                }
                let gain = 0.5
                    * (self.objective(g_left, h_left)
                        + self.objective(g_total - g_left, h_total - h_left)
                        - self.objective(g_total, h_total));
                if gain <= 1e-12 {
                    continue;
                }
                let threshold = lo + (hi - lo) / 2.0;
                let better = match best {
                    None => true,
                    Some((best_gain, _, _)) => gain > best_gain + 1e-12,
                };
                if better {
                    best = Some((gain, feature, threshold));
                }
            }
        }

        let Some((gain, feature_index, threshold)) = best else {
            return self.leaf(g_total, h_total);
        };
        self.importance[feature_index] += gain;
        let goes_left = |row: u32| self.x.row(row as usize)[feature_index] < threshold;
        let mut left_lists = Vec::with_capacity(per_feature.len());
        let mut right_lists = Vec::with_capacity(per_feature.len());
        for list in per_feature {
            let (l, r): (Vec<u32>, Vec<u32>) = list.into_iter().partition(|&row| goes_left(row));
            left_lists.push(l);
            right_lists.push(r);
        }
        let left = self.build_node(left_lists, depth + 1);
        let right = self.build_node(right_lists, depth + 1);
        RegressionNode::Split {
            feature_index,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

/// Log-odds of the class-1 rate, clamped to +/-10 for degenerate inputs.
pub(crate) fn prior_log_odds(labels: &[u8]) -> f64 {
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let n = labels.len();
    if positives == 0 {
        return -10.0;
    }
    if positives == n {
        return 10.0;
    }
    let rate = positives as f64 / n as f64;
    crate::fmath::ln(rate / (1.0 - rate)).clamp(-10.0, 10.0)
}

/// Boosted scores -> probability.
pub(crate) fn boost_probability(base_score: f64, trees: &[RegressionNode], features: &[f64]) -> f64 {
    let score: f64 = base_score + trees.iter().map(|t| t.predict(features)).sum::<f64>();
    sigmoid(score)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_matches_prevalence() {
        let odds = prior_log_odds(&[1, 0, 0, 0]);
        assert!((sigmoid(odds) - 0.25).abs() < 1e-12);
        assert_eq!(prior_log_odds(&[1, 1]), 10.0);
        assert_eq!(prior_log_odds(&[0]), -10.0);
    }

    #[test]
    fn huge_lambda_freezes_predictions_at_prior() {
        let x = FeatureMatrix::from_rows(&[&[0.0], &[1.0], &[2.0], &[3.0]]).unwrap();
        let y = [0u8, 0, 1, 1];
        let grad: Vec<f64> = y.iter().map(|&v| 0.5 - v as f64).collect();
        let hess = alloc::vec![0.25; 4];
        let mut builder = BoostBuilder {
            x: &x,
            grad: &grad,
            hess: &hess,
            max_depth: 3,
            lambda: 1e12,
            learning_rate: 0.1,
            importance: alloc::vec![0.0; 1],
        };
        let tree = builder.build(alloc::vec![0, 1, 2, 3], 0);
        for probe in [0.0, 1.5, 3.0] {
            assert!(tree.predict(&[probe]).abs() < 1e-9);
        }
    }
}
