//! CART-style binary classification tree: greedy splits minimizing
//! weighted Gini impurity, thresholds at midpoints of consecutive
//! distinct feature values. Row indices are sorted once per feature at
//! the root and partitioned stably down the tree.

use alloc::boxed::Box;
use alloc::vec::Vec;

use super::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TreeNode {
    Split {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class1_probability: f64,
        sample_count: usize,
    },
}

impl TreeNode {
    /// Routes `features` to a leaf: `feature < threshold` goes left,
    /// equality goes right.
    pub fn predict(&self, features: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf {
                class1_probability, ..
            } => *class1_probability,
            TreeNode::Split {
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
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

fn gini(positives: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = positives as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

/// Row indices of one node, sorted per feature. Every list holds the
/// same row multiset.
struct NodeRows {
    per_feature: Vec<Vec<u32>>,
}

impl NodeRows {
    fn partition(self, x: &FeatureMatrix, feature: usize, threshold: f64) -> (NodeRows, NodeRows) {
        let goes_left = |row: u32| x.row(row as usize)[feature] < threshold;
        let mut left = Vec::with_capacity(self.per_feature.len());
        let mut right = Vec::with_capacity(self.per_feature.len());
        for list in self.per_feature {
            let (l, r): (Vec<u32>, Vec<u32>) = list.into_iter().partition(|&row| goes_left(row));
            left.push(l);
            right.push(r);
        }
        (
            NodeRows { per_feature: left },
            NodeRows { per_feature: right },
        )
    }
}

pub(crate) struct TreeBuilder<'a> {
    pub x: &'a FeatureMatrix,
    pub y: &'a [u8],
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Accumulated impurity decrease per feature, weighted by node size.
    pub importance: Vec<f64>,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(
        x: &'a FeatureMatrix,
        y: &'a [u8],
        max_depth: usize,
        min_samples_leaf: usize,
    ) -> Self {
        TreeBuilder {
            x,
            y,
            max_depth,
            min_samples_leaf,
            importance: alloc::vec![0.0; x.n_features()],
        }
    }

    fn leaf(&self, rows: &[u32]) -> TreeNode {
        let positives = rows.iter().filter(|&&i| self.y[i as usize] == 1).count();
        TreeNode::Leaf {
            class1_probability: positives as f64 / rows.len() as f64,
            sample_count: rows.len(),
        }
    }

    /// Impurity-minimizing midpoint over one presorted list; ties keep
    /// the lowest threshold.
    fn scan_feature(&self, sorted: &[u32], feature: usize) -> Option<(f64, f64)> {
        let n = sorted.len();
        let total_pos = sorted.iter().filter(|&&i| self.y[i as usize] == 1).count();
        let mut best: Option<(f64, f64)> = None;
        let mut left_pos = 0usize;
        for cut in 1..n {
            let prev = sorted[cut - 1] as usize;
            if self.y[prev] == 1 {
                left_pos += 1;
            }
            let lo = self.x.row(prev)[feature];
            let hi = self.x.row(sorted[cut] as usize)[feature];
            if lo == hi {
                continue;
            }
            if cut < self.min_samples_leaf || n - cut < self.min_samples_leaf {
                continue;
            }
            let weighted = (cut as f64 * gini(left_pos, cut)
                + (n - cut) as f64 * gini(total_pos - left_pos, n - cut))
                / n as f64;
            if best.is_none_or(|(best_imp, _)| weighted < best_imp - 1e-12) {
                best = Some((weighted, lo + (hi - lo) / 2.0));
            }
        }
        best.map(|(imp, thr)| (thr, imp))
    }

    /// Sorts once per feature and grows the tree. `feature_pool` picks
    /// the candidate features per split (all of them for a plain
    /// decision tree, a random subset for forests).
    pub fn build<F: FnMut() -> Vec<usize>>(
        &mut self,
        rows: Vec<u32>,
        depth: usize,
        feature_pool: &mut F,
    ) -> TreeNode {
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
        self.build_node(NodeRows { per_feature }, depth, feature_pool)
    }

    fn build_node<F: FnMut() -> Vec<usize>>(
        &mut self,
        rows: NodeRows,
        depth: usize,
        feature_pool: &mut F,
    ) -> TreeNode {
        let node_rows = &rows.per_feature[0];
        let positives = node_rows
            .iter()
            .filter(|&&i| self.y[i as usize] == 1)
            .count();
        let pure = positives == 0 || positives == node_rows.len();
        if depth >= self.max_depth || pure || node_rows.len() < 2 * self.min_samples_leaf {
            return self.leaf(node_rows);
        }

        // Lowest feature index wins ties through the strict comparison
        // and the ascending candidate order.
        let mut candidates = feature_pool();
        candidates.sort_unstable();
        let mut best: Option<(usize, f64, f64)> = None;
        for feature in candidates {
            if let Some((threshold, weighted)) = self.scan_feature(&rows.per_feature[feature], feature)
            {
                if best.is_none_or(|(_, _, best_imp)| weighted < best_imp - 1e-12) {
                    best = Some((feature, threshold, weighted));
                }
            }
        }
        let Some((feature_index, threshold, weighted_impurity)) = best else {
            return self.leaf(node_rows);
        };
        let parent_impurity = gini(positives, node_rows.len());
        if weighted_impurity >= parent_impurity - 1e-12 {
            return self.leaf(node_rows);
        }
        self.importance[feature_index] +=
            node_rows.len() as f64 * (parent_impurity - weighted_impurity);

        let (left_rows, right_rows) = rows.partition(self.x, feature_index, threshold);
        let left = self.build_node(left_rows, depth + 1, feature_pool);
        let right = self.build_node(right_rows, depth + 1, feature_pool);
        TreeNode::Split {
            feature_index,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}
