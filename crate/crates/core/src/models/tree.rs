//! CART classification tree with Gini impurity.

use serde::{Deserialize, Serialize};

use super::{argmax, encode_labels, ModelParams, ModelSpec, TrainedModel};
use crate::error::Result;
use crate::featurize::{FeatureMatrix, Row};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecisionTreeParams {
    pub max_depth: usize,
    /// Minimum samples on each side of a split.
    pub min_leaf: usize,
}

impl Default for DecisionTreeParams {
    fn default() -> Self {
        DecisionTreeParams {
            max_depth: 20,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode<T> {
    Leaf {
        class_index: usize,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<T> {
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode<T>>,
}

impl<T: Scalar> DecisionTree<T> {
    pub fn predict_index(&self, row: Row<'_, T>) -> usize {
        let dense_lookup = |feature: usize| -> T {
            match row {
                Row::Dense(d) => d[feature],
                Row::Sparse(s) => s
                    .indices
                    .binary_search(&feature)
                    .map(|p| s.values[p])
                    .unwrap_or_else(|_| T::zero()),
            }
        };
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { class_index } => return *class_index,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if dense_lookup(*feature) <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[TreeNode<T>], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice<T> {
    pub feature: usize,
    pub threshold: T,
    pub gain: f64,
}

const GAIN_EPS: f64 = 1e-12;

struct Builder<'a, T> {
    columns: Vec<Vec<(usize, T)>>,
    targets: &'a [usize],
    n_classes: usize,
    params: DecisionTreeParams,
    nodes: Vec<TreeNode<T>>,
    in_node: Vec<bool>,
}

impl<'a, T: Scalar> Builder<'a, T> {
    fn counts(&self, samples: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &s in samples {
            c[self.targets[s]] += 1;
        }
        c
    }

    /// Best Gini split of `samples`, scanning features then thresholds in
    /// ascending order and keeping the first strictly better candidate.
    fn best_split(&mut self, samples: &[usize], parent: &[usize]) -> Option<SplitChoice<T>> {
        let n = samples.len();
        let parent_gini = gini(parent, n);
        let min_leaf = self.params.min_leaf;
        for &s in samples {
            self.in_node[s] = true;
        }
        let mut best: Option<SplitChoice<T>> = None;
        for (feature, column) in self.columns.iter().enumerate() {
            // (value, class, weight): one entry per non-zero, the zeros
            // collapsed to one entry per class
            let mut entries: Vec<(T, usize, usize)> = column
                .iter()
                .filter(|(r, _)| self.in_node[*r])
                .map(|&(r, v)| (v, self.targets[r], 1))
                .collect();
            if entries.len() < n {
                let mut zero_counts = parent.to_vec();
                for (_, c, _) in &entries {
                    zero_counts[*c] -= 1;
                }
                for (c, &k) in zero_counts.iter().enumerate() {
                    if k > 0 {
                        entries.push((T::zero(), c, k));
                    }
                }
            }
            entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut left = vec![0usize; self.n_classes];
            let mut n_left = 0;
            let mut i = 0;
            while i < entries.len() {
                let v = entries[i].0;
                while i < entries.len() && entries[i].0 == v {
                    left[entries[i].1] += entries[i].2;
                    n_left += entries[i].2;
                    i += 1;
                }
                if i == entries.len() {
                    break;
                }
                let n_right = n - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let right: Vec<usize> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
                let gain = parent_gini
                    - (n_left as f64 / n as f64) * gini(&left, n_left)
                    - (n_right as f64 / n as f64) * gini(&right, n_right);
                if gain > best.map_or(GAIN_EPS, |b| b.gain + GAIN_EPS) {
                    best = Some(SplitChoice {
                        feature,
                        threshold: (v + entries[i].0) * T::of(0.5),
                        gain,
                    });
                }
            }
        }
        for &s in samples {
            self.in_node[s] = false;
        }
        best
    }

    fn value(&self, sample: usize, feature: usize) -> T {
        let col = &self.columns[feature];
        col.binary_search_by_key(&sample, |e| e.0)
            .map(|p| col[p].1)
            .unwrap_or_else(|_| T::zero())
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&samples);
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            class_index: argmax(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>()),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.params.max_depth || samples.len() < 2 * self.params.min_leaf {
            return id;
        }
        let Some(split) = self.best_split(&samples, &counts) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&s| self.value(s, split.feature) <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

pub fn train_decision_tree<T: Scalar>(
    x: &FeatureMatrix<T>,
    y: &[usize],
    params: &DecisionTreeParams,
) -> Result<TrainedModel<T>> {
    let (classes, targets) = encode_labels(x, y)?;
    let mut builder = Builder {
        columns: x.columns(),
        targets: &targets,
        n_classes: classes.len(),
        params: *params,
        nodes: Vec::new(),
        in_node: vec![false; x.n_rows()],
    };
    builder.grow((0..x.n_rows()).collect(), 0);
    let tree = DecisionTree { nodes: builder.nodes };
    Ok(TrainedModel::new(
        ModelSpec::DecisionTree(*params),
        0,
        classes,
        x.n_cols(),
        ModelParams::DecisionTree(tree),
    ))
}
