use serde::{Deserialize, Serialize};

use super::{encode_labels, ModelParams, ModelSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::featurize::{FeatureMatrix, Row};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaiveBayesParams {
    /// Additive (Lidstone) smoothing.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    1.0
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams { alpha: default_alpha() }
    }
}

/// Multinomial naive Bayes over count features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes<T> {
    pub class_log_prior: Vec<T>,
    /// `[class][feature]` smoothed log P(feature | class).
    pub feature_log_prob: Vec<Vec<T>>,
}

impl<T: Scalar> NaiveBayes<T> {
    pub fn joint_log_likelihood(&self, row: Row<'_, T>) -> Vec<T> {
        self.class_log_prior
            .iter()
            .zip(&self.feature_log_prob)
            .map(|(prior, flp)| *prior + row.dot(flp))
            .collect()
    }
}

pub fn train_naive_bayes<T: Scalar>(x: &FeatureMatrix<T>, y: &[usize], alpha: f64) -> Result<TrainedModel<T>> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be > 0, got {alpha}")));
    }
    let (classes, idx) = encode_labels(x, y)?;
    let dim = x.n_cols();
    let n_classes = classes.len();
    let mut class_count = vec![0usize; n_classes];
    let mut feature_count = vec![vec![T::zero(); dim]; n_classes];
    for (r, row) in x.rows().enumerate() {
        let c = idx[r];
        class_count[c] += 1;
        for (j, v) in row.iter() {
            if v < T::zero() {
                return Err(Error::NegativeFeature {
                    row: r,
                    col: j,
                    value: v.as_f64(),
                });
            }
            feature_count[c][j] += v;
        }
    }
    let n = T::of_usize(y.len());
    let a = T::of(alpha);
    let class_log_prior = class_count.iter().map(|&c| (T::of_usize(c) / n).ln()).collect();
    let feature_log_prob = feature_count
        .iter()
        .map(|counts| {
            let total: T = counts.iter().copied().sum::<T>() + a * T::of_usize(dim);
            counts.iter().map(|&c| ((c + a) / total).ln()).collect()
        })
        .collect();
    Ok(TrainedModel::new(
        ModelSpec::NaiveBayes(NaiveBayesParams { alpha }),
        0,
        classes,
        dim,
        ModelParams::NaiveBayes(NaiveBayes {
            class_log_prior,
            feature_log_prob,
        }),
    ))
}
