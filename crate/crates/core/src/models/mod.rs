//! Classifier families behind one train/predict contract.
//!
//! Every family maps training labels (cluster ids) to a sorted class list;
//! argmax and vote ties always resolve to the smallest class id.

mod knn;
mod linear;
mod mlp;
mod naive_bayes;
mod persist;
mod tree;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use knn::{train_knn, Knn};
pub use linear::{
    hinge_objective, softmax_objective, train_linear_svm, train_logreg, LinearModel, LinearSvmParams, LogregParams,
};
pub use mlp::{mlp_objective, train_mlp, Mlp, MlpParams};
pub use naive_bayes::{train_naive_bayes, NaiveBayes, NaiveBayesParams};
pub use persist::{load_model, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use tree::{train_decision_tree, DecisionTree, DecisionTreeParams, TreeNode};

use crate::categorize::CategoryLabel;
use crate::error::{Error, Result};
use crate::featurize::{FeatureMatrix, NgramSpec, Row, Weighting};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnParams {
    #[serde(default = "default_knn_k")]
    pub k: usize,
}

fn default_knn_k() -> usize {
    5
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: default_knn_k() }
    }
}

/// A model family together with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    NaiveBayes(NaiveBayesParams),
    Logreg(LogregParams),
    Knn(KnnParams),
    DecisionTree(DecisionTreeParams),
    LinearSvm(LinearSvmParams),
    Mlp(MlpParams),
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::NaiveBayes(_) => "naive_bayes",
            ModelSpec::Logreg(_) => "logreg",
            ModelSpec::Knn(_) => "knn",
            ModelSpec::DecisionTree(_) => "decision_tree",
            ModelSpec::LinearSvm(_) => "linear_svm",
            ModelSpec::Mlp(_) => "mlp",
        }
    }

    /// Families that cannot be trained on a single class.
    pub fn is_discriminative(&self) -> bool {
        matches!(self, ModelSpec::Logreg(_) | ModelSpec::LinearSvm(_) | ModelSpec::Mlp(_))
    }

    /// Every family with default hyperparameters, in a fixed order.
    pub fn all_defaults() -> Vec<ModelSpec> {
        vec![
            ModelSpec::NaiveBayes(Default::default()),
            ModelSpec::Logreg(Default::default()),
            ModelSpec::Knn(Default::default()),
            ModelSpec::DecisionTree(Default::default()),
            ModelSpec::LinearSvm(Default::default()),
            ModelSpec::Mlp(Default::default()),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")))
            }
        };
        match self {
            ModelSpec::NaiveBayes(p) => positive("alpha", p.alpha),
            ModelSpec::Logreg(p) => {
                positive("lr", p.lr)?;
                if !(p.l2.is_finite() && p.l2 >= 0.0) {
                    return bad(format!("l2 must be >= 0, got {}", p.l2));
                }
                if p.batch == 0 {
                    return bad("batch must be >= 1".into());
                }
                Ok(())
            }
            ModelSpec::Knn(p) if p.k == 0 => bad("knn k must be >= 1".into()),
            ModelSpec::Knn(_) => Ok(()),
            ModelSpec::DecisionTree(p) => {
                if p.max_depth == 0 || p.min_leaf == 0 {
                    return bad("max_depth and min_leaf must be >= 1".into());
                }
                Ok(())
            }
            ModelSpec::LinearSvm(p) => {
                positive("c", p.c)?;
                positive("lr", p.lr)?;
                if p.batch == 0 {
                    return bad("batch must be >= 1".into());
                }
                Ok(())
            }
            ModelSpec::Mlp(p) => {
                positive("lr", p.lr)?;
                if p.hidden == 0 || p.batch == 0 {
                    return bad("hidden and batch must be >= 1".into());
                }
                Ok(())
            }
        }
    }
}

/// What the model's input columns mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureSpace {
    Raw {
        dim: usize,
    },
    Ngrams {
        spec: NgramSpec,
        weighting: Weighting,
        vocab_size: usize,
        vocab_fingerprint: String,
        category_labels: Option<Vec<CategoryLabel>>,
    },
    Embeddings {
        dim: usize,
        category_labels: Option<Vec<CategoryLabel>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams<T> {
    NaiveBayes(NaiveBayes<T>),
    Logreg(LinearModel<T>),
    Knn(Knn<T>),
    DecisionTree(DecisionTree<T>),
    LinearSvm(LinearModel<T>),
    Mlp(Mlp<T>),
    /// Trained on a single class.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel<T> {
    pub spec: ModelSpec,
    pub seed: u64,
    /// Distinct training labels, ascending.
    pub classes: Vec<usize>,
    pub input_dim: usize,
    pub feature_space: FeatureSpace,
    /// Final full-data training loss, for the gradient-trained families.
    pub training_loss: Option<f64>,
    pub params: ModelParams<T>,
}

impl<T: Scalar> TrainedModel<T> {
    fn new(spec: ModelSpec, seed: u64, classes: Vec<usize>, input_dim: usize, params: ModelParams<T>) -> Self {
        TrainedModel {
            spec,
            seed,
            classes,
            input_dim,
            feature_space: FeatureSpace::Raw { dim: input_dim },
            training_loss: None,
            params,
        }
    }

    pub fn with_feature_space(mut self, space: FeatureSpace) -> Self {
        self.feature_space = space;
        self
    }

    pub fn family(&self) -> &'static str {
        self.spec.family()
    }

    fn check_dim(&self, x: &FeatureMatrix<T>) -> Result<()> {
        if x.n_cols() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: x.n_cols(),
            });
        }
        Ok(())
    }

    /// Class index (into `classes`) for one row.
    fn predict_index(&self, row: Row<'_, T>) -> usize {
        match &self.params {
            ModelParams::NaiveBayes(m) => argmax(&m.joint_log_likelihood(row)),
            ModelParams::Logreg(m) | ModelParams::LinearSvm(m) => argmax(&m.decision(row)),
            ModelParams::Knn(m) => m.predict_index(row),
            ModelParams::DecisionTree(m) => m.predict_index(row),
            ModelParams::Mlp(m) => argmax(&m.logits(row)),
            ModelParams::Constant => 0,
        }
    }

    pub fn predict(&self, x: &FeatureMatrix<T>) -> Result<Vec<usize>> {
        self.check_dim(x)?;
        Ok(x.rows().map(|r| self.classes[self.predict_index(r)]).collect())
    }

    /// Class probabilities (columns follow `classes`) for the probabilistic
    /// families; `None` for the others.
    pub fn predict_proba(&self, x: &FeatureMatrix<T>) -> Result<Option<Vec<Vec<T>>>> {
        self.check_dim(x)?;
        let f = |row: Row<'_, T>| -> Option<Vec<T>> {
            match &self.params {
                ModelParams::NaiveBayes(m) => Some(softmax(&m.joint_log_likelihood(row))),
                ModelParams::Logreg(m) => Some(softmax(&m.decision(row))),
                ModelParams::Mlp(m) => Some(softmax(&m.logits(row))),
                _ => None,
            }
        };
        Ok(x.rows().map(f).collect())
    }
}

/// Train the family named by `spec`.
pub fn fit<T: Scalar>(spec: &ModelSpec, x: &FeatureMatrix<T>, y: &[usize], seed: u64) -> Result<TrainedModel<T>> {
    spec.validate()?;
    match spec {
        ModelSpec::NaiveBayes(p) => train_naive_bayes(x, y, p.alpha),
        ModelSpec::Logreg(p) => train_logreg(x, y, p, seed),
        ModelSpec::Knn(p) => train_knn(x, y, p.k),
        ModelSpec::DecisionTree(p) => train_decision_tree(x, y, p),
        ModelSpec::LinearSvm(p) => train_linear_svm(x, y, p, seed),
        ModelSpec::Mlp(p) => train_mlp(x, y, p, seed),
    }
}

/// Free-function form of [`TrainedModel::predict`].
pub fn predict<T: Scalar>(model: &TrainedModel<T>, x: &FeatureMatrix<T>) -> Result<Vec<usize>> {
    model.predict(x)
}

/// Sorted distinct labels and each sample's index into them.
pub(crate) fn encode_labels<T>(x: &FeatureMatrix<T>, y: &[usize]) -> Result<(Vec<usize>, Vec<usize>)>
where
    T: Scalar,
{
    if x.n_rows() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let idx = y.iter().map(|l| classes.binary_search(l).unwrap()).collect();
    Ok((classes, idx))
}

/// First index of the maximum.
pub(crate) fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|z| (*z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Seeded shuffled mini-batches over `0..n`, one `Vec` per epoch.
pub(crate) struct BatchPlan {
    rng: ChaCha8Rng,
    order: Vec<usize>,
    batch: usize,
}

impl BatchPlan {
    pub(crate) fn new(n: usize, batch: usize, seed: u64) -> Self {
        BatchPlan {
            rng: ChaCha8Rng::seed_from_u64(seed),
            order: (0..n).collect(),
            batch: batch.max(1),
        }
    }

    pub(crate) fn epoch(&mut self) -> Vec<Vec<usize>> {
        self.order.shuffle(&mut self.rng);
        self.order.chunks(self.batch).map(<[usize]>::to_vec).collect()
    }
}
