//! Softmax regression and one-vs-rest linear SVM, both trained by
//! mini-batch (sub)gradient descent.

use serde::{Deserialize, Serialize};

use super::{encode_labels, softmax, BatchPlan, ModelParams, ModelSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::featurize::{FeatureMatrix, Row};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogregParams {
    pub l2: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
}

impl Default for LogregParams {
    fn default() -> Self {
        LogregParams {
            l2: 1e-4,
            lr: 0.5,
            epochs: 100,
            batch: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearSvmParams {
    pub c: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
}

impl Default for LinearSvmParams {
    fn default() -> Self {
        LinearSvmParams {
            c: 1.0,
            lr: 0.1,
            epochs: 50,
            batch: 32,
        }
    }
}

/// One weight row and bias per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel<T> {
    pub dim: usize,
    /// Row-major `[class][feature]`.
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> LinearModel<T> {
    fn zeros(n_classes: usize, dim: usize) -> Self {
        LinearModel {
            dim,
            weights: vec![T::zero(); n_classes * dim],
            bias: vec![T::zero(); n_classes],
        }
    }

    pub fn class_weights(&self, c: usize) -> &[T] {
        &self.weights[c * self.dim..(c + 1) * self.dim]
    }

    pub fn decision(&self, row: Row<'_, T>) -> Vec<T> {
        (0..self.bias.len())
            .map(|c| row.dot(self.class_weights(c)) + self.bias[c])
            .collect()
    }

    fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}

pub struct Objective<T> {
    pub loss: T,
    pub grad_weights: Vec<T>,
    pub grad_bias: Vec<T>,
}

/// Mean cross-entropy over `rows` plus `l2 / 2 * ||W||^2` (bias not
/// penalised), with its gradient.
pub fn softmax_objective<T: Scalar>(
    model: &LinearModel<T>,
    x: &FeatureMatrix<T>,
    rows: &[usize],
    targets: &[usize],
    l2: T,
) -> Objective<T> {
    let dim = model.dim;
    let mut grad_weights: Vec<T> = model.weights.iter().map(|w| *w * l2).collect();
    let mut grad_bias = vec![T::zero(); model.bias.len()];
    let half = T::of(0.5);
    let mut loss = half * l2 * model.weights.iter().map(|w| *w * *w).sum::<T>();
    let m = T::of_usize(rows.len().max(1));
    for &r in rows {
        let row = x.row(r);
        let p = softmax(&model.decision(row));
        let t = targets[r];
        loss -= p[t].ln() / m;
        for (c, pc) in p.iter().enumerate() {
            let delta = (*pc - if c == t { T::one() } else { T::zero() }) / m;
            grad_bias[c] += delta;
            let g = &mut grad_weights[c * dim..(c + 1) * dim];
            for (j, v) in row.iter() {
                g[j] += delta * v;
            }
        }
    }
    Objective {
        loss,
        grad_weights,
        grad_bias,
    }
}

/// Binary L2-regularised hinge objective
/// `lambda / 2 * ||w||^2 + mean(max(0, 1 - y (w.x + b)))` over `rows`, with
/// a subgradient. `signs[r]` is +1 or -1.
pub fn hinge_objective<T: Scalar>(
    weights: &[T],
    bias: T,
    x: &FeatureMatrix<T>,
    rows: &[usize],
    signs: &[T],
    lambda: T,
) -> (T, Vec<T>, T) {
    let half = T::of(0.5);
    let mut loss = half * lambda * weights.iter().map(|w| *w * *w).sum::<T>();
    let mut grad: Vec<T> = weights.iter().map(|w| *w * lambda).collect();
    let mut grad_bias = T::zero();
    let m = T::of_usize(rows.len().max(1));
    for &r in rows {
        let row = x.row(r);
        let margin = signs[r] * (row.dot(weights) + bias);
        if margin < T::one() {
            loss += (T::one() - margin) / m;
            let s = signs[r] / m;
            grad_bias -= s;
            for (j, v) in row.iter() {
                grad[j] -= s * v;
            }
        }
    }
    (loss, grad, grad_bias)
}

pub fn train_logreg<T: Scalar>(
    x: &FeatureMatrix<T>,
    y: &[usize],
    params: &LogregParams,
    seed: u64,
) -> Result<TrainedModel<T>> {
    let (classes, targets) = encode_labels(x, y)?;
    if classes.len() < 2 {
        return Err(Error::DegenerateLabels(
            "logistic regression needs at least 2 classes".into(),
        ));
    }
    let mut model = LinearModel::zeros(classes.len(), x.n_cols());
    let lr = T::of(params.lr);
    let l2 = T::of(params.l2);
    let diverged = || Error::Divergence { lr: params.lr };
    let mut plan = BatchPlan::new(x.n_rows(), params.batch, seed);
    for _ in 0..params.epochs {
        for batch in plan.epoch() {
            let obj = softmax_objective(&model, x, &batch, &targets, l2);
            if !obj.loss.is_finite() {
                return Err(diverged());
            }
            for (w, g) in model.weights.iter_mut().zip(&obj.grad_weights) {
                *w -= lr * *g;
            }
            for (b, g) in model.bias.iter_mut().zip(&obj.grad_bias) {
                *b -= lr * *g;
            }
        }
    }
    let all: Vec<usize> = (0..x.n_rows()).collect();
    let loss = softmax_objective(&model, x, &all, &targets, l2).loss;
    if !loss.is_finite() || !model.is_finite() {
        return Err(diverged());
    }
    let mut trained = TrainedModel::new(
        ModelSpec::Logreg(*params),
        seed,
        classes,
        x.n_cols(),
        ModelParams::Logreg(model),
    );
    trained.training_loss = Some(loss.as_f64());
    Ok(trained)
}

pub fn train_linear_svm<T: Scalar>(
    x: &FeatureMatrix<T>,
    y: &[usize],
    params: &LinearSvmParams,
    seed: u64,
) -> Result<TrainedModel<T>> {
    let (classes, targets) = encode_labels(x, y)?;
    let spec = ModelSpec::LinearSvm(*params);
    if classes.len() == 1 {
        return Ok(TrainedModel::new(
            spec,
            seed,
            classes,
            x.n_cols(),
            ModelParams::Constant,
        ));
    }
    let dim = x.n_cols();
    let n = x.n_rows();
    let lambda = T::of(1.0 / (params.c * n as f64));
    let lr = T::of(params.lr);
    let signs: Vec<Vec<T>> = (0..classes.len())
        .map(|c| {
            targets
                .iter()
                .map(|&t| if t == c { T::one() } else { -T::one() })
                .collect()
        })
        .collect();
    let mut model = LinearModel::zeros(classes.len(), dim);
    let mut plan = BatchPlan::new(n, params.batch, seed);
    let diverged = || Error::Divergence { lr: params.lr };
    for _ in 0..params.epochs {
        for batch in plan.epoch() {
            for (c, s) in signs.iter().enumerate() {
                let w = &model.weights[c * dim..(c + 1) * dim];
                let (loss, grad, grad_bias) = hinge_objective(w, model.bias[c], x, &batch, s, lambda);
                if !loss.is_finite() {
                    return Err(diverged());
                }
                for (w, g) in model.weights[c * dim..(c + 1) * dim].iter_mut().zip(&grad) {
                    *w -= lr * *g;
                }
                model.bias[c] -= lr * grad_bias;
            }
        }
    }
    if !model.is_finite() {
        return Err(diverged());
    }
    let all: Vec<usize> = (0..n).collect();
    let loss: T = signs
        .iter()
        .enumerate()
        .map(|(c, s)| hinge_objective(model.class_weights(c), model.bias[c], x, &all, s, lambda).0)
        .sum();
    let mut trained = TrainedModel::new(spec, seed, classes, dim, ModelParams::LinearSvm(model));
    trained.training_loss = Some(loss.as_f64());
    Ok(trained)
}
