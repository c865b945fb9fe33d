//! One-hidden-layer ReLU network with a softmax output.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{encode_labels, softmax, BatchPlan, ModelParams, ModelSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::featurize::{FeatureMatrix, Row};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpParams {
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 128,
            lr: 0.3,
            epochs: 200,
            batch: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp<T> {
    pub input_dim: usize,
    pub hidden: usize,
    pub n_classes: usize,
    /// `[hidden][input]`
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    /// `[class][hidden]`
    pub w2: Vec<T>,
    pub b2: Vec<T>,
}

impl<T: Scalar> Mlp<T> {
    /// Glorot-uniform weights, zero biases.
    pub fn init(input_dim: usize, hidden: usize, n_classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layer = |fan_in: usize, fan_out: usize| -> Vec<T> {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            (0..fan_in * fan_out).map(|_| T::of(dist.sample(&mut rng))).collect()
        };
        let w1 = layer(input_dim, hidden);
        let w2 = layer(hidden, n_classes);
        Mlp {
            input_dim,
            hidden,
            n_classes,
            w1,
            b1: vec![T::zero(); hidden],
            w2,
            b2: vec![T::zero(); n_classes],
        }
    }

    /// Hidden pre-activations.
    fn pre_activation(&self, row: Row<'_, T>) -> Vec<T> {
        let mut z = self.b1.clone();
        for (j, v) in row.iter() {
            for (h, zh) in z.iter_mut().enumerate() {
                *zh += self.w1[h * self.input_dim + j] * v;
            }
        }
        z
    }

    fn output(&self, hidden: &[T]) -> Vec<T> {
        (0..self.n_classes)
            .map(|c| {
                let w = &self.w2[c * self.hidden..(c + 1) * self.hidden];
                self.b2[c] + w.iter().zip(hidden).map(|(a, b)| *a * *b).sum::<T>()
            })
            .collect()
    }

    pub fn logits(&self, row: Row<'_, T>) -> Vec<T> {
        let h: Vec<T> = self.pre_activation(row).into_iter().map(|z| z.max(T::zero())).collect();
        self.output(&h)
    }

    fn params_finite(&self) -> bool {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .all(|v| v.is_finite())
    }
}

/// Gradient of the mean cross-entropy, laid out like [`Mlp`]. `w1` is
/// dense but only columns listed in `touched` can be non-zero.
pub struct MlpGradient<T> {
    pub loss: T,
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    pub w2: Vec<T>,
    pub b2: Vec<T>,
    pub touched: Vec<usize>,
}

/// Mean cross-entropy over `rows` and its backpropagated gradient.
pub fn mlp_objective<T: Scalar>(
    net: &Mlp<T>,
    x: &FeatureMatrix<T>,
    rows: &[usize],
    targets: &[usize],
) -> MlpGradient<T> {
    let mut g = MlpGradient {
        loss: T::zero(),
        w1: vec![T::zero(); net.w1.len()],
        b1: vec![T::zero(); net.hidden],
        w2: vec![T::zero(); net.w2.len()],
        b2: vec![T::zero(); net.n_classes],
        touched: Vec::new(),
    };
    accumulate(net, x, rows, targets, &mut g);
    g
}

fn accumulate<T: Scalar>(
    net: &Mlp<T>,
    x: &FeatureMatrix<T>,
    rows: &[usize],
    targets: &[usize],
    g: &mut MlpGradient<T>,
) {
    let m = T::of_usize(rows.len().max(1));
    let mut seen = vec![false; net.input_dim];
    for &r in rows {
        let row = x.row(r);
        let pre = net.pre_activation(row);
        let h: Vec<T> = pre.iter().map(|z| z.max(T::zero())).collect();
        let p = softmax(&net.output(&h));
        let t = targets[r];
        g.loss -= p[t].ln() / m;
        let mut dh = vec![T::zero(); net.hidden];
        for c in 0..net.n_classes {
            let delta = (p[c] - if c == t { T::one() } else { T::zero() }) / m;
            g.b2[c] += delta;
            let w2 = &net.w2[c * net.hidden..(c + 1) * net.hidden];
            let g2 = &mut g.w2[c * net.hidden..(c + 1) * net.hidden];
            for k in 0..net.hidden {
                g2[k] += delta * h[k];
                dh[k] += delta * w2[k];
            }
        }
        for k in 0..net.hidden {
            if pre[k] <= T::zero() {
                dh[k] = T::zero();
            }
            g.b1[k] += dh[k];
        }
        for (j, v) in row.iter() {
            if !seen[j] {
                seen[j] = true;
                g.touched.push(j);
            }
            for k in 0..net.hidden {
                g.w1[k * net.input_dim + j] += dh[k] * v;
            }
        }
    }
}

pub fn train_mlp<T: Scalar>(
    x: &FeatureMatrix<T>,
    y: &[usize],
    params: &MlpParams,
    seed: u64,
) -> Result<TrainedModel<T>> {
    let (classes, targets) = encode_labels(x, y)?;
    if classes.len() < 2 {
        return Err(Error::DegenerateLabels("the network needs at least 2 classes".into()));
    }
    if params.hidden == 0 {
        return Err(Error::InvalidArgument("hidden must be >= 1".into()));
    }
    let dim = x.n_cols();
    let mut net = Mlp::init(dim, params.hidden, classes.len(), seed);
    let lr = T::of(params.lr);
    let diverged = || Error::Divergence { lr: params.lr };
    // a different stream from the initialisation
    let mut plan = BatchPlan::new(x.n_rows(), params.batch, seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut g = mlp_objective(&net, x, &[], &targets);
    for _ in 0..params.epochs {
        for batch in plan.epoch() {
            g.loss = T::zero();
            accumulate(&net, x, &batch, &targets, &mut g);
            if !g.loss.is_finite() {
                return Err(diverged());
            }
            for &j in &g.touched {
                for k in 0..net.hidden {
                    let idx = k * dim + j;
                    net.w1[idx] -= lr * g.w1[idx];
                    g.w1[idx] = T::zero();
                }
            }
            g.touched.clear();
            for (w, d) in net.b1.iter_mut().zip(g.b1.iter_mut()) {
                *w -= lr * *d;
                *d = T::zero();
            }
            for (w, d) in net.w2.iter_mut().zip(g.w2.iter_mut()) {
                *w -= lr * *d;
                *d = T::zero();
            }
            for (w, d) in net.b2.iter_mut().zip(g.b2.iter_mut()) {
                *w -= lr * *d;
                *d = T::zero();
            }
        }
    }
    let all: Vec<usize> = (0..x.n_rows()).collect();
    let loss = mlp_objective(&net, x, &all, &targets).loss;
    if !loss.is_finite() || !net.params_finite() {
        return Err(diverged());
    }
    let mut trained = TrainedModel::new(ModelSpec::Mlp(*params), seed, classes, dim, ModelParams::Mlp(net));
    trained.training_loss = Some(loss.as_f64());
    Ok(trained)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    fn xor() -> (FeatureMatrix<f64>, Vec<usize>) {
        let x = FeatureMatrix::from_rows(vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        (x, vec![0, 1, 1, 0])
    }

    #[test]
    fn learns_xor() {
        let (x, y) = xor();
        let params = MlpParams {
            hidden: 8,
            ..Default::default()
        };
        let m = train_mlp(&x, &y, &params, 0).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn zero_epochs_is_seed_deterministic() {
        let (x, y) = xor();
        let params = MlpParams {
            hidden: 4,
            epochs: 0,
            ..Default::default()
        };
        let a = train_mlp(&x, &y, &params, 3).unwrap();
        let b = train_mlp(&x, &y, &params, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.predict_proba(&x).unwrap(), b.predict_proba(&x).unwrap());
        let c = train_mlp(&x, &y, &params, 4).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn init_within_glorot_bounds() {
        let net: Mlp<f64> = Mlp::init(10, 6, 3, 1);
        let l1 = (6.0f64 / 16.0).sqrt();
        let l2 = (6.0f64 / 9.0).sqrt();
        assert!(net.w1.iter().all(|w| w.abs() <= l1));
        assert!(net.w2.iter().all(|w| w.abs() <= l2));
        assert!(net.b1.iter().chain(&net.b2).all(|b| *b == 0.0));
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let x = random_dense(6, 3, 31);
        let targets = vec![0, 1, 2, 1, 0, 2];
        let net: Mlp<f64> = Mlp::init(3, 5, 3, 77);
        let rows: Vec<usize> = (0..6).collect();
        let g = mlp_objective(&net, &x, &rows, &targets);
        let flat: Vec<f64> = [&net.w1, &net.b1, &net.w2, &net.b2]
            .into_iter()
            .flatten()
            .copied()
            .collect();
        let (n1, n2, n3) = (net.w1.len(), net.b1.len(), net.w2.len());
        let numeric = numeric_gradient(&flat, |p| {
            let mut probe = net.clone();
            probe.w1 = p[..n1].to_vec();
            probe.b1 = p[n1..n1 + n2].to_vec();
            probe.w2 = p[n1 + n2..n1 + n2 + n3].to_vec();
            probe.b2 = p[n1 + n2 + n3..].to_vec();
            mlp_objective(&probe, &x, &rows, &targets).loss
        });
        let analytic: Vec<f64> = [&g.w1, &g.b1, &g.w2, &g.b2].into_iter().flatten().copied().collect();
        assert!(max_rel_error(&analytic, &numeric) < 1e-4);
    }
}
