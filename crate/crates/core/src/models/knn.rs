use serde::{Deserialize, Serialize};

use super::{encode_labels, KnnParams, ModelParams, ModelSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::featurize::{FeatureMatrix, Row};
use crate::scalar::Scalar;

/// Stored training rows for cosine k-nearest-neighbour voting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn<T> {
    pub k: usize,
    pub train: FeatureMatrix<T>,
    pub norms: Vec<T>,
    /// Class index of each training row.
    pub targets: Vec<usize>,
    pub n_classes: usize,
}

/// `1 - cos(a, b)`; vectors with zero norm are at distance 1 from everything.
pub fn cosine_distance<T: Scalar>(dot: T, norm_a: T, norm_b: T) -> T {
    if norm_a == T::zero() || norm_b == T::zero() {
        T::one()
    } else {
        T::one() - dot / (norm_a * norm_b)
    }
}

impl<T: Scalar> Knn<T> {
    /// Training rows sorted by (distance, row index), nearest first.
    pub fn neighbours(&self, row: Row<'_, T>) -> Vec<(T, usize)> {
        let query = row.to_dense(self.train.n_cols());
        let norm = row.norm();
        let mut dist: Vec<(T, usize)> = self
            .train
            .rows()
            .enumerate()
            .map(|(i, r)| (cosine_distance(r.dot(&query), norm, self.norms[i]), i))
            .collect();
        dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        dist
    }

    pub fn predict_index(&self, row: Row<'_, T>) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for (_, i) in self.neighbours(row).into_iter().take(self.k) {
            votes[self.targets[i]] += 1;
        }
        let mut best = 0;
        for c in 1..self.n_classes {
            if votes[c] > votes[best] {
                best = c;
            }
        }
        best
    }
}

pub fn train_knn<T: Scalar>(x: &FeatureMatrix<T>, y: &[usize], k: usize) -> Result<TrainedModel<T>> {
    let (classes, targets) = encode_labels(x, y)?;
    if k == 0 || k > x.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "knn k = {k} must be in 1..={} (training rows)",
            x.n_rows()
        )));
    }
    let knn = Knn {
        k,
        norms: x.rows().map(Row::norm).collect(),
        train: x.clone(),
        targets,
        n_classes: classes.len(),
    };
    Ok(TrainedModel::new(
        ModelSpec::Knn(KnnParams { k }),
        0,
        classes,
        x.n_cols(),
        ModelParams::Knn(knn),
    ))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    #[test]
    fn k1_recovers_training_labels() {
        let x = random_dense(25, 4, 12);
        let y: Vec<usize> = (0..25).map(|i| (i * 5) % 4).collect();
        let m = train_knn(&x, &y, 1).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn k_all_rows_is_majority_with_low_tie_break() {
        let x = random_dense(6, 3, 1);
        let m = train_knn(&x, &[2, 2, 5, 5, 5, 1], 6).unwrap();
        assert_eq!(m.predict(&random_dense(4, 3, 2)).unwrap(), vec![5; 4]);
        let tied = train_knn(&x, &[2, 2, 5, 5, 1, 1], 6).unwrap();
        assert_eq!(tied.predict(&x).unwrap(), vec![1; 6]);
    }

    #[test]
    fn neighbours_match_brute_force() {
        let train: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 2.0], vec![-1.0, 0.5]];
        let x = FeatureMatrix::from_rows(train.clone()).unwrap();
        let m = train_knn(&x, &[0, 0, 1, 1], 3).unwrap();
        let ModelParams::Knn(knn) = &m.params else {
            unreachable!()
        };
        let q = [2.0f64, 1.0];
        let mut oracle: Vec<(f64, usize)> = train
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let dot = t[0] * q[0] + t[1] * q[1];
                let na = (t[0] * t[0] + t[1] * t[1]).sqrt();
                let nb = (q[0] * q[0] + q[1] * q[1]).sqrt();
                (1.0 - dot / (na * nb), i)
            })
            .collect();
        oracle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let qm = FeatureMatrix::from_rows(vec![q.to_vec()]).unwrap();
        let got = knn.neighbours(qm.row(0));
        assert_eq!(got.iter().map(|p| p.1).collect::<Vec<_>>(), vec![1, 0, 2, 3]);
        for (g, o) in got.iter().zip(&oracle) {
            assert_eq!(g.1, o.1);
            assert!((g.0 - o.0).abs() < 1e-12);
        }
        // two of the three nearest are class 0
        assert_eq!(m.predict(&qm).unwrap(), vec![0]);
    }

    #[test]
    fn k_larger_than_rows() {
        let x = random_dense(3, 2, 0);
        assert!(train_knn(&x, &[0, 1, 0], 4).is_err());
    }
}
