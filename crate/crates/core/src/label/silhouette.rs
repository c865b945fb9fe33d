use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::{check_scores, distinct_weighted, kmeans_1d};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mean silhouette coefficient of a 1-D labelling.
///
/// Points in singleton clusters score 0. Returns 0 when there is only one
/// cluster.
pub fn mean_silhouette<T: Scalar>(values: &[T], labels: &[usize], k: usize) -> T {
    let n = values.len();
    if n == 0 || k < 2 {
        return T::zero();
    }
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let mut total = T::zero();
    let mut sums = vec![T::zero(); k];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = T::zero());
        for j in 0..n {
            if i != j {
                sums[labels[j]] += (values[i] - values[j]).abs();
            }
        }
        let own = labels[i];
        if sizes[own] <= 1 {
            continue;
        }
        let a = sums[own] / T::of_usize(sizes[own] - 1);
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / T::of_usize(sizes[c]))
            .fold(T::infinity(), T::min);
        let denom = a.max(b);
        if denom > T::zero() && b.is_finite() {
            total += (b - a) / denom;
        }
    }
    total / T::of_usize(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KDiagnostic<T> {
    pub k: usize,
    pub silhouette: T,
    pub sse: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection<T> {
    pub k: usize,
    pub diagnostics: Vec<KDiagnostic<T>>,
    pub warnings: Vec<String>,
}

/// Pick the number of clusters maximising the mean silhouette of the exact
/// partition, over `k_min..=k_max` capped at the number of distinct scores.
/// Ties go to the smaller k.
pub fn select_k<T: Scalar>(scores: &[T], k_min: usize, k_max: usize) -> Result<KSelection<T>> {
    check_scores(scores)?;
    if k_min < 2 || k_min > k_max {
        return Err(Error::InvalidArgument(format!(
            "k range must satisfy 2 <= k_min <= k_max, got {k_min}..{k_max}"
        )));
    }
    let distinct = distinct_weighted(scores).0.len();
    if distinct == 1 {
        return Ok(KSelection {
            k: 1,
            diagnostics: Vec::new(),
            warnings: vec!["all scores are equal; using a single cluster".into()],
        });
    }
    if distinct < k_min {
        return Ok(KSelection {
            k: distinct,
            diagnostics: Vec::new(),
            warnings: vec![format!(
                "only {distinct} distinct scores, fewer than k_min = {k_min}; using k = {distinct}"
            )],
        });
    }
    let upper = k_max.min(distinct);
    let diagnostics = (k_min..=upper)
        .into_par_iter()
        .map(|k| {
            let c = kmeans_1d(scores, k)?;
            Ok(KDiagnostic {
                k,
                silhouette: mean_silhouette(scores, &c.labels, k),
                sse: c.sse,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = &diagnostics[0];
    for d in &diagnostics[1..] {
        if d.silhouette > best.silhouette {
            best = d;
        }
    }
    let mut warnings = Vec::new();
    if upper < k_max {
        warnings.push(format!("k_max capped at {upper} distinct scores"));
    }
    Ok(KSelection {
        k: best.k,
        diagnostics,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Textbook silhouette over explicit cluster member lists.
    fn oracle(clusters: &[Vec<f64>]) -> f64 {
        let n: usize = clusters.iter().map(Vec::len).sum();
        let mut total = 0.0;
        for (ci, c) in clusters.iter().enumerate() {
            for (pi, &p) in c.iter().enumerate() {
                if c.len() == 1 {
                    continue;
                }
                let a = c
                    .iter()
                    .enumerate()
                    .filter(|(qi, _)| *qi != pi)
                    .map(|(_, q)| (p - q).abs())
                    .sum::<f64>()
                    / (c.len() - 1) as f64;
                let b = clusters
                    .iter()
                    .enumerate()
                    .filter(|(oi, _)| *oi != ci)
                    .map(|(_, o)| o.iter().map(|q| (p - q).abs()).sum::<f64>() / o.len() as f64)
                    .fold(f64::INFINITY, f64::min);
                total += (b - a) / a.max(b);
            }
        }
        total / n as f64
    }

    #[test]
    fn matches_oracle_on_hand_instance() {
        let xs = [0.0, 1.0, 2.0, 50.0, 51.0, 52.0];
        let s = mean_silhouette(&xs, &[0, 0, 0, 1, 1, 1], 2);
        let expected = oracle(&[vec![0.0, 1.0, 2.0], vec![50.0, 51.0, 52.0]]);
        assert_abs_diff_eq!(s, expected, epsilon = 1e-12);
        let s3 = mean_silhouette(&xs, &[0, 0, 1, 2, 2, 2], 3);
        let e3 = oracle(&[vec![0.0, 1.0], vec![2.0], vec![50.0, 51.0, 52.0]]);
        assert_abs_diff_eq!(s3, e3, epsilon = 1e-12);
    }

    #[test]
    fn two_groups_select_two() {
        let xs = [0.0, 1.0, 2.0, 50.0, 51.0, 52.0];
        let sel = select_k(&xs, 2, 5).unwrap();
        // oracle values over the exact partitions
        let s2 = oracle(&[vec![0.0, 1.0, 2.0], vec![50.0, 51.0, 52.0]]);
        assert_abs_diff_eq!(sel.diagnostics[0].silhouette, s2, epsilon = 1e-12);
        assert_eq!(sel.k, 2);
        assert_eq!(sel.diagnostics.len(), 4);
    }

    #[test]
    fn six_groups_select_six() {
        let mut xs = Vec::new();
        for g in 0..6 {
            let c = 100.0 * g as f64;
            xs.extend([c - 1.0, c, c + 1.0]);
        }
        let sel = select_k(&xs, 2, 10).unwrap();
        assert_eq!(sel.k, 6);
        let six = sel.diagnostics.iter().find(|d| d.k == 6).unwrap();
        let groups: Vec<Vec<f64>> = xs.chunks(3).map(|c| c.to_vec()).collect();
        assert_abs_diff_eq!(six.silhouette, oracle(&groups), epsilon = 1e-12);
    }

    #[test]
    fn constant_scores_give_one_cluster() {
        let sel = select_k(&[55.0; 7], 2, 10).unwrap();
        assert_eq!(sel.k, 1);
        assert_eq!(sel.warnings.len(), 1);
    }

    #[test]
    fn bad_range() {
        assert!(select_k(&[1.0, 2.0], 1, 3).is_err());
        assert!(select_k(&[1.0, 2.0], 4, 3).is_err());
    }
}
