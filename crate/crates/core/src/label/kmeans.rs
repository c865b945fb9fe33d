use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Optimal partition of a list of scores into `k` contiguous clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering<T> {
    pub k: usize,
    /// Cluster means, ascending; cluster id = position.
    pub centroids: Vec<T>,
    /// `k - 1` cut points, each halfway between neighbouring clusters.
    pub boundaries: Vec<T>,
    /// Cluster id of each input score, aligned with the input order.
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Total within-cluster sum of squared deviations.
    pub sse: T,
}

impl<T: Scalar> Clustering<T> {
    /// Cluster of an arbitrary score, by the boundary cut points.
    pub fn cluster_of(&self, score: T) -> usize {
        self.boundaries.iter().take_while(|&&b| score > b).count()
    }
}

/// Distinct sorted values with their multiplicities.
pub(crate) fn distinct_weighted<T: Scalar>(scores: &[T]) -> (Vec<T>, Vec<usize>) {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let mut values: Vec<T> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for x in sorted {
        match values.last() {
            Some(&last) if last == x => *counts.last_mut().unwrap() += 1,
            _ => {
                values.push(x);
                counts.push(1);
            }
        }
    }
    (values, counts)
}

pub(crate) fn check_scores<T: Scalar>(scores: &[T]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::Empty("scores"));
    }
    if scores.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("scores must be finite".into()));
    }
    Ok(())
}

/// Globally optimal 1-D k-means by dynamic programming.
///
/// Works on the distinct sorted values weighted by multiplicity, so equal
/// scores always land in the same cluster. Cost is O(k * d^2) for `d`
/// distinct values.
pub fn kmeans_1d<T: Scalar>(scores: &[T], k: usize) -> Result<Clustering<T>> {
    check_scores(scores)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let (values, counts) = distinct_weighted(scores);
    let d = values.len();
    if k > d {
        return Err(Error::KTooLarge { k, distinct: d });
    }

    // centre the data so the prefix-sum cost formula loses less precision
    let n = T::of_usize(scores.len());
    let shift = scores.iter().copied().sum::<T>() / n;
    let mut w = vec![T::zero(); d + 1];
    let mut s = vec![T::zero(); d + 1];
    let mut q = vec![T::zero(); d + 1];
    for i in 0..d {
        let c = T::of_usize(counts[i]);
        let x = values[i] - shift;
        w[i + 1] = w[i] + c;
        s[i + 1] = s[i] + c * x;
        q[i + 1] = q[i] + c * x * x;
    }
    let cost = |from: usize, to: usize| -> T {
        let ww = w[to + 1] - w[from];
        let ss = s[to + 1] - s[from];
        let qq = q[to + 1] - q[from];
        (qq - ss * ss / ww).max(T::zero())
    };

    // best[m][j]: min cost of splitting values[0..=j] into m + 1 clusters
    // start[m][j]: first index of the last of those clusters
    let mut best = vec![vec![T::infinity(); d]; k];
    let mut start = vec![vec![0usize; d]; k];
    for j in 0..d {
        best[0][j] = cost(0, j);
    }
    for m in 1..k {
        for j in m..d {
            let mut best_cost = T::infinity();
            let mut best_start = m;
            for i in m..=j {
                let c = best[m - 1][i - 1] + cost(i, j);
                if c < best_cost {
                    best_cost = c;
                    best_start = i;
                }
            }
            best[m][j] = best_cost;
            start[m][j] = best_start;
        }
    }

    let mut segments = Vec::with_capacity(k);
    let mut end = d - 1;
    for m in (0..k).rev() {
        let first = if m == 0 { 0 } else { start[m][end] };
        segments.push((first, end));
        if m > 0 {
            end = first - 1;
        }
    }
    segments.reverse();

    Ok(from_segments(scores, &values, &counts, &segments))
}

fn from_segments<T: Scalar>(
    scores: &[T],
    values: &[T],
    counts: &[usize],
    segments: &[(usize, usize)],
) -> Clustering<T> {
    let k = segments.len();
    let mut centroids = Vec::with_capacity(k);
    let mut sizes = Vec::with_capacity(k);
    let mut sse = T::zero();
    for &(a, b) in segments {
        let size: usize = counts[a..=b].iter().sum();
        let total: T = (a..=b).map(|i| T::of_usize(counts[i]) * values[i]).sum();
        let mean = total / T::of_usize(size);
        sse += (a..=b)
            .map(|i| T::of_usize(counts[i]) * (values[i] - mean).powi(2))
            .sum::<T>();
        centroids.push(mean);
        sizes.push(size);
    }
    let half = T::of(0.5);
    let boundaries = segments
        .windows(2)
        .map(|pair| (values[pair[0].1] + values[pair[1].0]) * half)
        .collect();
    let labels = scores
        .iter()
        .map(|x| {
            let pos = values
                .binary_search_by(|v| v.partial_cmp(x).unwrap())
                .expect("score is one of the distinct values");
            segments.iter().position(|&(_, b)| pos <= b).unwrap()
        })
        .collect();
    Clustering {
        k,
        centroids,
        boundaries,
        labels,
        sizes,
        sse,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Minimum SSE over every split of the sorted list into `k` non-empty
    /// contiguous runs, plus the run lengths achieving it.
    fn brute_force(scores: &[f64], k: usize) -> (f64, Vec<usize>) {
        let mut sorted = scores.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        let mut best = (f64::INFINITY, Vec::new());
        // choose k-1 cut positions among 1..n
        fn rec(sorted: &[f64], k: usize, from: usize, cuts: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
            let n = sorted.len();
            if cuts.len() == k - 1 {
                let mut bounds = vec![0];
                bounds.extend(cuts.iter().copied());
                bounds.push(n);
                let mut sse = 0.0;
                let mut lens = Vec::new();
                for w in bounds.windows(2) {
                    let part = &sorted[w[0]..w[1]];
                    let mean = part.iter().sum::<f64>() / part.len() as f64;
                    sse += part.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
                    lens.push(part.len());
                }
                if sse < best.0 {
                    *best = (sse, lens);
                }
                return;
            }
            for c in from..n {
                cuts.push(c);
                rec(sorted, k, c + 1, cuts, best);
                cuts.pop();
            }
        }
        let _ = n;
        rec(&sorted, k, 1, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn obvious_separation() {
        let c = kmeans_1d(&[1.0, 2.0, 100.0, 101.0], 2).unwrap();
        assert_eq!(c.labels, vec![0, 0, 1, 1]);
        assert_eq!(c.centroids, vec![1.5, 100.5]);
        assert_eq!(c.boundaries, vec![51.0]);
        assert_abs_diff_eq!(c.sse, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_cluster_sse() {
        let xs = [3.0, 7.0, 1.0, 9.5];
        let c = kmeans_1d(&xs, 1).unwrap();
        let mean = xs.iter().sum::<f64>() / 4.0;
        let sse: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        assert_abs_diff_eq!(c.sse, sse, epsilon = 1e-12);
        assert!(c.boundaries.is_empty());
    }

    #[test]
    fn three_groups_match_brute_force() {
        let xs = [1.0, 2.0, 3.0, 10.0, 11.0, 12.0, 30.0];
        let (oracle_sse, oracle_lens) = brute_force(&xs, 3);
        assert_eq!(oracle_lens, vec![3, 3, 1]);
        let c = kmeans_1d(&xs, 3).unwrap();
        assert_eq!(c.labels, vec![0, 0, 0, 1, 1, 1, 2]);
        assert_eq!(c.sizes, oracle_lens);
        assert_abs_diff_eq!(c.sse, oracle_sse, epsilon = 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(kmeans_1d::<f64>(&[], 1), Err(Error::Empty(_))));
        assert!(matches!(
            kmeans_1d(&[1.0, 1.0, 2.0], 3),
            Err(Error::KTooLarge { k: 3, distinct: 2 })
        ));
        assert!(kmeans_1d(&[1.0], 0).is_err());
    }

    #[test]
    fn runs_on_f32() {
        let c = kmeans_1d(&[1.0f32, 2.0, 100.0, 101.0], 2).unwrap();
        assert_eq!(c.centroids, vec![1.5f32, 100.5]);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, usize)> {
        prop::collection::vec(0u32..60, 1..13).prop_flat_map(|raw| {
            let xs: Vec<f64> = raw.iter().map(|&v| v as f64 * 0.75).collect();
            let (distinct, _) = distinct_weighted(&xs);
            let kmax = distinct.len().min(4);
            (Just(xs), 1..=kmax)
        })
    }

    proptest! {
        #[test]
        fn exact_against_enumeration((xs, k) in instance()) {
            let c = kmeans_1d(&xs, k).unwrap();
            let (oracle, _) = brute_force(&xs, k);
            prop_assert!((c.sse - oracle).abs() <= 1e-9, "{} vs {}", c.sse, oracle);
        }

        #[test]
        fn clusters_are_contiguous((xs, k) in instance()) {
            let c = kmeans_1d(&xs, k).unwrap();
            for id in 0..k - 1 {
                let hi = xs.iter().zip(&c.labels).filter(|(_, &l)| l == id).map(|(x, _)| *x).fold(f64::MIN, f64::max);
                let lo = xs.iter().zip(&c.labels).filter(|(_, &l)| l == id + 1).map(|(x, _)| *x).fold(f64::MAX, f64::min);
                prop_assert!(hi < lo);
                prop_assert!(c.centroids[id] < c.centroids[id + 1]);
            }
        }

        #[test]
        fn permutation_invariant((xs, k) in instance(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = xs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = kmeans_1d(&xs, k).unwrap();
            let b = kmeans_1d(&shuffled, k).unwrap();
            prop_assert_eq!(&a.centroids, &b.centroids);
            prop_assert_eq!(&a.boundaries, &b.boundaries);
            prop_assert_eq!(a.sse, b.sse);
            for (x, l) in shuffled.iter().zip(&b.labels) {
                prop_assert_eq!(a.cluster_of(*x), *l);
            }
        }

        #[test]
        fn sse_monotone_in_k((xs, _) in instance()) {
            let (distinct, _) = distinct_weighted(&xs);
            let mut prev = f64::INFINITY;
            for k in 1..=distinct.len() {
                let sse = kmeans_1d(&xs, k).unwrap().sse;
                prop_assert!(sse <= prev + 1e-9);
                prev = sse;
            }
        }
    }
}
