use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A train/test partition of sample indices (both ascending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub ratio: f64,
    pub seed: u64,
}

fn by_class(labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    groups
}

/// Per-class seeded shuffle, then `round(ratio * n)` samples of each class
/// to train (at least one, and at most `n - 1` when the class has two or
/// more samples).
pub fn stratified_split(labels: &[usize], ratio: f64, seed: u64) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio must be in (0, 1), got {ratio}"
        )));
    }
    if labels.len() < 2 {
        return Err(Error::InvalidArgument("a split needs at least 2 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut members) in by_class(labels) {
        let n = members.len();
        members.shuffle(&mut rng);
        let n_train = if n == 1 {
            1
        } else {
            ((ratio * n as f64).round() as usize).clamp(1, n - 1)
        };
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train,
        test,
        ratio,
        seed,
    })
}

/// Stratified k-fold: each class is shuffled and dealt round-robin into
/// `folds` folds; split `i` tests on fold `i`.
pub fn stratified_kfold(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<Split>> {
    if folds < 2 || folds > labels.len() {
        return Err(Error::InvalidArgument(format!(
            "fold count must be in 2..={}, got {folds}",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    let mut next = 0usize;
    for (_, mut members) in by_class(labels) {
        members.shuffle(&mut rng);
        for m in members {
            assignment[m] = next % folds;
            next += 1;
        }
    }
    Ok((0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| assignment[i] == f);
            Split {
                train,
                test,
                ratio: 1.0 - 1.0 / folds as f64,
                seed,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_proportions() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let s = stratified_split(&labels, 0.8, 1).unwrap();
        assert_eq!(s.train.len(), 8);
        assert_eq!(s.test.len(), 2);
        assert_eq!(s.train.iter().filter(|&&i| labels[i] == 0).count(), 4);
        assert_eq!(s.test.iter().filter(|&&i| labels[i] == 1).count(), 1);
    }

    #[test]
    fn singleton_class_goes_to_train() {
        let labels = [0, 0, 0, 0, 7];
        let s = stratified_split(&labels, 0.5, 3).unwrap();
        assert!(s.train.contains(&4));
    }

    #[test]
    fn deterministic() {
        let labels: Vec<usize> = (0..50).map(|i| i % 4).collect();
        assert_eq!(
            stratified_split(&labels, 0.7, 9).unwrap(),
            stratified_split(&labels, 0.7, 9).unwrap()
        );
        assert_ne!(
            stratified_split(&labels, 0.7, 9).unwrap(),
            stratified_split(&labels, 0.7, 10).unwrap()
        );
    }

    #[test]
    fn bad_ratio() {
        assert!(stratified_split(&[0, 1], 1.0, 0).is_err());
        assert!(stratified_split(&[0, 1], 0.0, 0).is_err());
        assert!(stratified_split(&[0], 0.5, 0).is_err());
    }

    #[test]
    fn kfold_partitions() {
        let labels: Vec<usize> = (0..23).map(|i| i % 3).collect();
        let splits = stratified_kfold(&labels, 5, 2).unwrap();
        let mut seen = vec![0; 23];
        for s in &splits {
            for &t in &s.test {
                seen[t] += 1;
            }
            assert_eq!(s.train.len() + s.test.len(), 23);
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    proptest! {
        #[test]
        fn split_invariants(labels in prop::collection::vec(0usize..5, 2..80), ratio in 0.05f64..0.95, seed in any::<u64>()) {
            let s = stratified_split(&labels, ratio, seed).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for class in 0..5 {
                let n = labels.iter().filter(|&&l| l == class).count();
                if n < 2 { continue; }
                let in_train = s.train.iter().filter(|&&i| labels[i] == class).count();
                prop_assert!((in_train as f64 - ratio * n as f64).abs() <= 1.0);
            }
        }
    }
}
