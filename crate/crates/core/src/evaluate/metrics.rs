use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Single-label multiclass scores over a fixed class list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub classes: Vec<usize>,
    pub accuracy: f64,
    pub micro_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[true][predicted]`, indexed like `classes`.
    pub confusion: Vec<Vec<usize>>,
    /// Scores defined as 0 because their denominator was 0, as
    /// `"<metric>:<class>"`.
    pub zero_division: Vec<String>,
}

fn ratio(num: usize, den: usize, what: &str, class: usize, flags: &mut Vec<String>) -> f64 {
    if den == 0 {
        flags.push(format!("{what}:{class}"));
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(y_true: &[usize], y_pred: &[usize], classes: &[usize]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidArgument(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let pos = |l: usize| {
        classes
            .iter()
            .position(|&c| c == l)
            .ok_or_else(|| Error::InvalidArgument(format!("label {l} is not in the class list")))
    };
    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (t, p) in y_true.iter().zip(y_pred) {
        confusion[pos(*t)?][pos(*p)?] += 1;
    }
    let total = y_true.len();
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let mut flags = Vec::new();
    let accuracy = ratio(correct, total, "accuracy", 0, &mut flags);

    let mut per_class = Vec::with_capacity(k);
    for (i, &class) in classes.iter().enumerate() {
        let tp = confusion[i][i];
        let support: usize = confusion[i].iter().sum();
        let predicted: usize = (0..k).map(|r| confusion[r][i]).sum();
        let precision = ratio(tp, predicted, "precision", class, &mut flags);
        let recall = ratio(tp, support, "recall", class, &mut flags);
        let f1 = if precision + recall == 0.0 {
            flags.push(format!("f1:{class}"));
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            class,
            precision,
            recall,
            f1,
            support,
        });
    }

    let mean = |f: fn(&ClassMetrics) -> f64| {
        if k == 0 {
            0.0
        } else {
            per_class.iter().map(f).sum::<f64>() / k as f64
        }
    };
    let weighted = |f: fn(&ClassMetrics) -> f64| {
        if total == 0 {
            0.0
        } else {
            per_class.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / total as f64
        }
    };

    // micro precision = micro recall = accuracy for single-label data
    let micro_f1 = accuracy;
    Ok(Metrics {
        classes: classes.to_vec(),
        accuracy,
        micro_f1,
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        weighted_precision: weighted(|m| m.precision),
        weighted_recall: weighted(|m| m.recall),
        weighted_f1: weighted(|m| m.f1),
        per_class,
        confusion,
        zero_division: flags,
    })
}

/// Micro-averaged F1 from pooled TP/FP/FN counts; an independent route to
/// the quantity reported as `micro_f1`.
pub fn micro_f1_from_counts(y_true: &[usize], y_pred: &[usize], classes: &[usize]) -> f64 {
    let (mut tp, mut fp, mut fnn) = (0usize, 0usize, 0usize);
    for &c in classes {
        for (t, p) in y_true.iter().zip(y_pred) {
            match (*t == c, *p == c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fnn += 1,
                _ => {}
            }
        }
    }
    let p = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let r = if tp + fnn == 0 {
        0.0
    } else {
        tp as f64 / (tp + fnn) as f64
    };
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}
