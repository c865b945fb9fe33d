//! Text features: tokens, word/char n-grams, ranked vocabularies,
//! count/TF-IDF vectors, pooled embeddings and the one-hot category block.

mod embeddings;
mod matrix;
mod text;
mod vocab;

use serde::{Deserialize, Serialize};

pub use embeddings::{embed_event, load_embeddings, EmbeddingTable, LoadedEmbeddings};
pub use matrix::{FeatureMatrix, Row, Rows, SparseVec};
pub use text::{char_ngrams, normalize_text, tokenize, word_ngrams};
pub use vocab::{build_vocab, NgramKind, NgramSpec, Vocabulary};

use crate::categorize::CategoryLabel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Counts,
    #[default]
    Tfidf,
}

/// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
pub fn idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Encode one document's n-grams against `vocab`. Out-of-vocabulary
/// n-grams are ignored; TF-IDF vectors are L2-normalized.
pub fn vectorize<T: Scalar, S: AsRef<str>>(ngrams: &[S], vocab: &Vocabulary, weighting: Weighting) -> SparseVec<T> {
    let pairs = ngrams
        .iter()
        .filter_map(|g| vocab.index_of(g.as_ref()))
        .map(|i| (i, T::one()))
        .collect();
    let mut v = SparseVec::from_pairs(pairs);
    if weighting == Weighting::Tfidf {
        for (i, x) in v.indices.iter().zip(v.values.iter_mut()) {
            *x *= T::of(idf(vocab.n_docs, vocab.df[*i]));
        }
        let norm = v.values.iter().map(|x| *x * *x).sum::<T>().sqrt();
        if norm > T::zero() {
            v.values.iter_mut().for_each(|x| *x /= norm);
        }
    }
    v
}

fn category_index(category: CategoryLabel, label_set: &[CategoryLabel]) -> Result<usize> {
    label_set
        .iter()
        .position(|c| *c == category)
        .ok_or_else(|| Error::UnknownCategory(category.to_string()))
}

/// Append a one-hot block over `label_set` to a dense vector.
pub fn append_category_feature<T: Scalar>(
    vector: &[T],
    category: CategoryLabel,
    label_set: &[CategoryLabel],
) -> Result<Vec<T>> {
    let at = category_index(category, label_set)?;
    let mut out = Vec::with_capacity(vector.len() + label_set.len());
    out.extend_from_slice(vector);
    out.extend((0..label_set.len()).map(|i| if i == at { T::one() } else { T::zero() }));
    Ok(out)
}

/// Sparse counterpart of [`append_category_feature`]; `base_dim` is the
/// width of `vector`'s space.
pub fn append_category_sparse<T: Scalar>(
    vector: &SparseVec<T>,
    base_dim: usize,
    category: CategoryLabel,
    label_set: &[CategoryLabel],
) -> Result<SparseVec<T>> {
    let at = category_index(category, label_set)?;
    let mut out = vector.clone();
    out.indices.push(base_dim + at);
    out.values.push(T::one());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spec() -> NgramSpec {
        NgramSpec::new(NgramKind::Word, 1, 1).unwrap()
    }

    fn docs(items: &[&[&str]]) -> Vec<Vec<String>> {
        items
            .iter()
            .map(|d| d.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn counts_mode() {
        let vocab = build_vocab(&docs(&[&["a", "a", "a", "b", "b", "c"]]), spec(), 10).unwrap();
        let v: SparseVec<f64> = vectorize(&["a", "a", "b", "zzz"], &vocab, Weighting::Counts);
        assert_eq!(v.to_dense(3), vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn all_oov_is_zero() {
        let vocab = build_vocab(&docs(&[&["a"]]), spec(), 10).unwrap();
        for w in [Weighting::Counts, Weighting::Tfidf] {
            let v: SparseVec<f64> = vectorize(&["q", "r"], &vocab, w);
            assert_eq!(v.nnz(), 0);
        }
    }

    #[test]
    fn tfidf_matches_hand_computation() {
        let corpus = docs(&[&["a"], &["a", "b"]]);
        let vocab = build_vocab(&corpus, spec(), 10).unwrap();
        let v: SparseVec<f64> = vectorize(&corpus[1], &vocab, Weighting::Tfidf);
        // N = 2; df(a) = 2 -> idf 1; df(b) = 1 -> idf ln(3/2) + 1
        let idf_b = (1.5f64).ln() + 1.0;
        let norm = (1.0 + idf_b * idf_b).sqrt();
        let dense = v.to_dense(2);
        assert_abs_diff_eq!(dense[0], 1.0 / norm, epsilon = 1e-15);
        assert_abs_diff_eq!(dense[1], idf_b / norm, epsilon = 1e-15);
        assert_abs_diff_eq!(dense[1], 0.8148024746671689, epsilon = 1e-12);
        assert_abs_diff_eq!(dense[0], 0.5797386715376657, epsilon = 1e-12);
    }

    #[test]
    fn category_block() {
        use CategoryLabel::*;
        let set = [Arts, Business, Sports];
        assert_eq!(
            append_category_feature(&[0.3, 0.4], Business, &set).unwrap(),
            vec![0.3, 0.4, 0.0, 1.0, 0.0]
        );
        assert_eq!(
            append_category_feature(&[0.3, 0.4], Arts, &set).unwrap()[2..],
            [1.0, 0.0, 0.0]
        );
        assert!(matches!(
            append_category_feature(&[0.3, 0.4], Science, &set),
            Err(Error::UnknownCategory(_))
        ));
        let sparse = append_category_sparse(&SparseVec::from_pairs(vec![(1, 2.0)]), 4, Sports, &set).unwrap();
        assert_eq!(sparse.to_dense(7), vec![0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn tfidf_rows_have_unit_norm(
            corpus in prop::collection::vec(prop::collection::vec("[a-f]", 1..8), 1..6),
            query in prop::collection::vec("[a-h]", 0..8),
        ) {
            let vocab = build_vocab(&corpus, spec(), 4).unwrap();
            let v: SparseVec<f64> = vectorize(&query, &vocab, Weighting::Tfidf);
            prop_assert!(v.indices.iter().all(|&i| i < vocab.len()));
            if v.nnz() > 0 {
                let norm: f64 = v.values.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!((norm - 1.0).abs() < 1e-9);
            }
        }
    }
}
