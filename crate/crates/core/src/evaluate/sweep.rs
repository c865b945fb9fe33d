use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageContext};
use crate::featurize::{build_vocab, EmbeddingTable, FeatureMatrix, NgramKind, NgramSpec, Vocabulary, Weighting};
use crate::models::ModelSpec;
use crate::scalar::Scalar;

use super::cell_seed;
use super::experiment::{
    check_split, run_experiment, train_and_score, Dataset, EmbeddingFeatures, FeatureSpec, FittedFeatures,
    NgramFeatures, RunOptions, SplitInfo,
};
use super::split::Split;

/// Axes of a feature-count sweep. Cells are the Cartesian product
/// model × kind × n-range × top_k, followed by model × embedding config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepPlan {
    pub models: Vec<ModelSpec>,
    pub feature_kinds: Vec<NgramKind>,
    pub n_ranges: Vec<(usize, usize)>,
    pub top_k: Vec<usize>,
    pub weighting: Weighting,
    pub use_category: bool,
    pub embeddings: Vec<EmbeddingFeatures>,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            models: ModelSpec::all_defaults(),
            feature_kinds: vec![NgramKind::Word, NgramKind::Char],
            n_ranges: vec![(1, 3)],
            top_k: vec![5_000, 10_000, 15_000, 20_000],
            weighting: Weighting::Tfidf,
            use_category: false,
            embeddings: Vec::new(),
        }
    }
}

impl SweepPlan {
    pub fn cells(&self) -> Vec<(ModelSpec, FeatureSpec)> {
        let mut cells = Vec::new();
        for model in &self.models {
            for &kind in &self.feature_kinds {
                for &(n_min, n_max) in &self.n_ranges {
                    for &top_k in &self.top_k {
                        let f = NgramFeatures {
                            kind,
                            n_min,
                            n_max,
                            top_k,
                            weighting: self.weighting,
                            use_category: self.use_category,
                        };
                        cells.push((model.clone(), FeatureSpec::Ngrams(f)));
                    }
                }
            }
            for &e in &self.embeddings {
                cells.push((model.clone(), FeatureSpec::Embeddings(e)));
            }
        }
        cells
    }

    pub fn validate(&self) -> Result<()> {
        let ngram_cells = self.feature_kinds.len() * self.n_ranges.len() * self.top_k.len();
        if self.models.is_empty() || ngram_cells + self.embeddings.len() == 0 {
            return Err(Error::Empty("sweep plan"));
        }
        for m in &self.models {
            m.validate()?;
        }
        for &(a, b) in &self.n_ranges {
            NgramSpec::new(NgramKind::Word, a, b)?;
        }
        if self.top_k.contains(&0) {
            return Err(Error::InvalidArgument("top_k must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub feature_kind: String,
    pub n_range: Option<String>,
    pub top_k: Option<usize>,
    pub use_category: bool,
    pub seed: u64,
    pub vocab_size: Option<usize>,
    pub macro_f1: Option<f64>,
    pub weighted_f1: Option<f64>,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub master_seed: u64,
    pub split: SplitInfo,
    pub rows: Vec<SweepRow>,
}

/// Per n-gram spec: every example's n-grams plus the largest train
/// vocabulary any cell asks for. Smaller top_k cells truncate it, which
/// equals refitting because ranking does not depend on top_k.
struct GramCache {
    grams: Vec<Vec<String>>,
    vocab: Result<Vocabulary>,
}

fn build_cache(dataset: &Dataset, split: &Split, spec: NgramSpec, top_k: usize) -> GramCache {
    let grams: Vec<Vec<String>> = dataset.examples.iter().map(|e| spec.extract(&e.text)).collect();
    let train: Vec<Vec<String>> = split.train.iter().map(|&i| grams[i].clone()).collect();
    let vocab = build_vocab(&train, spec, top_k);
    GramCache { grams, vocab }
}

/// Run every cell of `plan` on one shared split. Each cell trains with
/// `cell_seed(master_seed, index)`, so the table does not depend on
/// scheduling; `parallel` only changes wall time.
pub fn sweep_features<T: Scalar>(
    dataset: &Dataset,
    plan: &SweepPlan,
    split: &Split,
    embeddings: Option<&EmbeddingTable<T>>,
    master_seed: u64,
    parallel: bool,
) -> Result<SweepTable> {
    plan.validate()?;
    check_split(dataset, split)?;
    let cells = plan.cells();

    let mut wanted: BTreeMap<NgramSpec, usize> = BTreeMap::new();
    for (_, f) in &cells {
        if let FeatureSpec::Ngrams(f) = f {
            let top = wanted.entry(f.spec()?).or_default();
            *top = (*top).max(f.top_k);
        }
    }
    let specs: Vec<(NgramSpec, usize)> = wanted.into_iter().collect();
    let build = |&(spec, top_k): &(NgramSpec, usize)| (spec, build_cache(dataset, split, spec, top_k));
    let caches: BTreeMap<NgramSpec, GramCache> = if parallel {
        specs.par_iter().map(build).collect()
    } else {
        specs.iter().map(build).collect()
    };

    let labels = dataset.labels();
    let classes = dataset.classes();
    let y_train: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();
    let y_test: Vec<usize> = split.test.iter().map(|&i| labels[i]).collect();

    let run_cell = |(idx, (model, features)): (usize, &(ModelSpec, FeatureSpec))| -> SweepRow {
        let seed = cell_seed(master_seed, idx as u64);
        let features = features.for_model(model);
        let outcome: Result<(Option<usize>, super::metrics::Metrics)> = match &features {
            FeatureSpec::Ngrams(f) => (|| {
                let cache = &caches[&f.spec()?];
                let vocab = cache
                    .vocab
                    .as_ref()
                    .map_err(|e| Error::InvalidArgument(e.to_string()))
                    .stage("featurize")?;
                let categories = f.use_category.then(|| dataset.categories());
                let fitted = FittedFeatures::<T>::from_vocab(vocab.truncated(f.top_k), f.weighting, categories);
                let encode = |rows: &[usize]| -> Result<FeatureMatrix<T>> {
                    let grams: Vec<&[String]> = rows.iter().map(|&i| cache.grams[i].as_slice()).collect();
                    fitted.transform_grams(dataset, rows, &grams).stage("featurize")
                };
                let x_train = encode(&split.train)?;
                let x_test = encode(&split.test)?;
                let scored = train_and_score(model, &x_train, &y_train, &x_test, &y_test, &classes, seed)?;
                Ok((fitted.vocabulary().map(Vocabulary::len), scored.metrics))
            })(),
            FeatureSpec::Embeddings(_) => run_experiment(
                dataset,
                &features,
                model,
                split,
                embeddings,
                seed,
                RunOptions::default(),
            )
            .map(|e| (None, e.report.metrics)),
        };
        let (feature_kind, n_range, top_k, use_category) = match &features {
            FeatureSpec::Ngrams(f) => (
                f.kind.as_str().to_string(),
                Some(format!("{}-{}", f.n_min, f.n_max)),
                Some(f.top_k),
                f.use_category,
            ),
            FeatureSpec::Embeddings(e) => ("embeddings".to_string(), None, None, e.use_category),
        };
        let mut row = SweepRow {
            model: model.family().to_string(),
            feature_kind,
            n_range,
            top_k,
            use_category,
            seed,
            vocab_size: None,
            macro_f1: None,
            weighted_f1: None,
            accuracy: None,
            error: None,
        };
        match outcome {
            Ok((vocab_size, m)) => {
                row.vocab_size = vocab_size;
                row.macro_f1 = Some(m.macro_f1);
                row.weighted_f1 = Some(m.weighted_f1);
                row.accuracy = Some(m.accuracy);
            }
            Err(e) => {
                log::warn!("sweep cell {idx} ({}) failed: {e}", row.model);
                row.error = Some(e.to_string());
            }
        }
        row
    };

    let rows: Vec<SweepRow> = if parallel {
        cells.par_iter().enumerate().map(run_cell).collect()
    } else {
        cells.iter().enumerate().map(run_cell).collect()
    };
    Ok(SweepTable {
        master_seed,
        split: SplitInfo::of(split),
        rows,
    })
}
