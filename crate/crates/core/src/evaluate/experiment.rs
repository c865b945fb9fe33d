use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::categorize::CategoryLabel;
use crate::error::{Error, Result, StageContext};
use crate::featurize::{
    append_category_feature, append_category_sparse, build_vocab, embed_event, tokenize, vectorize, EmbeddingTable,
    FeatureMatrix, NgramKind, NgramSpec, SparseVec, Vocabulary, Weighting,
};
use crate::label::LabeledEvent;
use crate::models::{fit, FeatureSpace, ModelSpec, TrainedModel};
use crate::scalar::Scalar;

use super::metrics::{compute_metrics, Metrics};
use super::split::Split;

/// Which event text feeds the featurizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextField {
    #[default]
    Summary,
    Title,
    TitleSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub text: String,
    pub category: CategoryLabel,
    pub label: usize,
}

/// Labeled, categorized events ready for featurization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub examples: Vec<Example>,
}

impl Dataset {
    pub fn from_labeled(labeled: &[LabeledEvent], field: TextField) -> Result<Self> {
        let examples = labeled
            .iter()
            .map(|le| {
                let category = le
                    .top_category
                    .ok_or_else(|| Error::UncategorizedEvent(le.event.id.clone()))?;
                let e = &le.event;
                let text = match field {
                    TextField::Summary => e.summary.clone(),
                    TextField::Title => e.title.clone(),
                    TextField::TitleSummary => format!("{} {}", e.title, e.summary),
                };
                Ok(Example {
                    id: e.id.clone(),
                    text,
                    category,
                    label: le.cluster,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset { examples })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.examples.iter().map(|e| e.label).collect()
    }

    /// Distinct labels, ascending; the class list every report scores over.
    pub fn classes(&self) -> Vec<usize> {
        self.examples
            .iter()
            .map(|e| e.label)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Distinct top categories, alphabetical; the one-hot label set.
    pub fn categories(&self) -> Vec<CategoryLabel> {
        self.examples
            .iter()
            .map(|e| e.category)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgramFeatures {
    pub kind: NgramKind,
    pub n_min: usize,
    pub n_max: usize,
    pub top_k: usize,
    pub weighting: Weighting,
    pub use_category: bool,
}

impl Default for NgramFeatures {
    fn default() -> Self {
        NgramFeatures {
            kind: NgramKind::Word,
            n_min: 1,
            n_max: 3,
            top_k: 10_000,
            weighting: Weighting::Tfidf,
            use_category: false,
        }
    }
}

impl NgramFeatures {
    pub fn spec(&self) -> Result<NgramSpec> {
        NgramSpec::new(self.kind, self.n_min, self.n_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingFeatures {
    pub use_category: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureSpec {
    Ngrams(NgramFeatures),
    Embeddings(EmbeddingFeatures),
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec::Ngrams(NgramFeatures::default())
    }
}

impl FeatureSpec {
    pub fn use_category(&self) -> bool {
        match self {
            FeatureSpec::Ngrams(f) => f.use_category,
            FeatureSpec::Embeddings(f) => f.use_category,
        }
    }

    /// Naive Bayes models counts, so it always gets raw counts.
    pub fn for_model(&self, model: &ModelSpec) -> FeatureSpec {
        match (self, model) {
            (FeatureSpec::Ngrams(f), ModelSpec::NaiveBayes(_)) => FeatureSpec::Ngrams(NgramFeatures {
                weighting: Weighting::Counts,
                ..*f
            }),
            _ => *self,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let FeatureSpec::Ngrams(f) = self {
            f.spec()?;
            if f.top_k == 0 {
                return Err(Error::InvalidArgument("top_k must be >= 1".into()));
            }
        }
        Ok(())
    }
}

enum Fitted<'a, T> {
    Ngrams { vocab: Vocabulary, weighting: Weighting },
    Embeddings(&'a EmbeddingTable<T>),
}

/// A feature space fit on training rows, able to encode any example.
pub struct FittedFeatures<'a, T> {
    fitted: Fitted<'a, T>,
    categories: Option<Vec<CategoryLabel>>,
}

impl<'a, T: Scalar> FittedFeatures<'a, T> {
    /// Fit on `train` rows of `dataset` only. The category label set is the
    /// dataset-wide set of top categories (a closed vocabulary, not a
    /// target), so test rows never hit an unseen category.
    pub fn fit(
        spec: &FeatureSpec,
        dataset: &Dataset,
        train: &[usize],
        embeddings: Option<&'a EmbeddingTable<T>>,
    ) -> Result<Self> {
        spec.validate()?;
        let categories = spec.use_category().then(|| dataset.categories());
        let fitted = match spec {
            FeatureSpec::Ngrams(f) => {
                let ngram_spec = f.spec()?;
                let corpus: Vec<Vec<String>> = train
                    .iter()
                    .map(|&i| ngram_spec.extract(&dataset.examples[i].text))
                    .collect();
                Fitted::Ngrams {
                    vocab: build_vocab(&corpus, ngram_spec, f.top_k)?,
                    weighting: f.weighting,
                }
            }
            FeatureSpec::Embeddings(_) => Fitted::Embeddings(
                embeddings
                    .ok_or_else(|| Error::InvalidArgument("embedding features need an embeddings table".into()))?,
            ),
        };
        Ok(FittedFeatures { fitted, categories })
    }

    pub(crate) fn from_vocab(vocab: Vocabulary, weighting: Weighting, categories: Option<Vec<CategoryLabel>>) -> Self {
        FittedFeatures {
            fitted: Fitted::Ngrams { vocab, weighting },
            categories,
        }
    }

    fn base_dim(&self) -> usize {
        match &self.fitted {
            Fitted::Ngrams { vocab, .. } => vocab.len(),
            Fitted::Embeddings(t) => t.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.base_dim() + self.categories.as_ref().map_or(0, Vec::len)
    }

    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        match &self.fitted {
            Fitted::Ngrams { vocab, .. } => Some(vocab),
            Fitted::Embeddings(_) => None,
        }
    }

    pub fn space(&self) -> FeatureSpace {
        match &self.fitted {
            Fitted::Ngrams { vocab, weighting } => FeatureSpace::Ngrams {
                spec: vocab.spec,
                weighting: *weighting,
                vocab_size: vocab.len(),
                vocab_fingerprint: vocab.fingerprint(),
                category_labels: self.categories.clone(),
            },
            Fitted::Embeddings(t) => FeatureSpace::Embeddings {
                dim: t.dim(),
                category_labels: self.categories.clone(),
            },
        }
    }

    pub fn transform(&self, dataset: &Dataset, rows: &[usize]) -> Result<FeatureMatrix<T>> {
        match &self.fitted {
            Fitted::Ngrams { vocab, .. } => {
                let grams: Vec<Vec<String>> = rows
                    .iter()
                    .map(|&i| vocab.spec.extract(&dataset.examples[i].text))
                    .collect();
                let refs: Vec<&[String]> = grams.iter().map(Vec::as_slice).collect();
                self.transform_grams(dataset, rows, &refs)
            }
            Fitted::Embeddings(table) => {
                let vectors = rows
                    .iter()
                    .map(|&i| {
                        let ex = &dataset.examples[i];
                        let v = embed_event(&tokenize(&ex.text), table);
                        match &self.categories {
                            Some(set) => append_category_feature(&v, ex.category, set),
                            None => Ok(v),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                FeatureMatrix::dense(self.dim(), vectors)
            }
        }
    }

    /// Encode pre-extracted n-grams; `grams[j]` belongs to `rows[j]`.
    pub(crate) fn transform_grams(
        &self,
        dataset: &Dataset,
        rows: &[usize],
        grams: &[&[String]],
    ) -> Result<FeatureMatrix<T>> {
        let Fitted::Ngrams { vocab, weighting } = &self.fitted else {
            return Err(Error::InvalidArgument("not an n-gram feature space".into()));
        };
        let vectors = rows
            .iter()
            .zip(grams)
            .map(|(&i, g)| {
                let v: SparseVec<T> = vectorize(g, vocab, *weighting);
                match &self.categories {
                    Some(set) => append_category_sparse(&v, vocab.len(), dataset.examples[i].category, set),
                    None => Ok(v),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        FeatureMatrix::sparse(self.dim(), vectors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Record wall-clock start/finish times in the report metadata.
    pub timestamps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub ratio: f64,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
}

impl SplitInfo {
    pub fn of(split: &Split) -> Self {
        SplitInfo {
            ratio: split.ratio,
            seed: split.seed,
            n_train: split.train.len(),
            n_test: split.test.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub model: ModelSpec,
    pub features: FeatureSpec,
    pub scalar: String,
    pub seed: u64,
    pub split: SplitInfo,
    pub feature_dim: usize,
    pub vocab_size: Option<usize>,
    pub vocab_fingerprint: Option<String>,
    pub training_loss: Option<f64>,
    pub started_at: Option<String>,
    pub finished_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: Metrics,
    pub metadata: RunMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub truth: usize,
    pub predicted: usize,
}

/// Everything one train/evaluate cycle produces.
#[derive(Debug, Clone)]
pub struct Experiment<T> {
    pub report: EvalReport,
    pub model: TrainedModel<T>,
    pub vocabulary: Option<Vocabulary>,
    pub predictions: Vec<Prediction>,
}

fn now(enabled: bool) -> Option<String> {
    enabled.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

pub(crate) fn check_trainable(model: &ModelSpec, y_train: &[usize]) -> Result<()> {
    let distinct: BTreeSet<usize> = y_train.iter().copied().collect();
    if model.is_discriminative() && distinct.len() < 2 {
        let only = distinct.iter().next().map_or("none".to_string(), |c| c.to_string());
        return Err(Error::DegenerateLabels(format!(
            "{} needs at least 2 classes in the training split, found class {only} only",
            model.family()
        )));
    }
    Ok(())
}

pub(crate) struct Scored<T> {
    pub model: TrainedModel<T>,
    pub predicted: Vec<usize>,
    pub metrics: Metrics,
}

pub(crate) fn train_and_score<T: Scalar>(
    model: &ModelSpec,
    x_train: &FeatureMatrix<T>,
    y_train: &[usize],
    x_test: &FeatureMatrix<T>,
    y_test: &[usize],
    classes: &[usize],
    seed: u64,
) -> Result<Scored<T>> {
    check_trainable(model, y_train).stage("train")?;
    let trained = fit(model, x_train, y_train, seed).stage("train")?;
    let predicted = trained.predict(x_test).stage("predict")?;
    let metrics = compute_metrics(y_test, &predicted, classes).stage("evaluate")?;
    Ok(Scored {
        model: trained,
        predicted,
        metrics,
    })
}

/// Fit features on the train rows, train `model`, and score the test rows.
pub fn run_experiment<T: Scalar>(
    dataset: &Dataset,
    features: &FeatureSpec,
    model: &ModelSpec,
    split: &Split,
    embeddings: Option<&EmbeddingTable<T>>,
    seed: u64,
    options: RunOptions,
) -> Result<Experiment<T>> {
    let started_at = now(options.timestamps);
    check_split(dataset, split)?;
    let features = features.for_model(model);
    let fitted = FittedFeatures::fit(&features, dataset, &split.train, embeddings).stage("featurize")?;
    let x_train = fitted.transform(dataset, &split.train).stage("featurize")?;
    let x_test = fitted.transform(dataset, &split.test).stage("featurize")?;
    let labels = dataset.labels();
    let pick = |rows: &[usize]| rows.iter().map(|&i| labels[i]).collect::<Vec<_>>();
    let (y_train, y_test) = (pick(&split.train), pick(&split.test));
    let scored = train_and_score(model, &x_train, &y_train, &x_test, &y_test, &dataset.classes(), seed)?;

    let vocabulary = fitted.vocabulary().cloned();
    let trained = scored.model.with_feature_space(fitted.space());
    let predictions = split
        .test
        .iter()
        .zip(&scored.predicted)
        .map(|(&i, &p)| Prediction {
            id: dataset.examples[i].id.clone(),
            truth: labels[i],
            predicted: p,
        })
        .collect();
    let metadata = RunMetadata {
        model: model.clone(),
        features,
        scalar: T::type_name().to_string(),
        seed,
        split: SplitInfo::of(split),
        feature_dim: fitted.dim(),
        vocab_size: vocabulary.as_ref().map(Vocabulary::len),
        vocab_fingerprint: vocabulary.as_ref().map(Vocabulary::fingerprint),
        training_loss: trained.training_loss,
        started_at,
        finished_at: now(options.timestamps),
    };
    Ok(Experiment {
        report: EvalReport {
            metrics: scored.metrics,
            metadata,
        },
        model: trained,
        vocabulary,
        predictions,
    })
}

pub(crate) fn check_split(dataset: &Dataset, split: &Split) -> Result<()> {
    let n = dataset.len();
    if let Some(&bad) = split.train.iter().chain(&split.test).find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!(
            "split index {bad} out of range for {n} examples"
        )));
    }
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::InvalidArgument("split has an empty train or test side".into()));
    }
    Ok(())
}

/// Macro-F1 with and without the one-hot category block, same split and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingComparison {
    pub with_category: EvalReport,
    pub without_category: EvalReport,
}

impl EmbeddingComparison {
    pub fn f1_with_category(&self) -> f64 {
        self.with_category.metrics.macro_f1
    }

    pub fn f1_without_category(&self) -> f64 {
        self.without_category.metrics.macro_f1
    }
}

pub fn compare_embeddings<T: Scalar>(
    dataset: &Dataset,
    table: &EmbeddingTable<T>,
    model: &ModelSpec,
    split: &Split,
    seed: u64,
    options: RunOptions,
) -> Result<EmbeddingComparison> {
    let run = |use_category| {
        let spec = FeatureSpec::Embeddings(EmbeddingFeatures { use_category });
        run_experiment(dataset, &spec, model, split, Some(table), seed, options).map(|e| e.report)
    };
    Ok(EmbeddingComparison {
        with_category: run(true)?,
        without_category: run(false)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub folds: Vec<EvalReport>,
    pub mean_accuracy: f64,
    pub mean_macro_f1: f64,
    pub mean_weighted_f1: f64,
}

/// One experiment per fold; fold `i` trains with `cell_seed(seed, i)`.
pub fn cross_validate<T: Scalar>(
    dataset: &Dataset,
    features: &FeatureSpec,
    model: &ModelSpec,
    folds: &[Split],
    embeddings: Option<&EmbeddingTable<T>>,
    seed: u64,
    options: RunOptions,
) -> Result<CrossValidation> {
    if folds.is_empty() {
        return Err(Error::Empty("folds"));
    }
    let reports = folds
        .iter()
        .enumerate()
        .map(|(i, s)| {
            run_experiment(
                dataset,
                features,
                model,
                s,
                embeddings,
                super::cell_seed(seed, i as u64),
                options,
            )
            .map(|e| e.report)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = |f: fn(&Metrics) -> f64| reports.iter().map(|r| f(&r.metrics)).sum::<f64>() / reports.len() as f64;
    Ok(CrossValidation {
        mean_accuracy: mean(|m| m.accuracy),
        mean_macro_f1: mean(|m| m.macro_f1),
        mean_weighted_f1: mean(|m| m.weighted_f1),
        folds: reports,
    })
}
