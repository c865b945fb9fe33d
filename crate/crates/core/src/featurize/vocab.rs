use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::text::{char_ngrams, tokenize, word_ngrams};
use crate::error::{Error, Result};
use crate::export::csv_writer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NgramKind {
    Word,
    Char,
}

impl NgramKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NgramKind::Word => "word",
            NgramKind::Char => "char",
        }
    }
}

/// Which n-grams to extract from a text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NgramSpec {
    pub kind: NgramKind,
    pub n_min: usize,
    pub n_max: usize,
}

impl NgramSpec {
    pub fn new(kind: NgramKind, n_min: usize, n_max: usize) -> Result<Self> {
        if n_min == 0 || n_min > n_max {
            return Err(Error::InvalidArgument(format!(
                "n-gram range must satisfy 1 <= n_min <= n_max, got {n_min}..{n_max}"
            )));
        }
        Ok(NgramSpec { kind, n_min, n_max })
    }

    pub fn extract(&self, text: &str) -> Vec<String> {
        match self.kind {
            NgramKind::Word => word_ngrams(&tokenize(text), self.n_min, self.n_max),
            NgramKind::Char => char_ngrams(text, self.n_min, self.n_max),
        }
    }

    pub fn range_label(&self) -> String {
        format!("{}-{}", self.n_min, self.n_max)
    }
}

#[derive(Deserialize)]
struct VocabularyData {
    spec: NgramSpec,
    n_docs: usize,
    features: Vec<String>,
    df: Vec<usize>,
}

/// Frequency-ranked n-gram vocabulary. Index = rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData")]
pub struct Vocabulary {
    pub spec: NgramSpec,
    /// Number of documents the vocabulary was fit on.
    pub n_docs: usize,
    pub features: Vec<String>,
    /// Document frequency of each feature.
    pub df: Vec<usize>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl From<VocabularyData> for Vocabulary {
    fn from(d: VocabularyData) -> Self {
        let index = d.features.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        Vocabulary {
            spec: d.spec,
            n_docs: d.n_docs,
            features: d.features,
            df: d.df,
            index,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, feature: &str) -> Option<usize> {
        self.index.get(feature).copied()
    }

    /// The first `top_k` features of this ranking.
    pub fn truncated(&self, top_k: usize) -> Vocabulary {
        let keep = top_k.min(self.len());
        Vocabulary::from(VocabularyData {
            spec: self.spec,
            n_docs: self.n_docs,
            features: self.features[..keep].to_vec(),
            df: self.df[..keep].to_vec(),
        })
    }

    /// SHA-256 over the spec and the ranked features.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{:?}|{}|", self.spec, self.n_docs));
        for f in &self.features {
            hasher.update(f.as_bytes());
            hasher.update([0u8]);
        }
        format!("{:x}", hasher.finalize())
    }

    /// CSV `rank,feature,df`; rank is the 0-based column index.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv_writer(out, &["rank", "feature", "df"])?;
        for (i, (f, df)) in self.features.iter().zip(&self.df).enumerate() {
            writer.row([i.to_string(), f.clone(), df.to_string()])?;
        }
        writer.finish()
    }
}

/// Rank n-grams by total occurrences (descending), ties lexicographic
/// ascending, and keep the first `top_k`.
pub fn build_vocab(corpus: &[Vec<String>], spec: NgramSpec, top_k: usize) -> Result<Vocabulary> {
    if top_k == 0 {
        return Err(Error::InvalidArgument("top_k must be at least 1".into()));
    }
    if corpus.iter().all(Vec::is_empty) {
        return Err(Error::Empty("empty corpus"));
    }
    let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();
    for doc in corpus {
        let mut in_doc: BTreeMap<&str, ()> = BTreeMap::new();
        for gram in doc {
            counts.entry(gram.as_str()).or_default().0 += 1;
            in_doc.insert(gram.as_str(), ());
        }
        for gram in in_doc.keys() {
            counts.get_mut(gram).unwrap().1 += 1;
        }
    }
    let mut ranked: Vec<(&str, usize, usize)> = counts.into_iter().map(|(g, (c, d))| (g, c, d)).collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(top_k);
    Ok(Vocabulary::from(VocabularyData {
        spec,
        n_docs: corpus.len(),
        features: ranked.iter().map(|r| r.0.to_string()).collect(),
        df: ranked.iter().map(|r| r.2).collect(),
    }))
}
