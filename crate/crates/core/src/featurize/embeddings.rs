use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pre-trained token vectors, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dim: usize,
    index: HashMap<String, usize>,
    vectors: Vec<T>,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, Vec<T>)>) -> Result<Self> {
        let mut table: Option<EmbeddingTable<T>> = None;
        for (token, v) in entries {
            let t = table.get_or_insert_with(|| EmbeddingTable {
                dim: v.len(),
                index: HashMap::new(),
                vectors: Vec::new(),
            });
            t.insert(token, &v)?;
        }
        let table = table.ok_or(Error::Empty("embedding table"))?;
        if table.dim == 0 {
            return Err(Error::Format("embedding dimension must be at least 1".into()));
        }
        Ok(table)
    }

    /// Returns false when the token was already present (first wins).
    fn insert(&mut self, token: String, v: &[T]) -> Result<bool> {
        if v.len() != self.dim {
            return Err(Error::Format(format!(
                "embedding for {token:?} has dimension {}, expected {}",
                v.len(),
                self.dim
            )));
        }
        if self.index.contains_key(&token) {
            return Ok(false);
        }
        self.index.insert(token, self.index.len());
        self.vectors.extend_from_slice(v);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[T]> {
        self.index
            .get(token)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }
}

pub struct LoadedEmbeddings<T> {
    pub table: EmbeddingTable<T>,
    pub warnings: Vec<String>,
}

/// Read the plain-text embedding format: `token v1 ... vd` per line.
///
/// A leading `count dim` header line is skipped. Duplicate tokens keep the
/// first vector and produce a warning.
pub fn load_embeddings<T: Scalar, R: BufRead>(input: R) -> Result<LoadedEmbeddings<T>> {
    let mut table: Option<EmbeddingTable<T>> = None;
    let mut warnings = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        if table.is_none() && rest.len() == 1 && token.parse::<u64>().is_ok() && rest[0].parse::<u64>().is_ok() {
            continue;
        }
        let values = rest
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(T::of)
                    .ok_or_else(|| Error::Format(format!("line {line_no}: bad number {f:?}")))
            })
            .collect::<Result<Vec<T>>>()?;
        if values.is_empty() {
            return Err(Error::Format(format!("line {line_no}: token without vector")));
        }
        let t = table.get_or_insert_with(|| EmbeddingTable {
            dim: values.len(),
            index: HashMap::new(),
            vectors: Vec::new(),
        });
        if !t
            .insert(token.to_string(), &values)
            .map_err(|e| Error::Format(format!("line {line_no}: {e}")))?
        {
            warnings.push(format!("line {line_no}: duplicate token {token:?} ignored"));
        }
    }
    let table = table.ok_or(Error::Empty("embedding file"))?;
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(LoadedEmbeddings { table, warnings })
}

/// Mean of the vectors of in-table tokens; zero vector if none is known.
pub fn embed_event<T: Scalar, S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable<T>) -> Vec<T> {
    let mut sum = vec![T::zero(); table.dim()];
    let mut hits = 0usize;
    for t in tokens {
        if let Some(v) = table.get(t.as_ref()) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += *x;
            }
            hits += 1;
        }
    }
    if hits > 0 {
        let n = T::of_usize(hits);
        sum.iter_mut().for_each(|s| *s /= n);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn load(text: &str) -> Result<LoadedEmbeddings<f64>> {
        load_embeddings(text.as_bytes())
    }

    #[test]
    fn parses_lines() {
        let loaded = load("cat 0.1 0.2\n").unwrap();
        assert_eq!(loaded.table.dim(), 2);
        assert_eq!(loaded.table.get("cat").unwrap(), &[0.1, 0.2]);
    }

    #[test]
    fn inconsistent_dimension_is_fatal() {
        assert!(matches!(load("cat 0.1 0.2\ndog 1 2 3\n"), Err(Error::Format(_))));
    }

    #[test]
    fn duplicates_first_wins() {
        let loaded = load("cat 1 2\ncat 3 4\n").unwrap();
        assert_eq!(loaded.table.get("cat").unwrap(), &[1.0, 2.0]);
        assert_eq!(loaded.table.len(), 1);
        assert_eq!(loaded.warnings.len(), 1);
    }

    #[test]
    fn empty_and_header() {
        assert!(load("").is_err());
        let loaded = load("2 3\na 1 2 3\nb 4 5 6\n").unwrap();
        assert_eq!(loaded.table.len(), 2);
        assert_eq!(loaded.table.dim(), 3);
    }

    #[test]
    fn mean_pooling() {
        let table =
            EmbeddingTable::from_entries([("cat".to_string(), vec![1.0, 0.0]), ("dog".to_string(), vec![0.0, 1.0])])
                .unwrap();
        assert_eq!(embed_event(&["cat"], &table), vec![1.0, 0.0]);
        assert_eq!(embed_event(&["cat", "dog"], &table), vec![0.5, 0.5]);
        assert_eq!(embed_event(&["emu", "yak"], &table), vec![0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn mean_is_within_coordinate_hull(
            vecs in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..6),
            picks in prop::collection::vec(0usize..6, 1..10),
        ) {
            let table = EmbeddingTable::from_entries(
                vecs.iter().enumerate().map(|(i, v)| (format!("t{i}"), v.clone())),
            ).unwrap();
            let tokens: Vec<String> = picks.iter().map(|p| format!("t{}", p % vecs.len())).collect();
            let mean = embed_event(&tokens, &table);
            for d in 0..3 {
                let vals: Vec<f64> = tokens.iter().map(|t| table.get(t).unwrap()[d]).collect();
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(mean[d] >= lo - 1e-12 && mean[d] <= hi + 1e-12);
            }
        }
    }
}
