//! Top-category selection and the closed set of content categories.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::export::csv_writer;
use crate::ingest::{Category, EventRecord};
use crate::label::LabeledEvent;

/// Top-level DMOZ categories. Variant order is alphabetical, so the derived
/// `Ord` sorts labels alphabetically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoryLabel {
    Arts,
    Business,
    Computers,
    Games,
    Health,
    Home,
    Other,
    Recreation,
    Science,
    Shopping,
    Society,
    Sports,
}

impl CategoryLabel {
    pub const ALL: [CategoryLabel; 12] = [
        CategoryLabel::Arts,
        CategoryLabel::Business,
        CategoryLabel::Computers,
        CategoryLabel::Games,
        CategoryLabel::Health,
        CategoryLabel::Home,
        CategoryLabel::Other,
        CategoryLabel::Recreation,
        CategoryLabel::Science,
        CategoryLabel::Shopping,
        CategoryLabel::Society,
        CategoryLabel::Sports,
    ];

    /// The eleven content categories used for classification (everything
    /// except `Other`).
    pub fn content() -> Vec<CategoryLabel> {
        Self::ALL.into_iter().filter(|c| *c != CategoryLabel::Other).collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CategoryLabel::Arts => "arts",
            CategoryLabel::Business => "business",
            CategoryLabel::Computers => "computers",
            CategoryLabel::Games => "games",
            CategoryLabel::Health => "health",
            CategoryLabel::Home => "home",
            CategoryLabel::Other => "other",
            CategoryLabel::Recreation => "recreation",
            CategoryLabel::Science => "science",
            CategoryLabel::Shopping => "shopping",
            CategoryLabel::Society => "society",
            CategoryLabel::Sports => "sports",
        }
    }
}

impl fmt::Display for CategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CategoryLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

/// Highest-weight category; equal weights resolved by the byte-wise
/// smallest lowercased path.
pub fn top_category(event: &EventRecord) -> Result<&Category> {
    let mut iter = event.categories.iter();
    let mut best = iter.next().ok_or_else(|| Error::UncategorizedEvent(event.id.clone()))?;
    let mut best_key = best.path.to_lowercase();
    for c in iter {
        let replace = if c.weight > best.weight {
            true
        } else if c.weight == best.weight {
            let key = c.path.to_lowercase();
            // the raw path breaks ties between paths differing only in case
            (key.as_bytes(), c.path.as_bytes()) < (best_key.as_bytes(), best.path.as_bytes())
        } else {
            false
        };
        if replace {
            best = c;
            best_key = c.path.to_lowercase();
        }
    }
    Ok(best)
}

/// Map a DMOZ path such as `dmoz/Sports/Soccer` to its top-level label.
pub fn normalize_dmoz(path: &str) -> Result<CategoryLabel> {
    if path.is_empty() {
        return Err(Error::InvalidArgument("empty category path".into()));
    }
    let rest = match path.get(..5) {
        Some(prefix) if prefix.eq_ignore_ascii_case("dmoz/") => &path[5..],
        _ => path,
    };
    let head = rest.split('/').next().unwrap_or("").trim().to_lowercase();
    if head.is_empty() {
        return Err(Error::InvalidArgument(format!("no category segment in {path:?}")));
    }
    Ok(head.parse().unwrap_or(CategoryLabel::Other))
}

/// Fill `top_category` on every labeled event.
pub fn assign_top_categories(labeled: &mut [LabeledEvent]) -> Result<()> {
    for e in labeled {
        let top = top_category(&e.event)?;
        e.top_category = Some(normalize_dmoz(&top.path)?);
    }
    Ok(())
}

/// Keep only events whose top category is in `allowed`.
pub fn filter_by_category(labeled: Vec<LabeledEvent>, allowed: &[CategoryLabel]) -> Vec<LabeledEvent> {
    labeled
        .into_iter()
        .filter(|e| e.top_category.is_some_and(|c| allowed.contains(&c)))
        .collect()
}

fn category_of(e: &LabeledEvent) -> Result<CategoryLabel> {
    e.top_category
        .ok_or_else(|| Error::UncategorizedEvent(e.event.id.clone()))
}

pub fn group_by_category(labeled: &[LabeledEvent]) -> Result<BTreeMap<CategoryLabel, Vec<&LabeledEvent>>> {
    let mut groups: BTreeMap<CategoryLabel, Vec<&LabeledEvent>> = BTreeMap::new();
    for e in labeled {
        groups.entry(category_of(e)?).or_default().push(e);
    }
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharedPair {
    pub a: usize,
    pub b: usize,
    pub categories: Vec<CategoryLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharedCategoryReport {
    pub k: usize,
    pub pairs: Vec<SharedPair>,
}

impl SharedCategoryReport {
    pub fn get(&self, a: usize, b: usize) -> Option<&[CategoryLabel]> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.pairs
            .iter()
            .find(|p| p.a == a && p.b == b)
            .map(|p| p.categories.as_slice())
    }

    /// Radial dendrogram source: root "data", one child per cluster pair,
    /// leaves are the shared categories.
    pub fn to_tree(&self) -> Value {
        let children: Vec<Value> = self
            .pairs
            .iter()
            .map(|p| {
                json!({
                    "name": format!("{}-{}", p.a, p.b),
                    "children": p.categories.iter().map(|c| json!({"name": c.as_str()})).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({"name": "data", "children": children})
    }
}

/// Categories occurring in both clusters, for every unordered pair.
pub fn shared_categories(labeled: &[LabeledEvent], k: usize) -> Result<SharedCategoryReport> {
    let mut sets = vec![BTreeSet::new(); k];
    for e in labeled {
        let set = sets
            .get_mut(e.cluster)
            .ok_or_else(|| Error::InvalidArgument(format!("cluster {} outside 0..{k}", e.cluster)))?;
        set.insert(category_of(e)?);
    }
    let mut pairs = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            pairs.push(SharedPair {
                a,
                b,
                categories: sets[a].intersection(&sets[b]).copied().collect(),
            });
        }
    }
    Ok(SharedCategoryReport { k, pairs })
}

/// Per-cluster category counts; one (possibly empty) map per cluster.
pub fn category_frequencies(labeled: &[LabeledEvent], k: usize) -> Result<Vec<BTreeMap<CategoryLabel, usize>>> {
    let mut freqs = vec![BTreeMap::new(); k];
    for e in labeled {
        let map = freqs
            .get_mut(e.cluster)
            .ok_or_else(|| Error::InvalidArgument(format!("cluster {} outside 0..{k}", e.cluster)))?;
        *map.entry(category_of(e)?).or_insert(0) += 1;
    }
    Ok(freqs)
}

/// CSV `cluster,category,count`.
pub fn write_frequencies<W: Write>(freqs: &[BTreeMap<CategoryLabel, usize>], out: W) -> Result<()> {
    let mut writer = csv_writer(out, &["cluster", "category", "count"])?;
    for (cluster, map) in freqs.iter().enumerate() {
        for (label, count) in map {
            writer.row([cluster.to_string(), label.to_string(), count.to_string()])?;
        }
    }
    writer.finish()
}
