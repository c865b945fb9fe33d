//! Culture-cluster labeling: average cultural scores, exact 1-D k-means
//! over countries, choice of k and per-event cluster labels.

mod kmeans;
mod silhouette;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub use kmeans::{kmeans_1d, Clustering};
pub use silhouette::{mean_silhouette, select_k, KDiagnostic, KSelection};

use crate::categorize::CategoryLabel;
use crate::error::{Error, Result};
use crate::export::{csv_writer, fmt_float};
use crate::ingest::{CountryCode, EventRecord, HofstedeProfile, HofstedeTable};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageScore {
    pub country: CountryCode,
    pub score: f64,
}

/// Mean of the six dimensions.
pub fn average_cultural_score(profile: &HofstedeProfile) -> AverageScore {
    AverageScore {
        country: profile.country,
        score: profile.dims.iter().sum::<f64>() / profile.dims.len() as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KChoice {
    Fixed(usize),
    Range { k_min: usize, k_max: usize },
}

/// Countries clustered by average cultural score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel<T> {
    pub k: usize,
    pub centroids: Vec<T>,
    pub boundaries: Vec<T>,
    pub sse: T,
    pub scores: BTreeMap<CountryCode, T>,
    pub assignment: BTreeMap<CountryCode, usize>,
    pub diagnostics: Vec<KDiagnostic<T>>,
    pub warnings: Vec<String>,
}

/// Score every country of the table and cluster the scores.
pub fn fit_cluster_model<T: Scalar>(table: &HofstedeTable, choice: KChoice) -> Result<ClusterModel<T>> {
    if table.is_empty() {
        return Err(Error::Empty("hofstede table"));
    }
    let countries: Vec<CountryCode> = table.profiles.keys().copied().collect();
    let scores: Vec<T> = table
        .profiles
        .values()
        .map(|p| T::of(average_cultural_score(p).score))
        .collect();
    let (k, diagnostics, warnings) = match choice {
        KChoice::Fixed(k) => (k, Vec::new(), Vec::new()),
        KChoice::Range { k_min, k_max } => {
            let sel = select_k(&scores, k_min, k_max)?;
            (sel.k, sel.diagnostics, sel.warnings)
        }
    };
    let clustering = kmeans_1d(&scores, k)?;
    Ok(ClusterModel {
        k,
        centroids: clustering.centroids,
        boundaries: clustering.boundaries,
        sse: clustering.sse,
        scores: countries.iter().copied().zip(scores).collect(),
        assignment: countries.into_iter().zip(clustering.labels).collect(),
        diagnostics,
        warnings,
    })
}

/// Cluster id for every country of `table`.
pub fn assign_countries<T>(table: &HofstedeTable, model: &ClusterModel<T>) -> Result<BTreeMap<CountryCode, usize>> {
    table
        .profiles
        .keys()
        .map(|c| {
            model
                .assignment
                .get(c)
                .map(|&id| (*c, id))
                .ok_or_else(|| Error::UnknownCountry(c.to_string()))
        })
        .collect()
}

/// An event with its culture cluster and, once categorized, its top
/// category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledEvent {
    pub event: EventRecord,
    pub cluster: usize,
    pub top_category: Option<CategoryLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnlabeledEvent {
    pub id: String,
    pub country: CountryCode,
}

#[derive(Debug, Clone, Default)]
pub struct Labeling {
    pub labeled: Vec<LabeledEvent>,
    pub unlabeled: Vec<UnlabeledEvent>,
}

pub fn label_events(events: &[EventRecord], assignment: &BTreeMap<CountryCode, usize>) -> Labeling {
    let mut out = Labeling::default();
    for e in events {
        match assignment.get(&e.country()) {
            Some(&cluster) => out.labeled.push(LabeledEvent {
                event: e.clone(),
                cluster,
                top_category: None,
            }),
            None => out.unlabeled.push(UnlabeledEvent {
                id: e.id.clone(),
                country: e.country(),
            }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterShare {
    pub cluster: usize,
    pub count: usize,
    pub percent: f64,
}

/// Share of labeled events per cluster, every cluster in `0..k` reported.
pub fn cluster_distribution(labeled: &[LabeledEvent], k: usize) -> Result<Vec<ClusterShare>> {
    if labeled.is_empty() {
        return Err(Error::NoLabeledEvents);
    }
    let mut counts = vec![0usize; k];
    for e in labeled {
        *counts
            .get_mut(e.cluster)
            .ok_or_else(|| Error::InvalidArgument(format!("cluster {} outside 0..{k}", e.cluster)))? += 1;
    }
    let total = labeled.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(cluster, count)| ClusterShare {
            cluster,
            count,
            percent: 100.0 * count as f64 / total,
        })
        .collect())
}

/// CSV `cluster,count,percent`.
pub fn write_distribution<W: Write>(shares: &[ClusterShare], out: W) -> Result<()> {
    let mut writer = csv_writer(out, &["cluster", "count", "percent"])?;
    for s in shares {
        writer.row([s.cluster.to_string(), s.count.to_string(), fmt_float(s.percent)])?;
    }
    writer.finish()
}
