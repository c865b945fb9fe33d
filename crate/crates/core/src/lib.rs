//! Cross-cultural news event classification.
//!
//! Events are labeled with the culture cluster of the country they happened
//! in (countries clustered by their mean Hofstede score), represented by
//! their text and top content category, and classified by one of six model
//! families.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.

pub mod categorize;
pub mod error;
pub mod evaluate;
pub mod export;
pub mod featurize;
pub mod ingest;
pub mod label;
pub mod models;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ClusterModel = label::ClusterModel<f64>;
pub type Clustering = label::Clustering<f64>;
pub type FeatureMatrix = featurize::FeatureMatrix<f64>;
pub type SparseVec = featurize::SparseVec<f64>;
pub type EmbeddingTable = featurize::EmbeddingTable<f64>;
pub type TrainedModel = models::TrainedModel<f64>;
pub type Experiment = evaluate::Experiment<f64>;
