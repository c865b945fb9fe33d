//! Splitting, metrics, single experiments, sweeps and report files.

mod emit;
mod experiment;
mod metrics;
mod split;
mod sweep;

pub use emit::{confusion_csv, emit_reports, sweep_csv, write_file, Emit, SWEEP_HEADER};
pub use experiment::{
    compare_embeddings, cross_validate, run_experiment, CrossValidation, Dataset, EmbeddingComparison,
    EmbeddingFeatures, EvalReport, Example, Experiment, FeatureSpec, FittedFeatures, NgramFeatures, Prediction,
    RunMetadata, RunOptions, SplitInfo, TextField,
};
pub use metrics::{compute_metrics, micro_f1_from_counts, ClassMetrics, Metrics};
pub use split::{stratified_kfold, stratified_split, Split};
pub use sweep::{sweep_features, SweepPlan, SweepRow, SweepTable};

/// splitmix64 of `master` advanced `index + 1` steps: an independent seed
/// per sweep cell or fold.
pub fn cell_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
