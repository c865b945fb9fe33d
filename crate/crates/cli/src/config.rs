//! JSON run configuration: strict keys, defaults materialized on parse.

use std::fs;
use std::path::{Path, PathBuf};

use culture_class::categorize::CategoryLabel;
use culture_class::evaluate::{FeatureSpec, SweepPlan, TextField};
use culture_class::label::KChoice;
use culture_class::models::{LogregParams, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub events: PathBuf,
    pub hofstede: PathBuf,
    pub embeddings: Option<PathBuf>,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelingConfig {
    pub k: KChoice,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        LabelingConfig {
            k: KChoice::Range { k_min: 2, k_max: 10 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub ratio: f64,
    /// Stratified k-fold cross-validation in addition to the holdout split.
    pub folds: Option<usize>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            ratio: 0.8,
            folds: None,
        }
    }
}

/// A validated configuration. Paths are absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub seed: u64,
    pub labeling: LabelingConfig,
    pub categories: Vec<CategoryLabel>,
    pub text_field: TextField,
    pub features: FeatureSpec,
    pub models: Vec<ModelSpec>,
    pub split: SplitConfig,
    pub sweep: SweepPlan,
    pub parallel: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawPaths {
    events: Option<PathBuf>,
    hofstede: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    paths: RawPaths,
    seed: Option<u64>,
    labeling: LabelingConfig,
    categories: Vec<CategoryLabel>,
    text_field: TextField,
    features: FeatureSpec,
    models: Vec<ModelSpec>,
    split: SplitConfig,
    sweep: SweepPlan,
    parallel: bool,
}

impl Default for RawConfig {
    fn default() -> Self {
        RawConfig {
            paths: RawPaths::default(),
            seed: None,
            labeling: LabelingConfig::default(),
            categories: CategoryLabel::content(),
            text_field: TextField::default(),
            features: FeatureSpec::default(),
            models: vec![ModelSpec::Logreg(LogregParams::default())],
            split: SplitConfig::default(),
            sweep: SweepPlan::default(),
            parallel: true,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn absolute(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

/// Parse and validate config text. Relative paths resolve against `base`
/// (the config file's directory).
pub fn parse_config_str(text: &str, base: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
    let mut problems = Vec::new();

    let output = overrides.output.clone().or(raw.paths.output.map(|p| absolute(base, p)));
    let required = |name: &str, p: Option<PathBuf>, problems: &mut Vec<String>| -> PathBuf {
        match p {
            None => {
                problems.push(format!("missing required path `paths.{name}`"));
                PathBuf::new()
            }
            Some(p) => {
                let p = absolute(base, p);
                if !p.is_file() {
                    problems.push(format!("{name} file not found: {}", p.display()));
                }
                p
            }
        }
    };
    let events = required("events", raw.paths.events, &mut problems);
    let hofstede = required("hofstede", raw.paths.hofstede, &mut problems);
    let embeddings = raw
        .paths
        .embeddings
        .map(|p| required("embeddings", Some(p), &mut problems));
    if output.is_none() {
        problems.push("missing required path `paths.output`".into());
    }
    let seed = overrides.seed.or(raw.seed);
    if seed.is_none() {
        problems.push("missing `seed` (set it in the config or pass --seed)".into());
    }

    let ratio = raw.split.ratio;
    if !(ratio > 0.0 && ratio < 1.0) {
        problems.push(format!("split.ratio must be in (0, 1), got {ratio}"));
    }
    if raw.split.folds.is_some_and(|f| f < 2) {
        problems.push("split.folds must be >= 2".into());
    }
    match raw.labeling.k {
        KChoice::Fixed(0) => problems.push("labeling.k fixed must be >= 1".into()),
        KChoice::Range { k_min, k_max } if k_min < 2 || k_min > k_max => problems.push(format!(
            "labeling.k range needs 2 <= k_min <= k_max, got {k_min}..{k_max}"
        )),
        _ => {}
    }
    if raw.categories.is_empty() {
        problems.push("categories must not be empty".into());
    }
    if raw.models.is_empty() {
        problems.push("models must not be empty".into());
    }
    let mut families = std::collections::BTreeSet::new();
    for m in &raw.models {
        if !families.insert(m.family()) {
            problems.push(format!("model family {} listed twice", m.family()));
        }
        if let Err(e) = m.validate() {
            problems.push(format!("model {}: {e}", m.family()));
        }
    }
    if let Err(e) = raw.features.validate() {
        problems.push(format!("features: {e}"));
    }
    if let Err(e) = raw.sweep.validate() {
        problems.push(format!("sweep: {e}"));
    }
    if !problems.is_empty() {
        return Err(CliError::Config(problems.join("; ")));
    }

    let mut categories = raw.categories;
    categories.sort();
    categories.dedup();
    Ok(RunConfig {
        paths: Paths {
            events,
            hofstede,
            embeddings,
            output: output.unwrap(),
        },
        seed: seed.unwrap(),
        labeling: raw.labeling,
        categories,
        text_field: raw.text_field,
        features: raw.features,
        models: raw.models,
        split: raw.split,
        sweep: raw.sweep,
        parallel: raw.parallel,
    })
}

pub fn parse_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let base = std::path::absolute(&base).unwrap_or(base);
    parse_config_str(&text, &base, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn inputs() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("events.jsonl"), "").unwrap();
        fs::write(dir.path().join("hofstede.csv"), "").unwrap();
        dir
    }

    const MINIMAL: &str =
        r#"{"paths": {"events": "events.jsonl", "hofstede": "hofstede.csv", "output": "out"}, "seed": 7}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = inputs();
        let c = parse_config_str(MINIMAL, dir.path(), &Overrides::default()).unwrap();
        assert_eq!(c.split.ratio, 0.8);
        assert_eq!(c.labeling.k, KChoice::Range { k_min: 2, k_max: 10 });
        let FeatureSpec::Ngrams(f) = c.features else { panic!() };
        assert_eq!((f.n_min, f.n_max, f.top_k), (1, 3, 10_000));
        assert_eq!(c.categories.len(), 11);
        assert_eq!(c.paths.output, dir.path().join("out"));
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn typo_key_is_named() {
        let dir = inputs();
        let text = MINIMAL.replace("\"seed\"", "\"modle\": [], \"seed\"");
        let err = parse_config_str(&text, dir.path(), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("modle"), "{err}");
    }

    #[test]
    fn missing_paths_listed_together() {
        let dir = tempfile::tempdir().unwrap();
        let err = parse_config_str(
            r#"{"paths": {"events": "nope.jsonl"}}"#,
            dir.path(),
            &Overrides::default(),
        )
        .unwrap_err()
        .to_string();
        for needle in ["nope.jsonl", "paths.hofstede", "paths.output", "seed"] {
            assert!(err.contains(needle), "{needle} not in {err}");
        }
    }

    #[test]
    fn echo_round_trips() {
        let dir = inputs();
        let c = parse_config_str(MINIMAL, dir.path(), &Overrides::default()).unwrap();
        let echo = serde_json::to_string_pretty(&c).unwrap();
        let again = parse_config_str(&echo, Path::new("/elsewhere"), &Overrides::default()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn overrides_win() {
        let dir = inputs();
        let o = Overrides {
            output: Some(PathBuf::from("/tmp/x")),
            seed: Some(99),
        };
        let c = parse_config_str(MINIMAL, dir.path(), &o).unwrap();
        assert_eq!((c.seed, c.paths.output), (99, PathBuf::from("/tmp/x")));
    }
}
