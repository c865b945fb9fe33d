//! One function per subcommand; each writes its artifacts into `out`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use culture_class::categorize::{
    assign_top_categories, category_frequencies, filter_by_category, shared_categories, write_frequencies,
};
use culture_class::error::StageContext;
use culture_class::evaluate::{
    compare_embeddings, cross_validate, run_experiment, stratified_kfold, stratified_split, sweep_features, Dataset,
    Emit, FeatureSpec, FittedFeatures, RunOptions, Split,
};
use culture_class::export::{csv_writer, to_json};
use culture_class::featurize::{load_embeddings, EmbeddingTable};
use culture_class::ingest::{
    corpus_stats, parse_events, parse_hofstede_table, write_rejects, write_skipped, HofstedeTable, ParsedEvents,
};
use culture_class::label::{
    assign_countries, cluster_distribution, fit_cluster_model, label_events, write_distribution, ClusterModel, Labeling,
};
use culture_class::models::{fit, save_model, ModelSpec};
use culture_class::Error;

use crate::config::RunConfig;
use crate::manifest::OutputDir;
use crate::CliError;

type Outcome<T> = std::result::Result<T, CliError>;

fn pipeline<T>(r: culture_class::Result<T>) -> Outcome<T> {
    r.map_err(CliError::Pipeline)
}

fn open(path: &PathBuf) -> Outcome<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Input(Error::at_path(path, e)))
}

fn buffer(f: impl FnOnce(&mut Vec<u8>) -> culture_class::Result<()>) -> Outcome<Vec<u8>> {
    let mut buf = Vec::new();
    pipeline(f(&mut buf))?;
    Ok(buf)
}

pub fn load_events(cfg: &RunConfig, out: &mut OutputDir) -> Outcome<ParsedEvents> {
    let parsed = parse_events(open(&cfg.paths.events)?).map_err(|e| CliError::Input(e.in_stage("ingest events")))?;
    if !parsed.rejects.is_empty() {
        log::warn!("{} event line(s) rejected, see rejects.csv", parsed.rejects.len());
    }
    out.write("rejects.csv", &buffer(|b| write_rejects(&parsed.rejects, b))?)?;
    log::info!("{} events loaded", parsed.events.len());
    Ok(parsed)
}

pub fn load_hofstede(cfg: &RunConfig, out: &mut OutputDir) -> Outcome<HofstedeTable> {
    let table =
        parse_hofstede_table(open(&cfg.paths.hofstede)?).map_err(|e| CliError::Input(e.in_stage("ingest hofstede")))?;
    if !table.skipped.is_empty() {
        log::warn!(
            "{} Hofstede row(s) skipped, see hofstede_skipped.csv",
            table.skipped.len()
        );
    }
    out.write("hofstede_skipped.csv", &buffer(|b| write_skipped(&table.skipped, b))?)?;
    Ok(table)
}

pub fn load_embedding_table(cfg: &RunConfig) -> Outcome<EmbeddingTable<f64>> {
    let Some(path) = &cfg.paths.embeddings else {
        return Err(CliError::Config("this run needs `paths.embeddings`".into()));
    };
    let loaded =
        load_embeddings::<f64, _>(open(path)?).map_err(|e| CliError::Input(e.in_stage("ingest embeddings")))?;
    for w in &loaded.warnings {
        log::warn!("embeddings: {w}");
    }
    Ok(loaded.table)
}

pub fn stats(cfg: &RunConfig, out: &mut OutputDir) -> Outcome<()> {
    let parsed = load_events(cfg, out)?;
    let stats = corpus_stats(&parsed.events);
    out.write("corpus_stats.csv", &buffer(|b| stats.write_csv(b))?)?;
    log::info!(
        "{} events, {} sources, {} countries",
        stats.total,
        stats.by_source.len(),
        stats.distinct_countries
    );
    Ok(())
}

pub struct Labeled {
    pub model: ClusterModel<f64>,
    pub labeling: Labeling,
}

pub fn label(cfg: &RunConfig, out: &mut OutputDir) -> Outcome<Labeled> {
    let parsed = load_events(cfg, out)?;
    let table = load_hofstede(cfg, out)?;
    let model = pipeline(fit_cluster_model::<f64>(&table, cfg.labeling.k).stage("label"))?;
    for w in &model.warnings {
        log::warn!("{w}");
    }
    let assignment = pipeline(assign_countries(&table, &model).stage("label"))?;
    let labeling = label_events(&parsed.events, &assignment);
    if labeling.labeled.is_empty() {
        return Err(CliError::Pipeline(Error::NoLabeledEvents.in_stage("label")));
    }
    log::info!(
        "k = {}; {} events labeled, {} without a Hofstede profile",
        model.k,
        labeling.labeled.len(),
        labeling.unlabeled.len()
    );

    out.write("cluster_model.json", pipeline(to_json(&model))?.as_bytes())?;
    let shares = pipeline(cluster_distribution(&labeling.labeled, model.k))?;
    out.write("distribution.csv", &buffer(|b| write_distribution(&shares, b))?)?;
    let labels = buffer(|b| {
        let mut w = csv_writer(b, &["id", "country", "cluster"])?;
        for e in &labeling.labeled {
            w.row([e.event.id.as_str(), e.event.country().as_str(), &e.cluster.to_string()])?;
        }
        w.finish()
    })?;
    out.write("labels.csv", &labels)?;
    let unlabeled = buffer(|b| {
        let mut w = csv_writer(b, &["id", "country"])?;
        for u in &labeling.unlabeled {
            w.row([u.id.as_str(), u.country.as_str()])?;
        }
        w.finish()
    })?;
    out.write("unlabeled.csv", &unlabeled)?;
    Ok(Labeled { model, labeling })
}

pub fn analyze(cfg: &RunConfig, out: &mut OutputDir) -> Outcome<()> {
    let Labeled { model, mut labeling } = label(cfg, out)?;
    pipeline(assign_top_categories(&mut labeling.labeled).stage("categorize"))?;
    let kept = filter_by_category(labeling.labeled, &cfg.categories);
    let freqs = pipeline(category_frequencies(&kept, model.k))?;
    out.write("category_frequencies.csv", &buffer(|b| write_frequencies(&freqs, b))?)?;
    let shared = pipeline(shared_categories(&kept, model.k))?;
    out.write(
        "shared_categories.json",
        pipeline(to_json(&shared.to_tree()))?.as_bytes(),
    )?;
    Ok(())
}

/// Label, categorize, filter and build the classification dataset.
pub fn dataset(cfg: &RunConfig, out: &mut OutputDir) -> Outcome<Dataset> {
    let Labeled { mut labeling, .. } = label(cfg, out)?;
    pipeline(assign_top_categories(&mut labeling.labeled).stage("categorize"))?;
    let kept = filter_by_category(labeling.labeled, &cfg.categories);
    let ds = pipeline(Dataset::from_labeled(&kept, cfg.text_field).stage("categorize"))?;
    if ds.len() < 2 {
        return Err(CliError::Pipeline(Error::NoLabeledEvents.in_stage("categorize")));
    }
    log::info!(
        "{} events in {} classes after the category filter",
        ds.len(),
        ds.classes().len()
    );
    Ok(ds)
}

fn needs_embeddings(cfg: &RunConfig) -> bool {
    matches!(cfg.features, FeatureSpec::Embeddings(_))
}

fn embeddings_for(cfg: &RunConfig, wanted: bool) -> Outcome<Option<EmbeddingTable<f64>>> {
    if wanted {
        load_embedding_table(cfg).map(Some)
    } else {
        Ok(None)
    }
}

/// `name` directly in the output directory for a single model, else
/// under a per-family subdirectory.
fn model_path(cfg: &RunConfig, model: &ModelSpec, name: &str) -> PathBuf {
    if cfg.models.len() == 1 {
        PathBuf::from(name)
    } else {
        PathBuf::from(model.family()).join(name)
    }
}

pub fn train(cfg: &RunConfig, out: &mut OutputDir) -> Outcome<()> {
    let ds = dataset(cfg, out)?;
    let table = embeddings_for(cfg, needs_embeddings(cfg))?;
    let all: Vec<usize> = (0..ds.len()).collect();
    let labels = ds.labels();
    for model in &cfg.models {
        let features = cfg.features.for_model(model);
        let fitted = pipeline(FittedFeatures::fit(&features, &ds, &all, table.as_ref()).stage("featurize"))?;
        let x = pipeline(fitted.transform(&ds, &all).stage("featurize"))?;
        if model.is_discriminative() && labels.iter().collect::<BTreeSet<_>>().len() < 2 {
            return Err(CliError::Pipeline(
                Error::DegenerateLabels(format!("{} needs at least 2 classes", model.family())).in_stage("train"),
            ));
        }
        let trained = pipeline(fit(model, &x, &labels, cfg.seed).stage("train"))?.with_feature_space(fitted.space());
        out.write(model_path(cfg, model, "model.json"), &pipeline(save_model(&trained))?)?;
        if let Some(vocab) = fitted.vocabulary() {
            out.write(
                model_path(cfg, model, "vocabulary.csv"),
                &buffer(|b| vocab.write_csv(b))?,
            )?;
        }
        log::info!(
            "trained {} on {} events, {} features",
            model.family(),
            ds.len(),
            fitted.dim()
        );
    }
    Ok(())
}

fn split_for(cfg: &RunConfig, ds: &Dataset) -> Outcome<Split> {
    pipeline(stratified_split(&ds.labels(), cfg.split.ratio, cfg.seed).stage("split"))
}

fn emit_into(out: &mut OutputDir, item: &impl Emit, dir: PathBuf) -> Outcome<()> {
    for (name, bytes) in pipeline(item.render())? {
        out.write(dir.join(name), &bytes)?;
    }
    Ok(())
}

pub fn evaluate(cfg: &RunConfig, out: &mut OutputDir, options: RunOptions) -> Outcome<()> {
    let ds = dataset(cfg, out)?;
    let table = embeddings_for(cfg, needs_embeddings(cfg))?;
    let split = split_for(cfg, &ds)?;
    out.write("split.json", pipeline(to_json(&split))?.as_bytes())?;
    for model in &cfg.models {
        let exp = pipeline(run_experiment(
            &ds,
            &cfg.features,
            model,
            &split,
            table.as_ref(),
            cfg.seed,
            options,
        ))?;
        let m = &exp.report.metrics;
        log::info!(
            "{}: accuracy {:.4}, macro-F1 {:.4}, weighted-F1 {:.4}",
            model.family(),
            m.accuracy,
            m.macro_f1,
            m.weighted_f1
        );
        for flag in &m.zero_division {
            log::warn!("{}: {flag} had a zero denominator and is reported as 0", model.family());
        }
        let dir = model_path(cfg, model, "");
        emit_into(out, &exp.report, dir.clone())?;
        let predictions = buffer(|b| {
            let mut w = csv_writer(b, &["id", "true", "predicted"])?;
            for p in &exp.predictions {
                w.row([p.id.clone(), p.truth.to_string(), p.predicted.to_string()])?;
            }
            w.finish()
        })?;
        out.write(dir.join("predictions.csv"), &predictions)?;

        if let Some(folds) = cfg.split.folds {
            let splits = pipeline(stratified_kfold(&ds.labels(), folds, cfg.seed).stage("split"))?;
            let cv = pipeline(cross_validate(
                &ds,
                &cfg.features,
                model,
                &splits,
                table.as_ref(),
                cfg.seed,
                options,
            ))?;
            log::info!("{}: {folds}-fold mean macro-F1 {:.4}", model.family(), cv.mean_macro_f1);
            emit_into(out, &cv, dir)?;
        }
    }
    Ok(())
}

pub fn sweep(cfg: &RunConfig, out: &mut OutputDir) -> Outcome<()> {
    let ds = dataset(cfg, out)?;
    let table = embeddings_for(cfg, !cfg.sweep.embeddings.is_empty())?;
    let split = split_for(cfg, &ds)?;
    let result = pipeline(sweep_features(
        &ds,
        &cfg.sweep,
        &split,
        table.as_ref(),
        cfg.seed,
        cfg.parallel,
    ))?;
    let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} sweep cells failed, see sweep.json", result.rows.len());
    }
    emit_into(out, &result, PathBuf::new())
}

pub fn compare(cfg: &RunConfig, out: &mut OutputDir, options: RunOptions) -> Outcome<()> {
    let ds = dataset(cfg, out)?;
    let table = load_embedding_table(cfg)?;
    let split = split_for(cfg, &ds)?;
    let model = &cfg.models[0];
    let cmp = pipeline(compare_embeddings(&ds, &table, model, &split, cfg.seed, options))?;
    log::info!(
        "{}: macro-F1 {:.4} with category, {:.4} without",
        model.family(),
        cmp.f1_with_category(),
        cmp.f1_without_category()
    );
    emit_into(out, &cmp, PathBuf::new())
}
