use culture_class::evaluate::{
    cell_seed, compare_embeddings, emit_reports, run_experiment, stratified_split, sweep_features, Dataset,
    EmbeddingFeatures, FeatureSpec, FittedFeatures, NgramFeatures, RunOptions, SweepPlan,
};
use culture_class::featurize::{load_embeddings, EmbeddingTable, NgramKind, Weighting};
use culture_class::models::{LogregParams, ModelSpec, NaiveBayesParams};
use culture_class::synth::{pipeline_dataset, SynthCorpus, Variant};
use culture_class::Error;

fn corpus(variant: Variant) -> (Dataset, usize) {
    pipeline_dataset(&SynthCorpus::new(6, 100, variant, 17)).unwrap()
}

fn logreg() -> ModelSpec {
    ModelSpec::Logreg(LogregParams::default())
}

fn word_features(top_k: usize) -> FeatureSpec {
    FeatureSpec::Ngrams(NgramFeatures {
        top_k,
        ..Default::default()
    })
}

fn table(corpus: &SynthCorpus) -> EmbeddingTable<f64> {
    load_embeddings(corpus.embeddings_text(16).as_bytes()).unwrap().table
}

#[test]
fn cell_seed_is_splitmix64() {
    // reference splitmix64 stream from state 0
    assert_eq!(cell_seed(0, 0), 0xe220a8397b1dcdaf);
    assert_eq!(cell_seed(0, 1), 0x6e789e6aa1b965f4);
    assert_eq!(cell_seed(0, 2), 0x06c45d188009454f);
}

#[test]
fn pipeline_recovers_six_clusters() {
    let (ds, k) = corpus(Variant::TextDetermined);
    assert_eq!(k, 6);
    assert_eq!(ds.len(), 600);
    assert_eq!(ds.classes(), (0..6).collect::<Vec<_>>());
}

#[test]
fn separable_corpus_logreg_word_ngrams() {
    let (ds, _) = corpus(Variant::TextDetermined);
    let split = stratified_split(&ds.labels(), 0.8, 7).unwrap();
    let exp = run_experiment::<f64>(
        &ds,
        &word_features(2000),
        &logreg(),
        &split,
        None,
        7,
        RunOptions::default(),
    )
    .unwrap();
    assert!(exp.report.metrics.accuracy >= 0.95, "{}", exp.report.metrics.accuracy);
    assert!(exp.report.metadata.vocab_size.unwrap() <= 2000);
    assert_eq!(exp.predictions.len(), split.test.len());
}

#[test]
fn category_feature_decides_category_determined_corpus() {
    let c = SynthCorpus::new(6, 100, Variant::CategoryDetermined, 17);
    let (ds, _) = pipeline_dataset(&c).unwrap();
    let split = stratified_split(&ds.labels(), 0.8, 3).unwrap();
    let t = table(&c);
    let cmp = compare_embeddings(&ds, &t, &logreg(), &split, 3, RunOptions::default()).unwrap();
    assert_eq!(cmp.with_category.metrics.accuracy, 1.0);
    assert_eq!(cmp.f1_with_category(), 1.0);
    assert!(cmp.f1_without_category() < 0.5);
}

#[test]
fn single_category_label_set_changes_nothing() {
    let c = SynthCorpus::new(3, 40, Variant::TextDetermined, 5);
    let (mut ds, _) = pipeline_dataset(&c).unwrap();
    for e in &mut ds.examples {
        e.category = culture_class::categorize::CategoryLabel::Science;
    }
    let split = stratified_split(&ds.labels(), 0.8, 1).unwrap();
    let cmp = compare_embeddings(&ds, &table(&c), &logreg(), &split, 1, RunOptions::default()).unwrap();
    assert_eq!(
        cmp.with_category.metrics.accuracy,
        cmp.without_category.metrics.accuracy
    );
}

#[test]
fn single_class_train_split_is_degenerate() {
    let (mut ds, _) = corpus(Variant::TextDetermined);
    ds.examples.truncate(20);
    let split = stratified_split(&ds.labels(), 0.5, 1).unwrap();
    let err = run_experiment::<f64>(
        &ds,
        &word_features(100),
        &logreg(),
        &split,
        None,
        1,
        RunOptions::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("train"));
    let mut source: &dyn std::error::Error = &err;
    while let Some(s) = source.source() {
        source = s;
    }
    assert!(source.to_string().contains("degenerate training labels"), "{err}");
    let nb = ModelSpec::NaiveBayes(NaiveBayesParams::default());
    assert!(run_experiment::<f64>(&ds, &word_features(100), &nb, &split, None, 1, RunOptions::default()).is_ok());
}

#[test]
fn reports_are_byte_identical() {
    let (ds, _) = corpus(Variant::TextDetermined);
    let split = stratified_split(&ds.labels(), 0.8, 11).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut outputs = Vec::new();
    for d in &dirs {
        let exp = run_experiment::<f64>(
            &ds,
            &word_features(500),
            &logreg(),
            &split,
            None,
            11,
            RunOptions::default(),
        )
        .unwrap();
        let files = emit_reports(&exp.report, d.path()).unwrap();
        let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_owned()).collect();
        assert_eq!(names, ["report.json", "confusion.csv"]);
        outputs.push(files.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(outputs[0], outputs[1]);
    let confusion = String::from_utf8(outputs[0][1].clone()).unwrap();
    assert!(confusion.starts_with("true,pred_0,pred_1,pred_2,pred_3,pred_4,pred_5\n"));
}

#[test]
fn naive_bayes_gets_counts() {
    let (ds, _) = corpus(Variant::TextDetermined);
    let split = stratified_split(&ds.labels(), 0.8, 2).unwrap();
    let nb = ModelSpec::NaiveBayes(NaiveBayesParams::default());
    let exp = run_experiment::<f64>(&ds, &word_features(1000), &nb, &split, None, 2, RunOptions::default()).unwrap();
    match exp.report.metadata.features {
        FeatureSpec::Ngrams(f) => assert_eq!(f.weighting, Weighting::Counts),
        _ => unreachable!(),
    }
    assert!(exp.report.metrics.accuracy >= 0.95);
}

#[test]
fn vocabulary_sees_only_train_rows() {
    let (ds, _) = corpus(Variant::TextDetermined);
    let split = stratified_split(&ds.labels(), 0.8, 4).unwrap();
    let spec = word_features(300);
    let base = FittedFeatures::<f64>::fit(&spec, &ds, &split.train, None).unwrap();

    // drop each of a few test documents and refit on the same train rows
    for &gone in split.test.iter().take(5) {
        let mut smaller = ds.clone();
        smaller.examples.remove(gone);
        let train: Vec<usize> = split.train.iter().map(|&i| if i > gone { i - 1 } else { i }).collect();
        let refit = FittedFeatures::<f64>::fit(&spec, &smaller, &train, None).unwrap();
        assert_eq!(base.vocabulary(), refit.vocabulary());
    }
}

fn small_plan() -> SweepPlan {
    SweepPlan {
        models: vec![logreg(), ModelSpec::NaiveBayes(NaiveBayesParams::default())],
        feature_kinds: vec![NgramKind::Word],
        n_ranges: vec![(1, 2)],
        top_k: vec![50, 100_000],
        ..Default::default()
    }
}

#[test]
fn sweep_rows_follow_the_plan() {
    let (ds, _) = corpus(Variant::TextDetermined);
    let split = stratified_split(&ds.labels(), 0.8, 9).unwrap();
    let plan = small_plan();
    let t = sweep_features::<f64>(&ds, &plan, &split, None, 9, false).unwrap();
    assert_eq!(t.rows.len(), 4);
    let order: Vec<(&str, Option<usize>)> = t.rows.iter().map(|r| (r.model.as_str(), r.top_k)).collect();
    assert_eq!(
        order,
        [
            ("logreg", Some(50)),
            ("logreg", Some(100_000)),
            ("naive_bayes", Some(50)),
            ("naive_bayes", Some(100_000))
        ]
    );
    for r in &t.rows {
        assert!(r.error.is_none(), "{:?}", r.error);
        assert!(r.vocab_size.unwrap() <= r.top_k.unwrap());
    }
    // truncated cells match a standalone experiment with the same seed
    let exp = run_experiment::<f64>(
        &ds,
        &FeatureSpec::Ngrams(NgramFeatures {
            n_min: 1,
            n_max: 2,
            top_k: 50,
            ..Default::default()
        }),
        &logreg(),
        &split,
        None,
        t.rows[0].seed,
        RunOptions::default(),
    )
    .unwrap();
    assert_eq!(Some(exp.report.metrics.macro_f1), t.rows[0].macro_f1);
}

#[test]
fn parallel_sweep_matches_serial() {
    let (ds, _) = corpus(Variant::TextDetermined);
    let split = stratified_split(&ds.labels(), 0.8, 9).unwrap();
    let mut plan = small_plan();
    plan.feature_kinds.push(NgramKind::Char);
    let serial = sweep_features::<f64>(&ds, &plan, &split, None, 9, false).unwrap();
    let parallel = sweep_features::<f64>(&ds, &plan, &split, None, 9, true).unwrap();
    assert_eq!(serial, parallel);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (x, y) in emit_reports(&serial, a.path())
        .unwrap()
        .iter()
        .zip(emit_reports(&parallel, b.path()).unwrap())
    {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    let csv = std::fs::read_to_string(a.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("model,feature_kind,n_range,top_k,macro_f1,accuracy\n"));
}

#[test]
fn failed_cells_are_recorded() {
    let (ds, _) = corpus(Variant::TextDetermined);
    let split = stratified_split(&ds.labels(), 0.8, 9).unwrap();
    let plan = SweepPlan {
        models: vec![logreg()],
        feature_kinds: vec![NgramKind::Word],
        n_ranges: vec![(1, 1)],
        top_k: vec![10],
        embeddings: vec![EmbeddingFeatures { use_category: false }],
        ..Default::default()
    };
    // embedding cell has no table
    let t = sweep_features::<f64>(&ds, &plan, &split, None, 1, false).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert!(t.rows[0].error.is_none());
    assert!(t.rows[1].error.as_deref().unwrap().contains("embeddings"));
    assert!(t.rows[1].macro_f1.is_none());
}

#[test]
fn empty_plan_is_rejected() {
    let (ds, _) = corpus(Variant::TextDetermined);
    let split = stratified_split(&ds.labels(), 0.8, 9).unwrap();
    let plan = SweepPlan {
        models: vec![],
        ..Default::default()
    };
    assert!(matches!(
        sweep_features::<f64>(&ds, &plan, &split, None, 1, false),
        Err(Error::Empty(_))
    ));
}
