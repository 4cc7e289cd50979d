use std::path::Path;

use topicflow::config::{EmbedOn, PipelineConfig, DEFAULTS_TOML};
use topicflow::Error;
use topicflow_core::ProviderKind;

#[test]
fn printed_defaults_parse_to_defaults() {
    assert_eq!(PipelineConfig::from_toml(DEFAULTS_TOML).unwrap(), PipelineConfig::default());
    assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
}

#[test]
fn missing_corpus_path_is_one_error() {
    let errs = PipelineConfig::default().validate();
    assert_eq!(errs, vec!["corpus.path: required".to_string()]);
    assert!(PipelineConfig::default().validate_for(false).is_empty());
}

#[test]
fn range_errors_are_all_reported() {
    let c = PipelineConfig::from_toml(
        r#"
        workers = 0
        [corpus]
        path = "x.jsonl"
        start = "2023-10-01"
        end = "2023-09-01"
        [cluster]
        min_samples = 0
        min_cluster_size = 1
        [reduce]
        min_dist = 5.0
        [represent]
        strategy = "nearest"
        [embedding]
        kind = "http"
        "#,
    )
    .unwrap();
    let errs = c.validate();
    for key in [
        "workers:",
        "corpus.start:",
        "cluster.min_samples:",
        "cluster.min_cluster_size:",
        "reduce.min_dist:",
        "represent.strategy:",
        "embedding: location",
    ] {
        assert!(errs.iter().any(|e| e.starts_with(key)), "missing {key} in {errs:#?}");
    }
    assert_eq!(errs.len(), 7, "{errs:#?}");
    match c.validated(true) {
        Err(e @ Error::Config(_)) => assert_eq!(e.exit_code(), 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn min_samples_zero_alone() {
    let c = PipelineConfig::from_toml("[corpus]\npath = \"p\"\n[cluster]\nmin_samples = 0\n").unwrap();
    assert_eq!(c.validate(), vec!["cluster.min_samples: must be at least 1 (got 0)".to_string()]);
}

#[test]
fn unknown_keys_and_bad_values_fail_to_parse() {
    assert!(matches!(PipelineConfig::from_toml("[cluster]\nmin_sample = 3\n"), Err(Error::Config(_))));
    assert!(PipelineConfig::from_toml("[cleaning]\nembed_on = \"both\"\n").is_err());
    assert!(PipelineConfig::from_toml("[embedding]\nkind = \"grpc\"\n").is_err());
}

#[test]
fn half_open_date_window() {
    let c = PipelineConfig::from_toml("[corpus]\npath = \"p\"\nstart = \"2023-01-01\"\n").unwrap();
    assert_eq!(c.validate(), vec!["corpus.start, corpus.end: set both or neither".to_string()]);
    let c = PipelineConfig::from_toml("[corpus]\npath = \"p\"\nstart = \"soon\"\nend = \"2023-01-01\"\n").unwrap();
    assert_eq!(c.validate().len(), 1);
}

#[test]
fn relative_paths_follow_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.toml");
    std::fs::write(
        &p,
        "out_dir = \"results\"\n[corpus]\npath = \"data/posts.jsonl\"\nkeywords = \"/abs/k.txt\"\n[embedding]\nkind = \"file\"\nlocation = \"vec.bin\"\n[cleaning]\nembed_on = \"raw\"\n[cleaning.stopword_files]\nes = \"es.txt\"\n",
    )
    .unwrap();
    let c = PipelineConfig::load(&p).unwrap();
    assert_eq!(c.out_dir, dir.path().join("results"));
    assert_eq!(c.corpus.path.as_deref(), Some(dir.path().join("data/posts.jsonl").as_path()));
    assert_eq!(c.corpus.keywords.as_deref(), Some(Path::new("/abs/k.txt")));
    assert_eq!(c.embedding.kind, ProviderKind::File);
    assert_eq!(c.embedding.location, Some(dir.path().join("vec.bin").display().to_string()));
    assert_eq!(c.cleaning.stopword_files["es"], dir.path().join("es.txt"));
    assert_eq!(c.cleaning.embed_on, EmbedOn::Raw);
}

#[test]
fn derived_settings() {
    let c = PipelineConfig::from_toml("seed = 11\n[embedding]\nseed = 3\n[represent]\nextra_stopwords = [\"RT\"]\nstrategy = \"distributions\"\nwindow = 6\n").unwrap();
    assert_eq!(c.embedding_spec().seed, 3);
    assert_eq!(c.reduce_config().seed, 11);
    let rules = c.cleaning_rules().unwrap();
    let r = c.representation_params(&rules);
    assert!(r.stop.stopwords.contains("rt") && r.stop.stopwords.contains("the"));
    assert_eq!(r.strategy, topicflow_core::topics::OutlierStrategy::Distributions { window: 6, stride: 1 });
    let d = PipelineConfig::default();
    assert_eq!(d.embedding_spec().seed, d.seed);
    assert_eq!(d.labeling.model, "gpt-4-turbo-preview");
    assert_eq!(d.labeling.temperature, 0.0);
    assert_eq!(d.labeling.concurrency, 4);
}
