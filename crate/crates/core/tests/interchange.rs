//! Embedding files in the interchange format written by the external
//! sentence-encoder exporter.

mod common;

use std::collections::BTreeSet;

use common::fixture;
use lextrace::cli::run;
use lextrace::corpus::Corpus;
use lextrace::embeddings::{cosine, load_embedding_set, EmbeddingSet, SimilarityMatrix};
use lextrace::Error;
use serde::Deserialize;

#[derive(Deserialize)]
struct CosinePair {
    a: String,
    b: String,
    cosine: f64,
}

fn pairs() -> Vec<CosinePair> {
    serde_json::from_str(&std::fs::read_to_string(fixture("exporter_cosines.json")).unwrap()).unwrap()
}

#[test]
fn exported_ids_cover_the_corpus_exactly() {
    let corpus = Corpus::load(fixture("corpus.json")).unwrap();
    let set = load_embedding_set(fixture("exporter_embeddings.json")).unwrap();
    assert_eq!(set.dim(), 12);
    assert_eq!(set.provider(), "exporter:fixture");
    let expected: BTreeSet<String> = corpus
        .requirements()
        .map(|r| r.id.clone())
        .chain(corpus.provision_codes())
        .collect();
    let got: BTreeSet<String> = set.ids().map(String::from).collect();
    assert_eq!(got, expected);
}

#[test]
fn cosines_agree_with_the_exporter() {
    let set = load_embedding_set(fixture("exporter_embeddings.json")).unwrap();
    let pairs = pairs();
    assert_eq!(pairs.len(), 10);
    for p in pairs {
        let got = cosine(set.require(&p.a).unwrap(), set.require(&p.b).unwrap()).unwrap();
        assert!((got - p.cosine).abs() <= 1e-6, "{} / {}: {got} vs {}", p.a, p.b, p.cosine);
    }
}

#[test]
fn similarity_command_reads_the_exported_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let status = run([
        "lextrace",
        "similarity",
        "--corpus",
        fixture("corpus.json").to_str().unwrap(),
        "--embeddings",
        fixture("exporter_embeddings.json").to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status, 0);
    let m = SimilarityMatrix::from_json(&std::fs::read_to_string(out.join("similarity.json")).unwrap()).unwrap();
    for p in pairs() {
        let got = m.score(&p.a, &p.b).unwrap();
        assert!((got - p.cosine).abs() <= 1e-6, "{} / {}", p.a, p.b);
    }
}

#[test]
fn malformed_interchange_files_are_rejected() {
    let ragged = r#"{"format_version": 1, "dim": 2, "provider": "x", "vectors": {"a": [1.0, 0.0], "b": [1.0]}}"#;
    assert!(matches!(
        EmbeddingSet::from_json(ragged).unwrap_err(),
        Error::DimensionMismatch { .. }
    ));
    let future = r#"{"format_version": 99, "dim": 1, "provider": "x", "vectors": {"a": [1.0]}}"#;
    assert!(EmbeddingSet::from_json(future).is_err());
    let not_finite = r#"{"format_version": 1, "dim": 1, "provider": "x", "vectors": {"a": [null]}}"#;
    assert!(EmbeddingSet::from_json(not_finite).is_err());
}
