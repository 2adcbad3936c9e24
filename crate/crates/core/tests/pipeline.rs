//! End-to-end pipeline over an on-disk dataset with CoNLL-U parses and a
//! hand-written constraint file.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use graphclust::{
    build_pipeline, constrained_hac, index_constraints, load_corpus, parse_constraints_file,
    run_comparison, DependencySource, Error, ExperimentConfig, StopList,
};

fn write(path: &Path, content: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, content).unwrap();
}

fn chain3(a: &str, b: &str, c: &str) -> String {
    // b is the root, a and c attach to it
    format!(
        "1\t{a}\t_\t_\t_\t_\t2\tnsubj\t_\t_\n\
         2\t{b}\t_\t_\t_\t_\t0\troot\t_\t_\n\
         3\t{c}\t_\t_\t_\t_\t2\tobj\t_\t_\n"
    )
}

fn setup(tmp: &Path) {
    let data = tmp.join("data");
    write(&data.join("sport/a.txt"), "Striker scores goal. Keeper saves shot.");
    write(&data.join("sport/b.txt"), "Defender blocks shot. Striker scores again.");
    write(&data.join("tech/c.txt"), "Compiler builds code. Kernel schedules threads.");
    write(&data.join("tech/d.txt"), "Parser reads code. Compiler emits warnings.");

    let parses = tmp.join("parses");
    let files = [
        ("sport/a", [chain3("striker", "scores", "goal"), chain3("keeper", "saves", "shot")]),
        ("sport/b", [chain3("defender", "blocks", "shot"), chain3("striker", "scores", "again")]),
        ("tech/c", [chain3("compiler", "builds", "code"), chain3("kernel", "schedules", "threads")]),
        ("tech/d", [chain3("parser", "reads", "code"), chain3("compiler", "emits", "warnings")]),
    ];
    for (doc_id, sentences) in files {
        write(
            &parses.join(format!("{doc_id}.conllu")),
            &format!("{}\n{}", sentences[0], sentences[1]),
        );
    }
}

fn config(tmp: &Path) -> ExperimentConfig {
    ExperimentConfig {
        source: DependencySource::Conllu { dir: tmp.join("parses") },
        ..Default::default()
    }
}

#[test]
fn parsed_dependencies_become_graph_edges() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    let corpus = load_corpus(&tmp.path().join("data"), &StopList::default_english()).unwrap();
    let artifacts = build_pipeline(corpus, &config(tmp.path())).unwrap();

    let a = &artifacts.graphs[0];
    assert_eq!(a.doc_id, "sport/a");
    assert!(a.edges.contains(&("goal".to_string(), "scores".to_string())));
    assert!(a.edges.contains(&("scores".to_string(), "striker".to_string())));
    // documents sharing parsed structure score higher within their class
    let m = &artifacts.matrix;
    assert!(m.get(0, 1) > m.get(0, 2), "sport pair should beat cross pair");
}

#[test]
fn constraint_file_drives_the_comparison() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    write(
        &tmp.path().join("constraints.txt"),
        "ML sport/a sport/b\nCL sport/a tech/c\n",
    );
    let corpus = load_corpus(&tmp.path().join("data"), &StopList::default_english()).unwrap();
    let known: BTreeSet<String> = corpus.doc_ids().into_iter().collect();
    let raw = parse_constraints_file(&tmp.path().join("constraints.txt"), &known).unwrap();
    let artifacts = build_pipeline(corpus, &config(tmp.path())).unwrap();

    let (report, log) = run_comparison(&artifacts, &raw, &config(tmp.path())).unwrap();
    assert_eq!(report.n_docs, 4);
    assert_eq!(report.n_classes, 2);
    assert_eq!(report.ml_pairs, 1);
    // the cannot-link propagates over the must-link component {a, b}
    assert_eq!(report.cl_pairs, 2);
    assert!(!log.is_empty());

    let closed = index_constraints(&raw, artifacts.matrix.doc_ids())
        .unwrap()
        .transitive_closure()
        .unwrap();
    let (_, partition) = constrained_hac(&artifacts.matrix, &closed).unwrap();
    let assign = partition.assignment();
    // doc order is sorted: sport/a, sport/b, tech/c, tech/d
    assert_eq!(assign[0], assign[1]);
    assert_ne!(assign[0], assign[2]);
}

#[test]
fn missing_parse_file_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    fs::remove_file(tmp.path().join("parses/tech/d.conllu")).unwrap();
    let corpus = load_corpus(&tmp.path().join("data"), &StopList::default_english()).unwrap();
    let err = build_pipeline(corpus, &config(tmp.path())).unwrap_err();
    match err {
        Error::Io { path, .. } => assert!(path.ends_with("tech/d.conllu")),
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn sentence_count_mismatch_names_the_document() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    write(
        &tmp.path().join("parses/tech/d.conllu"),
        &chain3("parser", "reads", "code"),
    );
    let corpus = load_corpus(&tmp.path().join("data"), &StopList::default_english()).unwrap();
    let err = build_pipeline(corpus, &config(tmp.path())).unwrap_err();
    match err {
        Error::SentenceMismatch { doc_id, expected, found } => {
            assert_eq!(doc_id, "tech/d");
            assert_eq!((expected, found), (2, 1));
        }
        other => panic!("unexpected error {other:?}"),
    }
}
