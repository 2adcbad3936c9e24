//! Constrained document clustering over dependency-graph document
//! representations.
//!
//! Each document is modeled as an undirected graph: vertices are the
//! document's non-stop words weighted by tf-idf, edges are pairwise word
//! dependencies of unit length. Pairwise document similarity is a blend of
//! vertex-feature and edge-feature cosines, and documents are grouped with
//! group-average hierarchical agglomerative clustering. Background knowledge
//! enters as instance-level must-link / cannot-link constraints: must-linked
//! documents are merged up front, and merges that would join cannot-linked
//! documents are rejected and penalized, so the final partition satisfies
//! every constraint.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] — load a `<root>/<label>/<file>` dataset, clean the text,
//!    split sentences, drop stopwords.
//! 2. [`deps`] — obtain per-sentence word-dependency pairs, either from
//!    CoNLL-U parse files or from a windowed co-occurrence fallback.
//! 3. [`graph`] — build each document's dependency graph and weight its
//!    vertices by tf-idf.
//! 4. [`similarity`] — assemble the symmetric pairwise similarity matrix.
//! 5. [`constraints`] — parse, transitively close, and validate must-link /
//!    cannot-link pairs, or sample them from ground-truth labels.
//! 6. [`cluster`] — plain and constraint-aware group-average agglomerative
//!    clustering with a recorded merge log.
//! 7. [`evaluation`] — purity, entropy, and F-measure against labels.
//! 8. [`synth`] — seeded synthetic corpus generation for reproducible
//!    experiments; [`experiment`] — constrained-vs-unconstrained comparisons
//!    and constraint-count sweeps.

pub mod cluster;
pub mod constraints;
pub mod corpus;
pub mod deps;
mod error;
pub mod evaluation;
pub mod experiment;
pub mod graph;
pub mod similarity;
pub mod synth;

pub use cluster::{
    constrained_hac, constrained_hac_with_stats, cut_dendrogram, hac, merge_log_to_jsonl,
    ml_initial_clusters, replay_merges, validate_cl, ClusterState, ConstrainedStats, MergeRecord,
    Partition, StopRule,
};
pub use constraints::{
    index_constraints, parse_constraints, parse_constraints_file, sample_oracle_constraints,
    ConstraintSet,
};
pub use corpus::{
    clean_text, load_corpus, load_corpus_sampled, process_document, remove_stopwords,
    split_sentences, Corpus, Document, Sentence, StopList,
};
pub use deps::{
    cooccurrence_deps, parse_conllu, parse_conllu_str, DependencyPair, DependencySource,
    SentenceDeps,
};
pub use error::{Error, Result};
pub use evaluation::{
    contingency, entropy, entropy_nat, evaluate, f_measure, purity, ClusterEval,
    ContingencyTable, EvaluationReport,
};
pub use experiment::{
    build_pipeline, run_comparison, run_sweep, ComparisonReport, ExperimentConfig,
    PipelineArtifacts, SweepReport, SweepRow,
};
pub use graph::{
    build_graph, dump_graph, to_feature_vector, weight_graph, DocumentGraph, FeatureVector,
};
pub use similarity::{graph_similarity, similarity_matrix, sparse_cosine, SimilarityMatrix};
pub use synth::{generate_corpus, generate_documents, write_dataset, SynthDoc, SynthSpec};
