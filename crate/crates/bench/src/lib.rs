//! Shared setup for the pipeline benchmarks.

use graphclust::{
    build_pipeline, generate_corpus, ExperimentConfig, PipelineArtifacts, StopList, SynthSpec,
};

/// A synthetic corpus of `n_topics * docs_per_topic` documents, built through
/// the full ingest pipeline.
pub fn bench_artifacts(n_topics: usize, docs_per_topic: usize) -> PipelineArtifacts {
    let spec = SynthSpec {
        n_topics,
        docs_per_topic,
        ..Default::default()
    };
    let corpus = generate_corpus(&spec, &StopList::default_english()).expect("generate corpus");
    build_pipeline(corpus, &ExperimentConfig::default()).expect("build pipeline")
}
