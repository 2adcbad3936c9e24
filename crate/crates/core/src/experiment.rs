//! Experiment orchestration: the constrained-vs-unconstrained comparison and
//! constraint-count sweeps, sharing one similarity matrix per corpus so the
//! two runs differ only in the constraints.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::cluster::{
    constrained_hac, hac, ml_initial_clusters, replay_merges, MergeRecord, StopRule,
};
use crate::constraints::{index_constraints, sample_oracle_constraints, ConstraintSet};
use crate::corpus::Corpus;
use crate::deps::DependencySource;
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, EvaluationReport};
use crate::graph::{build_graph, to_feature_vector, weight_graph, DocumentGraph, FeatureVector};
use crate::similarity::{similarity_matrix, SimilarityMatrix};

/// Pipeline settings shared by every run over one corpus.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Vertex/edge cosine blend for the similarity measure.
    pub lambda: f64,
    /// Where word dependencies come from.
    pub source: DependencySource,
    /// Cluster count for evaluation cuts; defaults to the true class count.
    pub k: Option<usize>,
    /// Also report natural-log entropy.
    pub natural_log: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lambda: 0.5,
            source: DependencySource::Window { size: 2 },
            k: None,
            natural_log: false,
        }
    }
}

/// Everything derived from a corpus that clustering runs share: weighted
/// graphs, feature vectors, and the similarity matrix.
#[derive(Debug)]
pub struct PipelineArtifacts {
    pub corpus: Corpus,
    pub graphs: Vec<DocumentGraph>,
    pub features: Vec<FeatureVector>,
    pub matrix: SimilarityMatrix,
}

/// Build graphs, weight them, and fill the similarity matrix.
pub fn build_pipeline(corpus: Corpus, config: &ExperimentConfig) -> Result<PipelineArtifacts> {
    if !(0.0..=1.0).contains(&config.lambda) {
        return Err(Error::InvalidInput(format!(
            "lambda {} outside [0, 1]",
            config.lambda
        )));
    }
    let mut graphs = Vec::with_capacity(corpus.documents.len());
    for doc in &corpus.documents {
        let deps = config.source.deps_for(doc)?;
        graphs.push(weight_graph(build_graph(doc, &deps), &corpus)?);
    }
    let features: Vec<FeatureVector> = graphs.iter().map(to_feature_vector).collect();
    let matrix = similarity_matrix(&features, config.lambda);
    Ok(PipelineArtifacts {
        corpus,
        graphs,
        features,
        matrix,
    })
}

/// Metrics of the same corpus clustered with and without constraints.
///
/// `constrained` is the constrained run cut at `k` for a like-for-like
/// comparison with the unconstrained baseline; `constrained_nochange` is the
/// partition where the constrained loop itself stopped. Deltas are
/// constrained-at-k minus unconstrained.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub n_docs: usize,
    pub n_classes: usize,
    pub k: usize,
    pub ml_pairs: usize,
    pub cl_pairs: usize,
    pub unconstrained: EvaluationReport,
    pub constrained: EvaluationReport,
    pub constrained_k: usize,
    pub constrained_nochange: EvaluationReport,
    pub constrained_nochange_k: usize,
    pub delta_purity: f64,
    pub delta_entropy: f64,
    pub delta_f: f64,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Run the paired experiment on one matrix: unconstrained group-average
/// clustering cut at `k`, and the constrained variant of the same matrix
/// under the given (raw, not yet closed) constraints. Also returns the
/// constrained merge log.
pub fn run_comparison(
    artifacts: &PipelineArtifacts,
    raw_constraints: &ConstraintSet<String>,
    config: &ExperimentConfig,
) -> Result<(ComparisonReport, Vec<MergeRecord>)> {
    let corpus = &artifacts.corpus;
    let labels = corpus.labels();
    let n_classes = corpus.classes().len();
    let k = config.k.unwrap_or(n_classes).max(1);

    let (_, baseline) = hac(&artifacts.matrix, StopRule::TargetK(k))?;
    let unconstrained = evaluate(&baseline, &labels, config.natural_log)?;

    let closed = index_constraints(raw_constraints, artifacts.matrix.doc_ids())?
        .transitive_closure()?;
    let (log, nochange) = constrained_hac(&artifacts.matrix, &closed)?;
    let initial = ml_initial_clusters(artifacts.matrix.n(), closed.ml());
    let cut = replay_merges(initial, &log, k);

    let constrained = evaluate(&cut, &labels, config.natural_log)?;
    let constrained_nochange = evaluate(&nochange, &labels, config.natural_log)?;

    let report = ComparisonReport {
        n_docs: corpus.n_docs,
        n_classes,
        k,
        ml_pairs: closed.ml().len(),
        cl_pairs: closed.cl().len(),
        delta_purity: constrained.purity - unconstrained.purity,
        delta_entropy: constrained.entropy - unconstrained.entropy,
        delta_f: constrained.f_score - unconstrained.f_score,
        constrained_k: cut.k(),
        constrained_nochange_k: nochange.k(),
        unconstrained,
        constrained,
        constrained_nochange,
    };
    Ok((report, log))
}

/// Seed-averaged metrics of the constrained run at one oracle fraction.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub fraction: f64,
    /// Sampled pair count (identical for every seed at a given fraction).
    pub constraints: usize,
    pub purity: f64,
    pub entropy: f64,
    pub f_score: f64,
}

/// One row per fraction, averaged over seeds.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,constraints,purity,entropy,f_score\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6}",
                row.fraction, row.constraints, row.purity, row.entropy, row.f_score
            );
        }
        out
    }
}

/// For each fraction (ascending), sample oracle constraints per seed, run the
/// comparison, and average the constrained-at-k metrics over seeds.
pub fn run_sweep(
    artifacts: &PipelineArtifacts,
    fractions: &[f64],
    seeds: &[u64],
    config: &ExperimentConfig,
) -> Result<SweepReport> {
    if fractions.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("fractions must be sorted ascending".into()));
    }
    if fractions.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidInput("need at least one fraction and one seed".into()));
    }
    let labels_by_id: BTreeMap<String, String> = artifacts
        .corpus
        .documents
        .iter()
        .map(|d| (d.doc_id.clone(), d.label.clone()))
        .collect();

    let mut rows = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let mut purity_sum = 0.0;
        let mut entropy_sum = 0.0;
        let mut f_sum = 0.0;
        let mut constraints = 0;
        for &seed in seeds {
            let raw = sample_oracle_constraints(&labels_by_id, fraction, seed);
            constraints = raw.len();
            let (report, _) = run_comparison(artifacts, &raw, config)?;
            purity_sum += report.constrained.purity;
            entropy_sum += report.constrained.entropy;
            f_sum += report.constrained.f_score;
        }
        let denom = seeds.len() as f64;
        rows.push(SweepRow {
            fraction,
            constraints,
            purity: purity_sum / denom,
            entropy: entropy_sum / denom,
            f_score: f_sum / denom,
        });
    }
    Ok(SweepReport { rows })
}
