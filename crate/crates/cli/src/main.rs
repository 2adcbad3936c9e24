use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use graphclust::{
    build_pipeline, constrained_hac, dump_graph, evaluate, hac, index_constraints,
    load_corpus_sampled, ml_initial_clusters, merge_log_to_jsonl, parse_constraints_file,
    replay_merges, run_comparison, run_sweep, sample_oracle_constraints, write_dataset,
    ConstraintSet, DependencySource, ExperimentConfig, PipelineArtifacts, StopList, StopRule,
    SynthSpec,
};

/// Document clustering with dependency-graph representations and
/// must-link / cannot-link constraints.
#[derive(Parser)]
#[command(name = "graphclust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one dataset and write the merge log, partition, and metrics
    Cluster(ClusterArgs),
    /// Cluster with and without constraints on the same matrix, report both
    Compare(CompareArgs),
    /// Sweep oracle-constraint fractions, averaging metrics over seeds
    Sweep(SweepArgs),
    /// Generate a labeled synthetic dataset in the standard layout
    GenSynth(GenSynthArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Dataset root laid out as <root>/<label>/<file>
    #[arg(long)]
    dataset: PathBuf,
    /// Stopword file, one word per line (bundled English list if omitted)
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Keep a seeded uniform sample of at most this many documents
    #[arg(long)]
    max_docs: Option<usize>,
    /// Seed for document subsetting and oracle-constraint sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory of <doc_id>.conllu parse files (exclusive with --window)
    #[arg(long, conflicts_with = "window")]
    parses: Option<PathBuf>,
    /// Co-occurrence window when no parse files are used
    #[arg(long, default_value_t = 2)]
    window: usize,
    /// Vertex/edge cosine blend in [0, 1]
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Dump each weighted document graph into this directory
    #[arg(long)]
    dump_graphs: Option<PathBuf>,
    /// Dump the similarity matrix as CSV to this file
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct ConstraintArgs {
    /// Constraint file with `ML <id> <id>` / `CL <id> <id>` lines
    #[arg(long, conflicts_with = "oracle_fraction")]
    constraints: Option<PathBuf>,
    /// Sample this fraction of all document pairs as oracle constraints
    #[arg(long)]
    oracle_fraction: Option<f64>,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    constraint: ConstraintArgs,
    /// Apply constraints during clustering
    #[arg(long, conflicts_with = "unconstrained")]
    constrained: bool,
    /// Plain group-average clustering (the default)
    #[arg(long)]
    unconstrained: bool,
    /// Cluster count for the evaluation cut (default: true class count)
    #[arg(long)]
    k: Option<usize>,
    /// Also report natural-log entropy
    #[arg(long)]
    ln: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    constraint: ConstraintArgs,
    /// Cluster count for the evaluation cut (default: true class count)
    #[arg(long)]
    k: Option<usize>,
    /// Also report natural-log entropy
    #[arg(long)]
    ln: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Ascending oracle-constraint fractions
    #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.2")]
    fractions: Vec<f64>,
    /// Seeds to average over
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    seeds: Vec<u64>,
    /// Cluster count for the evaluation cut (default: true class count)
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct GenSynthArgs {
    /// Number of topics (class labels)
    #[arg(long, default_value_t = 4)]
    topics: usize,
    /// Documents per topic
    #[arg(long, default_value_t = 25)]
    docs_per_topic: usize,
    /// Distinct words per topic vocabulary
    #[arg(long, default_value_t = 100)]
    topic_vocab: usize,
    /// Distinct words in the shared vocabulary
    #[arg(long, default_value_t = 30)]
    shared_vocab: usize,
    /// Tokens per sentence, inclusive range
    #[arg(long, default_value_t = 3)]
    sentence_min: usize,
    #[arg(long, default_value_t = 5)]
    sentence_max: usize,
    /// Sentences per document, inclusive range
    #[arg(long, default_value_t = 1)]
    sentences_min: usize,
    #[arg(long, default_value_t = 2)]
    sentences_max: usize,
    /// Probability that a token comes from the topic vocabulary
    #[arg(long, default_value_t = 0.7)]
    topic_word_prob: f64,
    /// Generation seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Dataset output directory
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Cluster(args) => cluster(args),
        Command::Compare(args) => compare(args),
        Command::Sweep(args) => sweep(args),
        Command::GenSynth(args) => gen_synth(args),
    }
}

fn load_artifacts(input: &InputArgs) -> Result<PipelineArtifacts> {
    let stoplist = match &input.stoplist {
        Some(path) => StopList::from_file(path)?,
        None => StopList::default_english(),
    };
    let corpus = load_corpus_sampled(&input.dataset, &stoplist, input.max_docs, input.seed)?;
    let source = match &input.parses {
        Some(dir) => DependencySource::Conllu { dir: dir.clone() },
        None => {
            if input.window == 0 {
                bail!("--window must be at least 1");
            }
            DependencySource::Window { size: input.window }
        }
    };
    let config = ExperimentConfig {
        lambda: input.lambda,
        source,
        k: None,
        natural_log: false,
    };
    let artifacts = build_pipeline(corpus, &config)?;
    write_dumps(input, &artifacts)?;
    Ok(artifacts)
}

fn write_dumps(input: &InputArgs, artifacts: &PipelineArtifacts) -> Result<()> {
    if let Some(dir) = &input.dump_graphs {
        for graph in &artifacts.graphs {
            let path = dir.join(format!("{}.txt", graph.doc_id));
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&path, dump_graph(graph))
                .with_context(|| format!("writing {}", path.display()))?;
        }
        println!("dumped {} graphs to {}", artifacts.graphs.len(), dir.display());
    }
    if let Some(path) = &input.dump_matrix {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(path, artifacts.matrix.to_csv())
            .with_context(|| format!("writing {}", path.display()))?;
        println!("dumped similarity matrix to {}", path.display());
    }
    Ok(())
}

fn resolve_constraints(
    args: &ConstraintArgs,
    artifacts: &PipelineArtifacts,
    seed: u64,
) -> Result<Option<ConstraintSet<String>>> {
    if let Some(path) = &args.constraints {
        let known: BTreeSet<String> = artifacts.corpus.doc_ids().into_iter().collect();
        return Ok(Some(parse_constraints_file(path, &known)?));
    }
    if let Some(fraction) = args.oracle_fraction {
        if !(0.0..=1.0).contains(&fraction) {
            bail!("--oracle-fraction {fraction} outside [0, 1]");
        }
        let labels: std::collections::BTreeMap<String, String> = artifacts
            .corpus
            .documents
            .iter()
            .map(|d| (d.doc_id.clone(), d.label.clone()))
            .collect();
        return Ok(Some(sample_oracle_constraints(&labels, fraction, seed)));
    }
    Ok(None)
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn cluster(args: ClusterArgs) -> Result<()> {
    let artifacts = load_artifacts(&args.input)?;
    let raw = resolve_constraints(&args.constraint, &artifacts, args.input.seed)?;
    let constrained_mode = args.constrained || (raw.is_some() && !args.unconstrained);
    if args.constrained && raw.is_none() {
        bail!("--constrained needs --constraints <file> or --oracle-fraction <f>");
    }

    let labels = artifacts.corpus.labels();
    let n_classes = artifacts.corpus.classes().len();
    let k = args.k.unwrap_or(n_classes).max(1);
    let doc_ids = artifacts.matrix.doc_ids().to_vec();
    let n_docs = artifacts.corpus.n_docs;

    let report_json;
    let (log, partition) = if constrained_mode {
        let closed = index_constraints(&raw.unwrap_or_default(), &doc_ids)?
            .transitive_closure()?;
        let (log, nochange) = constrained_hac(&artifacts.matrix, &closed)?;
        let initial = ml_initial_clusters(artifacts.matrix.n(), closed.ml());
        let cut = replay_merges(initial, &log, k);
        let eval_nochange = evaluate(&nochange, &labels, args.ln)?;
        let eval_cut = evaluate(&cut, &labels, args.ln)?;
        println!(
            "constrained: {} docs, stopped at {} clusters (cut at {}): purity {:.4}, entropy {:.4}, f {:.4}",
            n_docs, nochange.k(), cut.k(), eval_cut.purity, eval_cut.entropy, eval_cut.f_score
        );
        report_json = serde_json::to_string_pretty(&serde_json::json!({
            "mode": "constrained",
            "n_docs": n_docs,
            "n_classes": n_classes,
            "k": cut.k(),
            "nochange_k": nochange.k(),
            "ml_pairs": closed.ml().len(),
            "cl_pairs": closed.cl().len(),
            "evaluation": eval_cut,
            "evaluation_nochange": eval_nochange,
        }))?;
        write_out(&args.input.out, "report.csv", &format!("{}\n", eval_cut.csv_row(n_docs)))?;
        (log, nochange)
    } else {
        let (log, partition) = hac(&artifacts.matrix, StopRule::TargetK(k))?;
        let eval = evaluate(&partition, &labels, args.ln)?;
        println!(
            "unconstrained: {} docs cut at {} clusters: purity {:.4}, entropy {:.4}, f {:.4}",
            n_docs, k, eval.purity, eval.entropy, eval.f_score
        );
        report_json = serde_json::to_string_pretty(&serde_json::json!({
            "mode": "unconstrained",
            "n_docs": n_docs,
            "n_classes": n_classes,
            "k": k,
            "evaluation": eval,
        }))?;
        write_out(&args.input.out, "report.csv", &format!("{}\n", eval.csv_row(n_docs)))?;
        (log, partition)
    };

    write_out(&args.input.out, "merges.jsonl", &merge_log_to_jsonl(&log, &doc_ids))?;
    write_out(&args.input.out, "partition.json", &partition.to_json(&doc_ids))?;
    let path = write_out(&args.input.out, "report.json", &report_json)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let artifacts = load_artifacts(&args.input)?;
    let raw = resolve_constraints(&args.constraint, &artifacts, args.input.seed)?
        .context("compare needs --constraints <file> or --oracle-fraction <f>")?;
    let config = ExperimentConfig {
        k: args.k,
        natural_log: args.ln,
        ..config_of(&args.input)
    };
    let (report, log) = run_comparison(&artifacts, &raw, &config)?;
    println!(
        "unconstrained: purity {:.4}, entropy {:.4}, f {:.4}",
        report.unconstrained.purity, report.unconstrained.entropy, report.unconstrained.f_score
    );
    println!(
        "constrained:   purity {:.4}, entropy {:.4}, f {:.4}  ({} ML, {} CL after closure)",
        report.constrained.purity,
        report.constrained.entropy,
        report.constrained.f_score,
        report.ml_pairs,
        report.cl_pairs
    );
    let doc_ids = artifacts.matrix.doc_ids();
    write_out(&args.input.out, "merges.jsonl", &merge_log_to_jsonl(&log, doc_ids))?;
    let path = write_out(&args.input.out, "report.json", &report.to_json())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let artifacts = load_artifacts(&args.input)?;
    let config = ExperimentConfig {
        k: args.k,
        ..config_of(&args.input)
    };
    let report = run_sweep(&artifacts, &args.fractions, &args.seeds, &config)?;
    for row in &report.rows {
        println!(
            "fraction {:.3} ({} constraints): purity {:.4}, entropy {:.4}, f {:.4}",
            row.fraction, row.constraints, row.purity, row.entropy, row.f_score
        );
    }
    let path = write_out(&args.input.out, "sweep.csv", &report.to_csv())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn config_of(input: &InputArgs) -> ExperimentConfig {
    ExperimentConfig {
        lambda: input.lambda,
        source: match &input.parses {
            Some(dir) => DependencySource::Conllu { dir: dir.clone() },
            None => DependencySource::Window { size: input.window },
        },
        k: None,
        natural_log: false,
    }
}

fn gen_synth(args: GenSynthArgs) -> Result<()> {
    let spec = SynthSpec {
        n_topics: args.topics,
        docs_per_topic: args.docs_per_topic,
        topic_vocab_size: args.topic_vocab,
        shared_vocab_size: args.shared_vocab,
        sentence_len: (args.sentence_min, args.sentence_max),
        sentences_per_doc: (args.sentences_min, args.sentences_max),
        topic_word_prob: args.topic_word_prob,
        seed: args.seed,
    };
    write_dataset(&spec, &args.out)?;
    println!(
        "wrote {} documents ({} topics) to {}",
        spec.n_docs(),
        spec.n_topics,
        args.out.display()
    );
    Ok(())
}
