//! External cluster-quality measures: purity, entropy, and F-measure.
//!
//! All three are computed from a class-by-cluster contingency table.
//! F per (class, cluster) is the harmonic mean of precision `c_ij / c_j` and
//! recall `c_ij / n_i`; the overall F weights each class's best cluster match
//! by class size. Purity weights each cluster's majority-class share by
//! cluster size. Entropy is the size-weighted class-distribution entropy per
//! cluster, base 2 by default with a natural-log variant for comparison.

use serde::Serialize;

use crate::cluster::Partition;
use crate::error::{Error, Result};

/// Class-by-cluster counts with their marginals: `counts[i][j]` is the number
/// of documents of class `i` in cluster `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub cluster_sizes: Vec<usize>,
    pub class_sizes: Vec<usize>,
    pub total: usize,
    pub class_labels: Vec<String>,
}

/// Count classes per cluster. Labels must cover every document of the
/// partition, one label per document index.
pub fn contingency(partition: &Partition, labels: &[String]) -> Result<ContingencyTable> {
    if labels.len() != partition.n_docs() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} documents",
            labels.len(),
            partition.n_docs()
        )));
    }
    let mut class_labels: Vec<String> = labels.to_vec();
    class_labels.sort();
    class_labels.dedup();
    let class_index = |l: &String| class_labels.binary_search(l).expect("label present");

    let k = partition.k();
    let mut counts = vec![vec![0usize; k]; class_labels.len()];
    for (doc, &cluster) in partition.assignment().iter().enumerate() {
        counts[class_index(&labels[doc])][cluster] += 1;
    }
    let cluster_sizes: Vec<usize> =
        (0..k).map(|j| counts.iter().map(|row| row[j]).sum()).collect();
    let class_sizes: Vec<usize> = counts.iter().map(|row| row.iter().sum()).collect();
    Ok(ContingencyTable {
        counts,
        cluster_sizes,
        class_sizes,
        total: labels.len(),
        class_labels,
    })
}

/// Overall F-measure: for each class, the best harmonic mean of precision and
/// recall over clusters, weighted by class size.
pub fn f_measure(table: &ContingencyTable) -> f64 {
    if table.total == 0 {
        return 0.0;
    }
    let n = table.total as f64;
    let mut f = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        let n_i = table.class_sizes[i] as f64;
        let mut best = 0.0f64;
        for (j, &c_ij) in row.iter().enumerate() {
            let prec = c_ij as f64 / table.cluster_sizes[j] as f64;
            let rec = c_ij as f64 / n_i;
            let f_ij = if prec + rec == 0.0 {
                0.0
            } else {
                2.0 * prec * rec / (prec + rec)
            };
            best = best.max(f_ij);
        }
        f += (n_i / n) * best;
    }
    f
}

/// Overall purity: each cluster's majority-class count, summed and divided by
/// the total document count.
pub fn purity(table: &ContingencyTable) -> f64 {
    if table.total == 0 {
        return 0.0;
    }
    let majority_sum: usize = (0..table.cluster_sizes.len())
        .map(|j| table.counts.iter().map(|row| row[j]).max().unwrap_or(0))
        .sum();
    majority_sum as f64 / table.total as f64
}

fn cluster_entropy(table: &ContingencyTable, j: usize, log: fn(f64) -> f64) -> f64 {
    let size = table.cluster_sizes[j] as f64;
    let mut e = 0.0;
    for row in &table.counts {
        let p = row[j] as f64 / size;
        if p > 0.0 {
            e -= p * log(p);
        }
    }
    e
}

fn total_entropy(table: &ContingencyTable, log: fn(f64) -> f64) -> f64 {
    if table.total == 0 {
        return 0.0;
    }
    let n = table.total as f64;
    (0..table.cluster_sizes.len())
        .map(|j| (table.cluster_sizes[j] as f64 / n) * cluster_entropy(table, j, log))
        .sum()
}

/// Size-weighted clustering entropy, log base 2.
pub fn entropy(table: &ContingencyTable) -> f64 {
    total_entropy(table, f64::log2)
}

/// Size-weighted clustering entropy with the natural logarithm.
pub fn entropy_nat(table: &ContingencyTable) -> f64 {
    total_entropy(table, f64::ln)
}

/// Per-cluster slice of an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterEval {
    pub purity: f64,
    pub entropy: f64,
    pub size: usize,
}

/// Partition quality against ground-truth labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub purity: f64,
    pub entropy: f64,
    pub f_score: f64,
    pub per_cluster: Vec<ClusterEval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_nat: Option<f64>,
}

impl EvaluationReport {
    /// One CSV line in `doc_count,purity,entropy,f_score` column order.
    pub fn csv_row(&self, doc_count: usize) -> String {
        format!(
            "{doc_count},{:.6},{:.6},{:.6}",
            self.purity, self.entropy, self.f_score
        )
    }
}

/// Evaluate a partition against labels. `natural_log` additionally reports
/// the natural-log entropy.
pub fn evaluate(partition: &Partition, labels: &[String], natural_log: bool) -> Result<EvaluationReport> {
    let table = contingency(partition, labels)?;
    let per_cluster = (0..table.cluster_sizes.len())
        .map(|j| {
            let size = table.cluster_sizes[j];
            let majority = table.counts.iter().map(|row| row[j]).max().unwrap_or(0);
            ClusterEval {
                purity: majority as f64 / size as f64,
                entropy: cluster_entropy(&table, j, f64::log2),
                size,
            }
        })
        .collect();
    Ok(EvaluationReport {
        purity: purity(&table),
        entropy: entropy(&table),
        f_score: f_measure(&table),
        per_cluster,
        entropy_nat: natural_log.then(|| entropy_nat(&table)),
    })
}
