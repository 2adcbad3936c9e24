//! Pairwise document-graph similarity.
//!
//! Similarity between two documents is a lambda-blend of two sparse cosines:
//! one over vertex features (tf-idf weights) and one over edge features.
//! `lambda = 0` is pure vertex cosine, `lambda = 1` pure edge cosine. Entries
//! are in `[0, 1]` when the matrix is built; `-1` only ever appears later as
//! the cannot-link penalty written by the clustering loop.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::FeatureVector;

/// Symmetric pairwise similarities over the corpus, with the index-to-id map
/// the clustering and reports need.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<Vec<f64>>,
    doc_ids: Vec<String>,
}

impl SimilarityMatrix {
    /// Wrap an existing square symmetric matrix (used by tests and by callers
    /// that compute similarities elsewhere).
    pub fn from_values(values: Vec<Vec<f64>>, doc_ids: Vec<String>) -> Result<Self> {
        let n = values.len();
        if doc_ids.len() != n {
            return Err(Error::InvalidInput(format!(
                "matrix has {n} rows but {} doc ids",
                doc_ids.len()
            )));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidInput(format!("non-finite entry at ({i}, {j})")));
                }
                if values[j][i] != *v {
                    return Err(Error::InvalidInput(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SimilarityMatrix { n, values, doc_ids })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    /// CSV dump: a header row of document ids, then one row per document with
    /// 12-significant-digit values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.doc_ids.join(","));
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.11e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Cosine over sparse maps; missing keys count as zero and an empty or
/// all-zero side yields 0. Accumulation follows the maps' sorted key order,
/// so the result is bit-stable across runs.
pub fn sparse_cosine<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    for (key, &wa) in a {
        norm_a += wa * wa;
        if let Some(&wb) = b.get(key) {
            dot += wa * wb;
        }
    }
    let mut norm_b = 0.0;
    for (_, &wb) in b {
        norm_b += wb * wb;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    (dot / (norm_a.sqrt() * norm_b.sqrt())).clamp(0.0, 1.0)
}

/// Blend of vertex and edge cosines: `(1 - lambda) * cos_vertex + lambda *
/// cos_edge` with `lambda` in `[0, 1]`.
pub fn graph_similarity(a: &FeatureVector, b: &FeatureVector, lambda: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&lambda));
    let vertex = sparse_cosine(&a.vertex_features, &b.vertex_features);
    let edge = sparse_cosine(&a.edge_features, &b.edge_features);
    (1.0 - lambda) * vertex + lambda * edge
}

/// Fill the full symmetric matrix. Each off-diagonal entry is computed once
/// and mirrored; diagonal entries are 1 for documents with any vertex
/// features and 0 for degenerate (empty) documents.
pub fn similarity_matrix(features: &[FeatureVector], lambda: f64) -> SimilarityMatrix {
    let n = features.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        values[i][i] = if features[i].vertex_features.is_empty() { 0.0 } else { 1.0 };
        for j in (i + 1)..n {
            let s = graph_similarity(&features[i], &features[j], lambda);
            values[i][j] = s;
            values[j][i] = s;
        }
    }
    SimilarityMatrix {
        n,
        values,
        doc_ids: features.iter().map(|f| f.doc_id.clone()).collect(),
    }
}
