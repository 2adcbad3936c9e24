//! Dependency-graph document representation.
//!
//! A document's graph has its non-stop words as vertices and its dependency
//! pairs as undirected unit-length edges. Vertices carry tf-idf weights
//! (`tf * ln(N / df)`), and the graph flattens into sparse vertex and edge
//! feature maps for the similarity computation. Edge features take the
//! smaller of the two endpoint weights: an edge is only as informative as its
//! rarer endpoint.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::corpus::{Corpus, Document};
use crate::deps::SentenceDeps;
use crate::error::{Error, Result};

/// A document as an undirected word graph. Edges are stored normalized
/// (smaller word first) and every edge endpoint is a vertex; all edges have
/// unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentGraph {
    pub doc_id: String,
    pub vertices: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
    pub vertex_weight: BTreeMap<String, f64>,
    pub term_freq: BTreeMap<String, usize>,
}

impl DocumentGraph {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Sparse feature maps derived from a weighted graph; one row of the corpus
/// feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub doc_id: String,
    pub vertex_features: BTreeMap<String, f64>,
    pub edge_features: BTreeMap<(String, String), f64>,
}

/// Build the (unweighted) graph of one document: vertices are the union of
/// the document's tokens over all sentences, edges are the dependency pairs
/// whose endpoints are both vertices, and `term_freq` counts every token
/// occurrence. Duplicate pairs collapse; the graph is a set structure, so
/// sentence order cannot influence it.
pub fn build_graph(doc: &Document, deps: &[SentenceDeps]) -> DocumentGraph {
    let mut vertices = BTreeSet::new();
    let mut term_freq: BTreeMap<String, usize> = BTreeMap::new();
    for sentence in &doc.sentences {
        for token in &sentence.tokens {
            vertices.insert(token.clone());
            *term_freq.entry(token.clone()).or_insert(0) += 1;
        }
    }

    let mut edges = BTreeSet::new();
    for sent in deps {
        for pair in &sent.pairs {
            let (a, b) = pair.words();
            if vertices.contains(a) && vertices.contains(b) {
                edges.insert((a.to_string(), b.to_string()));
            }
        }
    }

    DocumentGraph {
        doc_id: doc.doc_id.clone(),
        vertices,
        edges,
        vertex_weight: BTreeMap::new(),
        term_freq,
    }
}

/// Weight every vertex by tf-idf: raw term count times `ln(n_docs / df)`.
/// A term on every document gets weight zero; a term missing from the corpus
/// statistics is an internal-consistency error.
pub fn weight_graph(mut graph: DocumentGraph, corpus: &Corpus) -> Result<DocumentGraph> {
    let n = corpus.n_docs as f64;
    let mut weights = BTreeMap::new();
    for vertex in &graph.vertices {
        let tf = graph.term_freq[vertex] as f64;
        let df = *corpus
            .doc_freq
            .get(vertex)
            .ok_or_else(|| Error::MissingTerm(vertex.clone()))? as f64;
        weights.insert(vertex.clone(), tf * (n / df).ln());
    }
    graph.vertex_weight = weights;
    Ok(graph)
}

/// Flatten a weighted graph into feature maps. Vertex features copy the
/// vertex weights; each edge's feature is the minimum of its endpoint
/// weights.
pub fn to_feature_vector(graph: &DocumentGraph) -> FeatureVector {
    let edge_features = graph
        .edges
        .iter()
        .map(|(a, b)| {
            let w = graph.vertex_weight[a].min(graph.vertex_weight[b]);
            ((a.clone(), b.clone()), w)
        })
        .collect();
    FeatureVector {
        doc_id: graph.doc_id.clone(),
        vertex_features: graph.vertex_weight.clone(),
        edge_features,
    }
}

/// Line-oriented debug dump: `V <word> <weight>` then `E <word1> <word2>`,
/// both in sorted order.
pub fn dump_graph(graph: &DocumentGraph) -> String {
    let mut out = String::new();
    for (word, weight) in &graph.vertex_weight {
        let _ = writeln!(out, "V {word} {weight}");
    }
    for word in graph.vertices.iter().filter(|w| !graph.vertex_weight.contains_key(*w)) {
        let _ = writeln!(out, "V {word} 0");
    }
    for (a, b) in &graph.edges {
        let _ = writeln!(out, "E {a} {b}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{process_document, StopList};
    use crate::deps::{cooccurrence_deps, DependencyPair};

    fn doc(id: &str, text: &str) -> Document {
        process_document(id, "x", text, &StopList::default_english())
    }

    fn deps_from_pairs(per_sentence: &[&[(&str, &str)]]) -> Vec<SentenceDeps> {
        per_sentence
            .iter()
            .enumerate()
            .map(|(i, pairs)| SentenceDeps {
                sentence_index: i,
                pairs: pairs
                    .iter()
                    .filter_map(|(a, b)| DependencyPair::new(a, b, None))
                    .collect(),
            })
            .collect()
    }

    fn corpus_of(texts: &[&str]) -> Corpus {
        Corpus::from_documents(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| doc(&format!("d{i}"), t))
                .collect(),
        )
    }

    #[test]
    fn example_document_vertices_and_edges() {
        let d = doc("d1", "Maker of iPhone is \"APPLE\". Steve Jobs was the CEO at Apple.");
        let deps = deps_from_pairs(&[
            &[("maker", "iphone"), ("maker", "apple")],
            &[("steve", "jobs"), ("jobs", "ceo"), ("ceo", "apple")],
        ]);
        let g = build_graph(&d, &deps);
        let expect: BTreeSet<String> = ["maker", "iphone", "apple", "steve", "jobs", "ceo"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(g.vertices, expect);
        assert_eq!(g.edges.len(), 5);
        assert_eq!(g.term_freq["apple"], 2);
        for (a, b) in &g.edges {
            assert!(g.vertices.contains(a) && g.vertices.contains(b));
        }
    }

    #[test]
    fn sentence_order_does_not_change_the_graph() {
        let d1 = doc("a", "Maker of iPhone is APPLE. Steve Jobs was the CEO at Apple.");
        let d2 = doc("b", "The CEO of Apple was Steve Jobs. IPHONE maker is Apple.");
        let pairs: &[(&str, &str)] = &[
            ("maker", "iphone"),
            ("maker", "apple"),
            ("steve", "jobs"),
            ("jobs", "ceo"),
            ("ceo", "apple"),
        ];
        let g1 = build_graph(&d1, &deps_from_pairs(&[pairs]));
        let g2 = build_graph(&d2, &deps_from_pairs(&[pairs]));
        assert_eq!(g1.vertices, g2.vertices);
        assert_eq!(g1.edges, g2.edges);
        assert_eq!(g1.term_freq, g2.term_freq);
    }

    #[test]
    fn empty_document_yields_empty_graph() {
        let d = doc("e", "");
        let g = build_graph(&d, &[]);
        assert!(g.is_empty());
        assert!(g.edges.is_empty());
    }

    #[test]
    fn stopword_endpoints_are_excluded() {
        let d = doc("d", "maker ships product");
        // "the" is not a vertex, so the pair referencing it is dropped
        let deps = deps_from_pairs(&[&[("maker", "the"), ("maker", "ships")]]);
        let g = build_graph(&d, &deps);
        assert_eq!(g.edges.len(), 1);
        assert!(g.edges.contains(&("maker".to_string(), "ships".to_string())));
    }

    #[test]
    fn tfidf_weights() {
        // 4 docs; "gamma" in 2 of them, three times in d0
        let corpus = corpus_of(&[
            "gamma gamma gamma alpha",
            "gamma beta",
            "beta delta",
            "delta alpha",
        ]);
        let deps: Vec<SentenceDeps> =
            corpus.documents[0].sentences.iter().map(|s| cooccurrence_deps(s, 2)).collect();
        let g = weight_graph(build_graph(&corpus.documents[0], &deps), &corpus).unwrap();
        let expected = 3.0 * (4.0f64 / 2.0).ln();
        assert!((g.vertex_weight["gamma"] - expected).abs() < 1e-12);
        assert!((expected - 2.0794415416798357).abs() < 1e-12);
    }

    #[test]
    fn term_in_all_documents_weighs_zero() {
        let corpus = corpus_of(&["shared alpha", "shared beta", "shared gamma"]);
        let d = &corpus.documents[0];
        let g = weight_graph(build_graph(d, &[]), &corpus).unwrap();
        assert_eq!(g.vertex_weight["shared"], 0.0);
        assert!(g.vertex_weight["alpha"] > 0.0);
    }

    #[test]
    fn single_doc_corpus_weighs_zero() {
        let corpus = corpus_of(&["only words here"]);
        let g = weight_graph(build_graph(&corpus.documents[0], &[]), &corpus).unwrap();
        assert!(g.vertex_weight.values().all(|&w| w == 0.0));
    }

    #[test]
    fn missing_term_is_an_error() {
        let corpus = corpus_of(&["alpha beta"]);
        let other = doc("z", "unknown words");
        let err = weight_graph(build_graph(&other, &[]), &corpus).unwrap_err();
        assert!(matches!(err, Error::MissingTerm(_)));
    }

    #[test]
    fn weight_monotone_in_tf_and_df() {
        let base = corpus_of(&["word word alpha", "word beta", "gamma delta", "beta gamma"]);
        let g = weight_graph(build_graph(&base.documents[0], &[]), &base).unwrap();
        // more occurrences of "word" in the same document -> larger weight
        let heavier = corpus_of(&["word word word alpha", "word beta", "gamma delta", "beta gamma"]);
        let gh = weight_graph(build_graph(&heavier.documents[0], &[]), &heavier).unwrap();
        assert!(gh.vertex_weight["word"] > g.vertex_weight["word"]);
        // "word" spreading to more documents -> smaller weight
        let wider = corpus_of(&["word word alpha", "word beta", "word delta", "beta gamma"]);
        let gw = weight_graph(build_graph(&wider.documents[0], &[]), &wider).unwrap();
        assert!(gw.vertex_weight["word"] < g.vertex_weight["word"]);
    }

    #[test]
    fn edge_features_take_the_min_endpoint_weight() {
        let mut g = DocumentGraph {
            doc_id: "d".into(),
            vertices: ["a".to_string(), "b".to_string()].into(),
            edges: [("a".to_string(), "b".to_string())].into(),
            vertex_weight: BTreeMap::new(),
            term_freq: [("a".to_string(), 1), ("b".to_string(), 1)].into(),
        };
        g.vertex_weight.insert("a".into(), 2.0);
        g.vertex_weight.insert("b".into(), 4.0);
        let f = to_feature_vector(&g);
        assert_eq!(f.edge_features[&("a".to_string(), "b".to_string())], 2.0);
        assert_eq!(f.vertex_features, g.vertex_weight);
    }

    #[test]
    fn empty_and_zero_weight_features() {
        let corpus = corpus_of(&["alpha beta", "alpha beta"]);
        let d = &corpus.documents[0];
        let deps: Vec<SentenceDeps> =
            d.sentences.iter().map(|s| cooccurrence_deps(s, 2)).collect();
        let g = weight_graph(build_graph(d, &deps), &corpus).unwrap();
        let f = to_feature_vector(&g);
        // both terms appear in both docs, so all weights (and edge minima) are 0
        assert!(f.vertex_features.values().all(|&w| w == 0.0));
        assert!(f.edge_features.values().all(|&w| w == 0.0));

        let empty = build_graph(&doc("e", ""), &[]);
        let fe = to_feature_vector(&empty);
        assert!(fe.vertex_features.is_empty() && fe.edge_features.is_empty());
    }

    #[test]
    fn dump_format() {
        let corpus = corpus_of(&["alpha beta", "gamma"]);
        let d = &corpus.documents[0];
        let deps: Vec<SentenceDeps> =
            d.sentences.iter().map(|s| cooccurrence_deps(s, 2)).collect();
        let g = weight_graph(build_graph(d, &deps), &corpus).unwrap();
        let dump = dump_graph(&g);
        let lines: Vec<&str> = dump.lines().collect();
        assert!(lines[0].starts_with("V alpha "));
        assert!(lines[1].starts_with("V beta "));
        assert_eq!(lines[2], "E alpha beta");
    }
}
