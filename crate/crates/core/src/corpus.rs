//! Corpus loading and the text-cleaning pipeline.
//!
//! Datasets live on disk as `<root>/<label>/<file>`, one plain-text document
//! per file. Cleaning lowercases, strips digits and delimiters, splits on
//! sentence terminators, and removes stopwords; what is left per sentence is
//! exactly the token stream the graph builder consumes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../assets/stopwords.txt");

/// The active stopword list. Lookup is case-sensitive; tokens are lowercased
/// before they reach it.
#[derive(Debug, Clone)]
pub struct StopList(BTreeSet<String>);

impl StopList {
    /// The bundled default English list.
    pub fn default_english() -> Self {
        Self::from_words(DEFAULT_STOPWORDS.lines())
    }

    /// An empty list (no token is a stopword).
    pub fn empty() -> Self {
        StopList(BTreeSet::new())
    }

    /// Load a list from a file, one word per line; blank lines and `#`
    /// comment lines are ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_words(
            content.lines().filter(|l| !l.trim_start().starts_with('#')),
        ))
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopList(
            words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One sentence after cleaning: lowercase tokens with stopwords removed.
/// `original_index` is the sentence's position in the document and keys the
/// alignment with external parse files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub original_index: usize,
}

/// A single document of the corpus.
#[derive(Debug, Clone)]
pub struct Document {
    pub doc_id: String,
    pub label: String,
    pub raw_text: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    /// True when cleaning left no tokens at all. Degenerate documents are
    /// retained (so document indices stay stable) but get an empty graph and
    /// zero similarity to everything.
    pub fn is_degenerate(&self) -> bool {
        self.sentences.iter().all(|s| s.tokens.is_empty())
    }

    /// All distinct tokens of the document.
    pub fn vocabulary(&self) -> BTreeSet<&str> {
        self.sentences
            .iter()
            .flat_map(|s| s.tokens.iter().map(String::as_str))
            .collect()
    }
}

/// A labeled document collection plus the per-term document frequencies that
/// feed tf-idf weighting.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub doc_freq: BTreeMap<String, usize>,
    pub n_docs: usize,
}

impl Corpus {
    /// Assemble a corpus from already-processed documents, computing the
    /// document frequencies. Aggregation iterates documents in their given
    /// order over sorted vocabularies, so the result does not depend on how
    /// the documents were produced.
    pub fn from_documents(documents: Vec<Document>) -> Self {
        let mut doc_freq = BTreeMap::new();
        for doc in &documents {
            for term in doc.vocabulary() {
                *doc_freq.entry(term.to_string()).or_insert(0) += 1;
            }
        }
        let n_docs = documents.len();
        Corpus {
            documents,
            doc_freq,
            n_docs,
        }
    }

    pub fn doc_ids(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.doc_id.clone()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.label.clone()).collect()
    }

    /// Distinct class labels in sorted order.
    pub fn classes(&self) -> Vec<String> {
        self.documents
            .iter()
            .map(|d| d.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

// letter-numbers (Roman numerals and the like) are both alphabetic and
// numeric; they count as digits here and get dropped
fn is_letter(c: char) -> bool {
    c.is_alphabetic() && !c.is_numeric()
}

/// Normalize raw text: lowercase everything, drop digits, replace delimiters
/// with spaces (keeping `.?!` as sentence terminators and apostrophes or
/// hyphens between letters), collapse space runs and terminator runs, and
/// strip spaces before terminators.
///
/// The result is idempotent: cleaning cleaned text changes nothing.
pub fn clean_text(raw: &str) -> String {
    let lower = raw.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut out = String::with_capacity(lower.len());

    for (i, &c) in chars.iter().enumerate() {
        if c.is_numeric() {
            continue;
        }
        if is_letter(c) {
            out.push(c);
            continue;
        }
        if is_terminator(c) {
            while out.ends_with(' ') {
                out.pop();
            }
            // "tips!!" collapses to "tips!", keeping the first terminator
            if !out.ends_with(is_terminator) {
                out.push(c);
            }
            continue;
        }
        let intra_word = (c == '\'' || c == '-')
            && i > 0
            && is_letter(chars[i - 1])
            && chars.get(i + 1).copied().is_some_and(is_letter);
        if intra_word {
            out.push(c);
            continue;
        }
        // every other character (whitespace included) acts as a delimiter
        if !out.is_empty() && !out.ends_with(' ') {
            out.push(' ');
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Split cleaned text at sentence terminators (`.`, `?`, `!`). Trailing text
/// without a terminator forms a final sentence; empty fragments are dropped.
pub fn split_sentences(cleaned: &str) -> Vec<String> {
    cleaned
        .split(is_terminator)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Drop stoplist members from a token sequence, preserving order.
pub fn remove_stopwords(tokens: &[String], stoplist: &StopList) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !stoplist.contains(t))
        .cloned()
        .collect()
}

/// Run the full cleaning pipeline on one document's raw text.
///
/// Sentences that lose all their tokens to the stoplist are kept as empty
/// entries so that sentence indices stay aligned with external parse files.
pub fn process_document(
    doc_id: impl Into<String>,
    label: impl Into<String>,
    raw_text: impl Into<String>,
    stoplist: &StopList,
) -> Document {
    let raw_text = raw_text.into();
    let cleaned = clean_text(&raw_text);
    let sentences = split_sentences(&cleaned)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let tokens: Vec<String> = s.split_whitespace().map(str::to_string).collect();
            Sentence {
                tokens: remove_stopwords(&tokens, stoplist),
                original_index: i,
            }
        })
        .collect();
    Document {
        doc_id: doc_id.into(),
        label: label.into(),
        raw_text,
        sentences,
    }
}

fn list_dataset_files(root: &Path) -> Result<Vec<(String, PathBuf)>> {
    let read_dir = |p: &Path| {
        fs::read_dir(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let mut labels: Vec<PathBuf> = read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    labels.sort();

    let mut files = Vec::new();
    for label_dir in labels {
        let label = label_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut entries: Vec<PathBuf> = read_dir(&label_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        for path in entries {
            files.push((label.clone(), path));
        }
    }
    Ok(files)
}

fn read_documents(files: &[(String, PathBuf)], stoplist: &StopList) -> Result<Vec<Document>> {
    files
        .iter()
        .map(|(label, path)| {
            let raw = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(process_document(
                format!("{label}/{stem}"),
                label.clone(),
                raw,
                stoplist,
            ))
        })
        .collect()
}

/// Load a labeled corpus from a `<root>/<label>/<file>` directory layout.
/// Documents are ordered by label, then file name; the parent directory name
/// is the class label and `<label>/<file-stem>` is the document id.
pub fn load_corpus(root: &Path, stoplist: &StopList) -> Result<Corpus> {
    load_corpus_sampled(root, stoplist, None, 0)
}

/// Like [`load_corpus`], but when `max_docs` is below the number of available
/// documents, keep a seeded uniform sample of that size (document order is
/// preserved after sampling).
pub fn load_corpus_sampled(
    root: &Path,
    stoplist: &StopList,
    max_docs: Option<usize>,
    seed: u64,
) -> Result<Corpus> {
    let mut files = list_dataset_files(root)?;
    if files.is_empty() {
        return Err(Error::EmptyCorpus(root.to_path_buf()));
    }
    if let Some(limit) = max_docs {
        if limit < files.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut keep: Vec<usize> =
                rand::seq::index::sample(&mut rng, files.len(), limit).into_vec();
            keep.sort_unstable();
            files = keep.into_iter().map(|i| files[i].clone()).collect();
        }
    }
    Ok(Corpus::from_documents(read_documents(&files, stoplist)?))
}
