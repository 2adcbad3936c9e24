//! Per-sentence word-dependency pairs.
//!
//! Two sources are supported: CoNLL-U files produced by an external
//! dependency parser, and a windowed co-occurrence fallback for corpora
//! without parses. Pairs are undirected and stored normalized (smaller word
//! first); relation tags are kept but nothing downstream consumes them.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::{Document, Sentence};
use crate::error::{Error, Result};

/// An undirected dependency between two words of one sentence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DependencyPair {
    pub head: String,
    pub dependent: String,
    pub relation_tag: Option<String>,
}

impl DependencyPair {
    /// Build a normalized pair from two surface forms. Returns `None` when
    /// either form is empty or both lowercase to the same word (self-pairs
    /// are dropped; the graphs stay simple).
    pub fn new(a: &str, b: &str, relation_tag: Option<&str>) -> Option<Self> {
        let a = a.to_lowercase();
        let b = b.to_lowercase();
        if a.is_empty() || b.is_empty() || a == b {
            return None;
        }
        let (head, dependent) = if a <= b { (a, b) } else { (b, a) };
        Some(DependencyPair {
            head,
            dependent,
            relation_tag: relation_tag.map(str::to_string),
        })
    }

    /// The two endpoint words, in normalized order.
    pub fn words(&self) -> (&str, &str) {
        (&self.head, &self.dependent)
    }
}

/// All dependency pairs found in one sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentenceDeps {
    pub sentence_index: usize,
    pub pairs: BTreeSet<DependencyPair>,
}

/// Parse CoNLL-U content into per-sentence dependency pairs.
///
/// Token lines must have 10 tab-separated columns; sentences are separated by
/// blank lines and `#` comment lines are skipped, as are multiword-token
/// (`1-2`) and empty-node (`1.1`) ids. Each token contributes one pair
/// linking its lowercased form to its head's form; root attachments (HEAD 0)
/// contribute nothing. `expected_sentences` is the sentence count of the
/// cleaned document the file must align with.
pub fn parse_conllu_str(
    content: &str,
    file: &str,
    doc_id: &str,
    expected_sentences: usize,
) -> Result<Vec<SentenceDeps>> {
    let mut sentences: Vec<SentenceDeps> = Vec::new();
    // (id, form, head, deprel) for the sentence being accumulated
    let mut current: Vec<(usize, String, usize, Option<String>)> = Vec::new();
    let mut first_line_of_sentence = 0usize;

    let malformed = |line: usize, msg: String| Error::ParseLine {
        file: file.to_string(),
        line,
        msg,
    };

    let close_sentence = |current: &mut Vec<(usize, String, usize, Option<String>)>,
                              sentences: &mut Vec<SentenceDeps>,
                              at_line: usize|
     -> Result<()> {
        if current.is_empty() {
            return Ok(());
        }
        let mut pairs = BTreeSet::new();
        for (_, form, head, deprel) in current.iter() {
            if *head == 0 {
                continue;
            }
            let head_form = current
                .iter()
                .find(|(id, ..)| id == head)
                .map(|(_, f, ..)| f.as_str())
                .ok_or_else(|| {
                    malformed(at_line, format!("HEAD index {head} not present in sentence"))
                })?;
            if let Some(p) = DependencyPair::new(form, head_form, deprel.as_deref()) {
                pairs.insert(p);
            }
        }
        sentences.push(SentenceDeps {
            sentence_index: sentences.len(),
            pairs,
        });
        current.clear();
        Ok(())
    };

    for (idx, raw_line) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            close_sentence(&mut current, &mut sentences, first_line_of_sentence)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(malformed(
                line_no,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id_col = cols[0];
        if id_col.contains('-') || id_col.contains('.') {
            continue; // multiword token ranges and empty nodes carry no tree edge
        }
        let id: usize = id_col
            .parse()
            .map_err(|_| malformed(line_no, format!("bad token id '{id_col}'")))?;
        let head: usize = cols[6]
            .parse()
            .map_err(|_| malformed(line_no, format!("bad HEAD value '{}'", cols[6])))?;
        let deprel = match cols[7] {
            "_" => None,
            tag => Some(tag.to_string()),
        };
        if current.is_empty() {
            first_line_of_sentence = line_no;
        }
        current.push((id, cols[1].to_string(), head, deprel));
    }
    close_sentence(&mut current, &mut sentences, first_line_of_sentence)?;

    if sentences.len() != expected_sentences {
        return Err(Error::SentenceMismatch {
            doc_id: doc_id.to_string(),
            expected: expected_sentences,
            found: sentences.len(),
        });
    }
    Ok(sentences)
}

/// Read and parse a CoNLL-U file; see [`parse_conllu_str`].
pub fn parse_conllu(path: &Path, doc_id: &str, expected_sentences: usize) -> Result<Vec<SentenceDeps>> {
    let content = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_conllu_str(&content, &path.to_string_lossy(), doc_id, expected_sentences)
}

/// Emit a pair for every two distinct tokens at most `window` positions apart
/// in the sentence's (stopword-free) token sequence.
pub fn cooccurrence_deps(sentence: &Sentence, window: usize) -> SentenceDeps {
    assert!(window >= 1, "co-occurrence window must be at least 1");
    let tokens = &sentence.tokens;
    let mut pairs = BTreeSet::new();
    for i in 0..tokens.len() {
        for j in (i + 1)..tokens.len().min(i + window + 1) {
            if let Some(p) = DependencyPair::new(&tokens[i], &tokens[j], None) {
                pairs.insert(p);
            }
        }
    }
    SentenceDeps {
        sentence_index: sentence.original_index,
        pairs,
    }
}

/// Where a document's dependencies come from. Exactly one mode is active per
/// run.
#[derive(Debug, Clone)]
pub enum DependencySource {
    /// Read `<dir>/<doc_id>.conllu` for each document.
    Conllu { dir: PathBuf },
    /// Windowed co-occurrence over each sentence's tokens.
    Window { size: usize },
}

impl DependencySource {
    pub fn deps_for(&self, doc: &Document) -> Result<Vec<SentenceDeps>> {
        match self {
            DependencySource::Conllu { dir } => {
                let path = dir.join(format!("{}.conllu", doc.doc_id));
                if doc.sentences.is_empty() && !path.exists() {
                    return Ok(Vec::new());
                }
                parse_conllu(&path, &doc.doc_id, doc.sentences.len())
            }
            DependencySource::Window { size } => Ok(doc
                .sentences
                .iter()
                .map(|s| cooccurrence_deps(s, *size))
                .collect()),
        }
    }
}
