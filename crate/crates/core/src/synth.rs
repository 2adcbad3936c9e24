//! Seeded synthetic corpora for reproducible constraint experiments.
//!
//! Each topic gets its own vocabulary; every token is drawn from the
//! document's topic vocabulary with probability `topic_word_prob` and from a
//! vocabulary shared across topics otherwise. Token-level mixture only — no
//! grammar — so the windowed co-occurrence dependency fallback is the
//! intended companion. Generation is a single sequential PRNG stream per
//! seed, which makes corpora byte-identical across runs.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{process_document, Corpus, StopList};
use crate::error::{Error, Result};

/// Shape of a generated corpus. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_topics: usize,
    pub docs_per_topic: usize,
    pub topic_vocab_size: usize,
    pub shared_vocab_size: usize,
    pub sentence_len: (usize, usize),
    pub sentences_per_doc: (usize, usize),
    pub topic_word_prob: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_topics: 4,
            docs_per_topic: 25,
            topic_vocab_size: 100,
            shared_vocab_size: 30,
            sentence_len: (3, 5),
            sentences_per_doc: (1, 2),
            topic_word_prob: 0.7,
            seed: 42,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_topics", self.n_topics),
            ("docs_per_topic", self.docs_per_topic),
            ("topic_vocab_size", self.topic_vocab_size),
            ("shared_vocab_size", self.shared_vocab_size),
            ("sentence_len min", self.sentence_len.0),
            ("sentences_per_doc min", self.sentences_per_doc.0),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::InvalidInput(format!("{name} must be at least 1")));
            }
        }
        for (name, (lo, hi)) in [
            ("sentence_len", self.sentence_len),
            ("sentences_per_doc", self.sentences_per_doc),
        ] {
            if lo > hi {
                return Err(Error::InvalidInput(format!("{name} range {lo}..={hi} is empty")));
            }
        }
        if !(self.topic_word_prob > 0.0 && self.topic_word_prob <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "topic_word_prob {} outside (0, 1]",
                self.topic_word_prob
            )));
        }
        Ok(())
    }

    pub fn n_docs(&self) -> usize {
        self.n_topics * self.docs_per_topic
    }
}

/// One generated document, ready to write to the dataset layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDoc {
    pub label: String,
    pub file_name: String,
    pub text: String,
}

/// Digit-free word suffixes: base-26 letters, at least two wide.
fn letters(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    while out.len() < 2 {
        out.push(b'a');
    }
    out.reverse();
    String::from_utf8(out).expect("ascii letters")
}

fn topic_word(topic: usize, index: usize) -> String {
    format!("t{}v{}", letters(topic), letters(index))
}

fn shared_word(index: usize) -> String {
    format!("sharedv{}", letters(index))
}

/// Generate the documents of a synthetic corpus, deterministically for the
/// spec's seed. Labels are `topic<letters>`; files are `doc<letters>.txt`.
pub fn generate_documents(spec: &SynthSpec) -> Result<Vec<SynthDoc>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut docs = Vec::with_capacity(spec.n_docs());
    for topic in 0..spec.n_topics {
        let label = format!("topic{}", letters(topic));
        for doc_idx in 0..spec.docs_per_topic {
            let n_sentences =
                rng.random_range(spec.sentences_per_doc.0..=spec.sentences_per_doc.1);
            let mut sentences = Vec::with_capacity(n_sentences);
            for _ in 0..n_sentences {
                let n_tokens = rng.random_range(spec.sentence_len.0..=spec.sentence_len.1);
                let mut tokens = Vec::with_capacity(n_tokens);
                for _ in 0..n_tokens {
                    let word = if rng.random::<f64>() < spec.topic_word_prob {
                        topic_word(topic, rng.random_range(0..spec.topic_vocab_size))
                    } else {
                        shared_word(rng.random_range(0..spec.shared_vocab_size))
                    };
                    tokens.push(word);
                }
                sentences.push(format!("{}.", tokens.join(" ")));
            }
            docs.push(SynthDoc {
                label: label.clone(),
                file_name: format!("doc{}.txt", letters(doc_idx)),
                text: format!("{}\n", sentences.join(" ")),
            });
        }
    }
    Ok(docs)
}

/// Generate a corpus in memory, running the generated text through the exact
/// cleaning pipeline used for on-disk datasets.
pub fn generate_corpus(spec: &SynthSpec, stoplist: &StopList) -> Result<Corpus> {
    let documents = generate_documents(spec)?
        .into_iter()
        .map(|d| {
            let stem = d.file_name.trim_end_matches(".txt");
            process_document(format!("{}/{stem}", d.label), d.label, d.text, stoplist)
        })
        .collect();
    Ok(Corpus::from_documents(documents))
}

/// Write a generated corpus to `<out>/<label>/<file>` so it can be reloaded
/// like any other dataset.
pub fn write_dataset(spec: &SynthSpec, out: &Path) -> Result<()> {
    let io_err = |path: &Path, source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    for doc in generate_documents(spec)? {
        let dir = out.join(&doc.label);
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let path = dir.join(&doc.file_name);
        fs::write(&path, &doc.text).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}
