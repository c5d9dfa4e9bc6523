//! Dataset ingestion and deterministic splitting.
//!
//! A dataset is a JSONL file with one QA instance per line:
//!
//! ```json
//! {"id": "q1", "question_conllu": "...", "options": ["a", "b"],
//!  "answer": "a", "documents": [{"doc_id": "d1", "conllu": "..."}]}
//! ```
//!
//! `question_conllu` holds exactly one CoNLL-U sentence; each document may
//! hold several. Splitting is driven by a caller-supplied seed through a
//! ChaCha8 generator, so a `(dataset order, seed)` pair always produces the
//! same folds on every platform.

pub mod conllu;

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{parse_conllu, serialize_conllu, ConlluError, ParsedSentence, Token};

/// A retrieved document: an id plus its parsed sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub sentences: Vec<ParsedSentence>,
}

/// One question-answering instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QAInstance {
    pub id: String,
    pub question: ParsedSentence,
    /// Multiple-choice options; empty for open-ended questions.
    pub options: Vec<String>,
    pub gold_answer: String,
    pub documents: Vec<Document>,
}

/// An ordered collection of instances.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    pub instances: Vec<QAInstance>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, instances: Vec<QAInstance>) -> Dataset {
        Dataset {
            name: name.into(),
            instances,
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Errors raised while loading or splitting datasets.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: missing or empty field `{field}`")]
    MissingField { line: usize, field: String },
    #[error("line {line}: bad JSON: {reason}")]
    BadJson { line: usize, reason: String },
    #[error("line {line}: duplicate instance id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: {context}: {source}")]
    BadParse {
        line: usize,
        context: String,
        #[source]
        source: ConlluError,
    },
    #[error("dataset has too few instances to split")]
    EmptyDataset,
    #[error("test fraction {0} is not strictly between 0 and 1")]
    BadFraction(f64),
    #[error("k = {k} is invalid for a dataset of {n} instances (need 2 <= k <= n)")]
    BadK { k: usize, n: usize },
}

#[derive(Debug, Serialize, Deserialize)]
struct RawDocument {
    doc_id: String,
    conllu: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawInstance {
    id: String,
    question_conllu: String,
    #[serde(default)]
    options: Vec<String>,
    answer: String,
    documents: Vec<RawDocument>,
}

/// Loads a JSONL dataset from `path`. The dataset name is the file stem.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, CorpusError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CorpusError::IoFailure {
        path: path.display().to_string(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let mut lines = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| CorpusError::IoFailure {
            path: path.display().to_string(),
            source,
        })?;
        lines.push((line_no + 1, line));
    }
    parse_dataset_lines(name, lines.into_iter())
}

/// Parses a dataset from in-memory JSONL text.
pub fn parse_dataset(name: impl Into<String>, text: &str) -> Result<Dataset, CorpusError> {
    let lines = text
        .lines()
        .enumerate()
        .map(|(line_no, line)| (line_no + 1, line.to_string()));
    parse_dataset_lines(name.into(), lines)
}

fn parse_dataset_lines(
    name: String,
    lines: impl Iterator<Item = (usize, String)>,
) -> Result<Dataset, CorpusError> {
    let mut instances = Vec::new();
    let mut seen = HashSet::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawInstance = serde_json::from_str(&line).map_err(|err| {
            let text = err.to_string();
            match text.strip_prefix("missing field `") {
                Some(rest) => CorpusError::MissingField {
                    line: line_no,
                    field: rest.split('`').next().unwrap_or("?").to_string(),
                },
                None => CorpusError::BadJson {
                    line: line_no,
                    reason: text,
                },
            }
        })?;
        if raw.id.is_empty() {
            return Err(CorpusError::MissingField {
                line: line_no,
                field: "id".to_string(),
            });
        }
        if raw.answer.is_empty() {
            return Err(CorpusError::MissingField {
                line: line_no,
                field: "answer".to_string(),
            });
        }
        if !seen.insert(raw.id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: raw.id,
            });
        }
        let mut question_sentences =
            parse_conllu(&raw.question_conllu).map_err(|source| CorpusError::BadParse {
                line: line_no,
                context: format!("question of `{}`", raw.id),
                source,
            })?;
        if question_sentences.len() != 1 {
            return Err(CorpusError::MissingField {
                line: line_no,
                field: "question_conllu".to_string(),
            });
        }
        let question = question_sentences.remove(0);
        let mut documents = Vec::with_capacity(raw.documents.len());
        for raw_doc in raw.documents {
            let sentences = parse_conllu(&raw_doc.conllu).map_err(|source| CorpusError::BadParse {
                line: line_no,
                context: format!("document `{}` of `{}`", raw_doc.doc_id, raw.id),
                source,
            })?;
            documents.push(Document {
                doc_id: raw_doc.doc_id,
                sentences,
            });
        }
        instances.push(QAInstance {
            id: raw.id,
            question,
            options: raw.options,
            gold_answer: raw.answer,
            documents,
        });
    }
    Ok(Dataset { name, instances })
}

/// Serializes a dataset back to JSONL, the inverse of [`load_dataset`].
pub fn write_dataset(dataset: &Dataset, mut out: impl Write) -> std::io::Result<()> {
    for instance in &dataset.instances {
        let raw = RawInstance {
            id: instance.id.clone(),
            question_conllu: instance.question.to_conllu(),
            options: instance.options.clone(),
            answer: instance.gold_answer.clone(),
            documents: instance
                .documents
                .iter()
                .map(|doc| RawDocument {
                    doc_id: doc.doc_id.clone(),
                    conllu: serialize_conllu(&doc.sentences),
                })
                .collect(),
        };
        let line = serde_json::to_string(&raw).expect("dataset serialization cannot fail");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    indices
}

fn subset(dataset: &Dataset, indices: &[usize]) -> Dataset {
    Dataset {
        name: dataset.name.clone(),
        instances: indices
            .iter()
            .map(|&i| dataset.instances[i].clone())
            .collect(),
    }
}

/// Splits into `(train, test)` by a seeded shuffle.
///
/// The test part receives `round(n * test_fraction)` instances, clamped to
/// `[1, n - 1]` so both parts are non-empty. Datasets with fewer than two
/// instances cannot be split.
pub fn split_holdout(
    dataset: &Dataset,
    seed: u64,
    test_fraction: f64,
) -> Result<(Dataset, Dataset), CorpusError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::BadFraction(test_fraction));
    }
    let n = dataset.len();
    if n < 2 {
        return Err(CorpusError::EmptyDataset);
    }
    let test_size = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let indices = shuffled_indices(n, seed);
    let (test_idx, train_idx) = indices.split_at(test_size);
    let mut train_idx = train_idx.to_vec();
    let mut test_idx = test_idx.to_vec();
    // Present each part in original dataset order; the shuffle only decides
    // membership.
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((subset(dataset, &train_idx), subset(dataset, &test_idx)))
}

/// Train/test index halves of one fold, both sorted ascending.
pub type FoldIndices = (Vec<usize>, Vec<usize>);

/// Produces `k` cross-validation folds as `(train, test)` index pairs,
/// both halves sorted ascending.
///
/// Positions are shuffled once with the seeded generator and dealt
/// round-robin, so fold sizes differ by at most one and every index
/// appears in exactly one test part.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<FoldIndices>, CorpusError> {
    if k < 2 || k > n {
        return Err(CorpusError::BadK { k, n });
    }
    let indices = shuffled_indices(n, seed);
    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let mut test_idx: Vec<usize> = indices
            .iter()
            .enumerate()
            .filter(|(pos, _)| pos % k == fold)
            .map(|(_, &idx)| idx)
            .collect();
        let mut train_idx: Vec<usize> = indices
            .iter()
            .enumerate()
            .filter(|(pos, _)| pos % k != fold)
            .map(|(_, &idx)| idx)
            .collect();
        test_idx.sort_unstable();
        train_idx.sort_unstable();
        folds.push((train_idx, test_idx));
    }
    Ok(folds)
}

/// Produces `k` cross-validation folds as `(train, test)` dataset pairs.
pub fn kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>, CorpusError> {
    let folds = kfold_indices(dataset.len(), k, seed)?;
    Ok(folds
        .into_iter()
        .map(|(train_idx, test_idx)| (subset(dataset, &train_idx), subset(dataset, &test_idx)))
        .collect())
}
