//! JSONL corpus records and their conversion into indexable documents.
//!
//! One document per line: `{"id", "title", "text", "mathml"?}`. Math embedded
//! in `text` as `$infix$` or `<math>` elements is extracted in order of
//! appearance, followed by the optional standalone `mathml` strings.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::normalize;
use crate::formula::{parse_infix, parse_mathml, FormulaError, FormulaTree};
use crate::mixed::{mask_math, split_math, SegmentError, SegmentKind};
use crate::text::{analyze, TextTerm};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mathml: Vec<String>,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error("formula {index}: {source}")]
    Formula { index: usize, source: FormulaError },
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Line { path: PathBuf, line: usize, message: String },
}

/// A corpus document after formula preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub text: String,
    /// Canonicalized and ordered.
    pub formulae: Vec<FormulaTree>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, title: impl Into<String>, text: impl Into<String>) -> Self {
        Document { doc_id: doc_id.into(), title: title.into(), text: text.into(), formulae: Vec::new() }
    }

    pub fn from_record(record: &CorpusRecord) -> Result<Self, DocumentError> {
        let mut formulae = Vec::new();
        for seg in split_math(&record.text)? {
            let source = &record.text[seg.inner.clone()];
            let parsed = match seg.kind {
                SegmentKind::Text => continue,
                SegmentKind::Infix => parse_infix(source),
                SegmentKind::MathMl => parse_mathml(source),
            };
            let tree = parsed.map_err(|source| DocumentError::Formula { index: formulae.len(), source })?;
            formulae.push(normalize(&tree));
        }
        for xml in &record.mathml {
            let tree = parse_mathml(xml).map_err(|source| DocumentError::Formula { index: formulae.len(), source })?;
            formulae.push(normalize(&tree));
        }
        Ok(Document { doc_id: record.id.clone(), title: record.title.clone(), text: record.text.clone(), formulae })
    }

    /// Stemmed terms of the prose, with spans into [`text`](Self::text).
    pub fn text_terms(&self) -> Vec<TextTerm> {
        match split_math(&self.text) {
            Ok(segments) => analyze(&mask_math(&self.text, &segments)),
            Err(_) => analyze(&self.text),
        }
    }
}

/// Reads every record of a JSONL corpus. Blank lines are skipped.
pub fn read_records(path: &Path) -> Result<Vec<(usize, CorpusRecord)>, CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Line {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, record));
    }
    Ok(out)
}

/// Reads a corpus and preprocesses every document, failing on the first bad
/// line.
pub fn read_corpus(path: &Path) -> Result<Vec<Document>, CorpusError> {
    read_records(path)?
        .into_iter()
        .map(|(line, record)| {
            Document::from_record(&record).map_err(|e| CorpusError::Line {
                path: path.to_path_buf(),
                line,
                message: format!("document {:?}: {e}", record.id),
            })
        })
        .collect()
}
