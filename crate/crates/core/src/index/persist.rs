//! On-disk index directory.
//!
//! ```text
//! meta.json       {"version", "n_docs", "n_math_tokens", "config"}
//! docs.jsonl      {"doc_id", "title", "text", "formulae": [infix], "norm"}
//! postings.jsonl  {"token", "kind", "df", "postings": [[doc, tf_w], ...]}
//! CHECKSUM        hex SHA-256 over the three files above, in that order
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DocNum, Index, IndexError, IndexMeta, Posting, PostingList, StoredDoc, TermKind};
use crate::canon::normalize;
use crate::corpus::Document;
use crate::formula::parse_infix;

pub const FORMAT_VERSION: u32 = 1;

const META: &str = "meta.json";
const DOCS: &str = "docs.jsonl";
const POSTINGS: &str = "postings.jsonl";
const CHECKSUM: &str = "CHECKSUM";

#[derive(Serialize, Deserialize)]
struct DocLine {
    doc_id: String,
    title: String,
    text: String,
    formulae: Vec<String>,
    norm: f64,
}

#[derive(Serialize, Deserialize)]
struct PostingLine {
    token: String,
    kind: TermKind,
    df: usize,
    postings: Vec<(DocNum, f64)>,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> IndexError + '_ {
    move |source| IndexError::Io { path: path.display().to_string(), source }
}

fn checksum(parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    hex::encode(hasher.finalize())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("index records serialize")
}

impl Index {
    /// Writes the index into `dir`, creating it if needed.
    pub fn persist(&self, dir: &Path) -> Result<(), IndexError> {
        fs::create_dir_all(dir).map_err(io_error(dir))?;

        let meta = serde_json::to_string_pretty(&self.meta()).expect("meta serializes") + "\n";

        let mut docs = String::new();
        for stored in &self.docs {
            let line = DocLine {
                doc_id: stored.doc.doc_id.clone(),
                title: stored.doc.title.clone(),
                text: stored.doc.text.clone(),
                formulae: stored.doc.formulae.iter().map(|f| f.render()).collect(),
                norm: stored.norm,
            };
            docs.push_str(&to_json(&line));
            docs.push('\n');
        }

        let mut lists: Vec<&PostingList> = self.text.values().chain(self.math.values()).collect();
        lists.sort_by(|a, b| (a.kind, &a.token).cmp(&(b.kind, &b.token)));
        let mut postings = String::new();
        for list in lists {
            let line = PostingLine {
                token: list.token.clone(),
                kind: list.kind,
                df: list.df(),
                postings: list.postings.iter().map(|p| (p.doc, p.tf_w)).collect(),
            };
            postings.push_str(&to_json(&line));
            postings.push('\n');
        }

        let sum = checksum(&[meta.as_bytes(), docs.as_bytes(), postings.as_bytes()]);
        for (name, body) in [(META, meta), (DOCS, docs), (POSTINGS, postings), (CHECKSUM, sum + "\n")] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(io_error(&path))?;
        }
        Ok(())
    }

    /// Reads only `meta.json`, without verifying the rest of the directory.
    pub fn read_meta(dir: &Path) -> Result<IndexMeta, IndexError> {
        let bytes = read_part(dir, META)?;
        serde_json::from_slice(&bytes).map_err(|e| IndexError::CorruptIndex(format!("{META}: {e}")))
    }

    pub fn open(dir: &Path) -> Result<Index, IndexError> {
        let meta_bytes = read_part(dir, META)?;
        let docs_bytes = read_part(dir, DOCS)?;
        let postings_bytes = read_part(dir, POSTINGS)?;
        let stored_sum = read_part(dir, CHECKSUM)?;
        let expected = checksum(&[&meta_bytes, &docs_bytes, &postings_bytes]);
        if String::from_utf8_lossy(&stored_sum).trim() != expected {
            return Err(IndexError::CorruptIndex("checksum mismatch".into()));
        }

        let corrupt = |what: &str, line: usize, e: &dyn std::fmt::Display| {
            IndexError::CorruptIndex(format!("{what}:{line}: {e}"))
        };

        let version = serde_json::from_slice::<serde_json::Value>(&meta_bytes)
            .map_err(|e| corrupt(META, 1, &e))?
            .get("version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| IndexError::CorruptIndex(format!("{META}: missing version")))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(IndexError::FormatVersionMismatch {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                expected: FORMAT_VERSION,
            });
        }
        let meta: IndexMeta = serde_json::from_slice(&meta_bytes).map_err(|e| corrupt(META, 1, &e))?;
        meta.config.validate().map_err(|e| corrupt(META, 1, &e))?;

        let mut index = Index::new(meta.config.clone());
        index.n_math_tokens = meta.n_math_tokens;
        for (i, line) in text_lines(&docs_bytes, DOCS)?.enumerate() {
            let rec: DocLine = serde_json::from_str(line).map_err(|e| corrupt(DOCS, i + 1, &e))?;
            let formulae = rec
                .formulae
                .iter()
                .map(|f| parse_infix(f).map(|t| normalize(&t)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| corrupt(DOCS, i + 1, &e))?;
            if index.by_id.insert(rec.doc_id.clone(), i as DocNum).is_some() {
                return Err(corrupt(DOCS, i + 1, &format!("duplicate doc_id {:?}", rec.doc_id)));
            }
            let doc = Document { doc_id: rec.doc_id, title: rec.title, text: rec.text, formulae };
            index.docs.push(StoredDoc { doc, norm: rec.norm });
        }
        if index.docs.len() != meta.n_docs {
            return Err(IndexError::CorruptIndex(format!(
                "{META} declares {} documents, {DOCS} holds {}",
                meta.n_docs,
                index.docs.len()
            )));
        }

        for (i, line) in text_lines(&postings_bytes, POSTINGS)?.enumerate() {
            let rec: PostingLine = serde_json::from_str(line).map_err(|e| corrupt(POSTINGS, i + 1, &e))?;
            let sorted = rec.postings.windows(2).all(|w| w[0].0 < w[1].0);
            let in_range = rec.postings.iter().all(|&(d, w)| (d as usize) < index.docs.len() && w > 0.0);
            if rec.df != rec.postings.len() || !sorted || !in_range || rec.postings.is_empty() {
                return Err(corrupt(POSTINGS, i + 1, &"inconsistent posting list"));
            }
            let list = PostingList {
                token: rec.token.clone(),
                kind: rec.kind,
                postings: rec.postings.into_iter().map(|(doc, tf_w)| Posting { doc, tf_w }).collect(),
            };
            let map: &mut HashMap<String, PostingList> = index.map_mut(rec.kind);
            if map.insert(rec.token, list).is_some() {
                return Err(corrupt(POSTINGS, i + 1, &"duplicate token"));
            }
        }
        Ok(index)
    }
}

fn read_part(dir: &Path, name: &str) -> Result<Vec<u8>, IndexError> {
    let path = dir.join(name);
    match fs::read(&path) {
        Ok(bytes) => Ok(bytes),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(IndexError::CorruptIndex(format!("missing {name} in {}", dir.display())))
        }
        Err(e) => Err(io_error(&path)(e)),
    }
}

fn text_lines<'a>(bytes: &'a [u8], name: &str) -> Result<impl Iterator<Item = &'a str>, IndexError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IndexError::CorruptIndex(format!("{name}: {e}")))?;
    Ok(text.lines().filter(|l| !l.trim().is_empty()))
}
