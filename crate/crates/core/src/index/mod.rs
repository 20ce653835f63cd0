//! Weighted inverted index over text stems and formula tokens.
//!
//! Text and math tokens live in separate namespaces. Each posting carries a
//! weighted term frequency: 1 per text occurrence, the summed
//! [`FormulaToken`](crate::unify::FormulaToken) weights for math.

mod persist;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use crate::unify::{tokens_for_index, UnifierConfig};

pub use persist::FORMAT_VERSION;

pub type DocNum = u32;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("index format version {found} is not supported (expected {expected})")]
    FormatVersionMismatch { found: u32, expected: u32 },
    #[error("corrupt index: {0}")]
    CorruptIndex(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Text,
    Math,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posting {
    pub doc: DocNum,
    pub tf_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostingList {
    pub token: String,
    pub kind: TermKind,
    /// Sorted by document number.
    pub postings: Vec<Posting>,
}

impl PostingList {
    pub fn df(&self) -> usize {
        self.postings.len()
    }

    pub fn tf_w(&self, doc: DocNum) -> Option<f64> {
        self.postings.binary_search_by_key(&doc, |p| p.doc).ok().map(|i| self.postings[i].tf_w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredDoc {
    pub doc: Document,
    /// `sqrt` of the document's token count; 1 for empty documents.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMeta {
    pub version: u32,
    pub n_docs: usize,
    pub n_math_tokens: u64,
    pub config: UnifierConfig,
}

/// Per-document token weights, computed independently of any index state.
#[derive(Debug, Clone)]
pub struct PreparedDoc {
    doc: Document,
    text: Vec<(String, f64)>,
    math: Vec<(String, f64)>,
    math_token_count: u64,
    norm: f64,
}

impl PreparedDoc {
    pub fn new(doc: Document, config: &UnifierConfig) -> Self {
        let mut text = WeightBag::default();
        let terms = doc.text_terms();
        for term in &terms {
            text.add(&term.stem, 1.0);
        }
        let mut math = WeightBag::default();
        let mut math_token_count = 0u64;
        for formula in &doc.formulae {
            for tok in tokens_for_index(formula, config) {
                math.add(&tok.token, tok.weight);
                math_token_count += 1;
            }
        }
        let total = terms.len() as f64 + math_token_count as f64;
        let norm = if total > 0.0 { total.sqrt() } else { 1.0 };
        PreparedDoc { doc, text: text.items, math: math.items, math_token_count, norm }
    }
}

#[derive(Default)]
struct WeightBag {
    items: Vec<(String, f64)>,
    slots: HashMap<String, usize>,
}

impl WeightBag {
    fn add(&mut self, key: &str, weight: f64) {
        match self.slots.get(key) {
            Some(&i) => self.items[i].1 += weight,
            None => {
                self.slots.insert(key.to_string(), self.items.len());
                self.items.push((key.to_string(), weight));
            }
        }
    }
}

/// Damped weighted term frequency: `1 + ln tf` from 1 upward, linear below.
///
/// Subformula and unified weights push `tf_w` below 1, where `1 + ln tf`
/// would turn negative; the linear branch meets it with equal value and slope
/// at `tf = 1`.
pub fn damped_tf(tf_w: f64) -> f64 {
    if tf_w >= 1.0 {
        1.0 + tf_w.ln()
    } else {
        tf_w
    }
}

pub fn idf(n_docs: usize, df: usize) -> f64 {
    (1.0 + n_docs as f64 / (df as f64 + 1.0)).ln()
}

/// Contribution of one matched token before length normalization.
pub fn token_score(query_weight: f64, tf_w: f64, n_docs: usize, df: usize) -> f64 {
    query_weight * damped_tf(tf_w) * idf(n_docs, df)
}

#[derive(Debug, Clone, Default)]
pub struct Index {
    config: UnifierConfig,
    docs: Vec<StoredDoc>,
    by_id: HashMap<String, DocNum>,
    text: HashMap<String, PostingList>,
    math: HashMap<String, PostingList>,
    n_math_tokens: u64,
}

impl Index {
    pub fn new(config: UnifierConfig) -> Self {
        Index { config, ..Index::default() }
    }

    /// Builds an index from documents, preprocessing them on the rayon pool
    /// when `parallel` is set. Document numbers follow input order either way.
    pub fn build(docs: Vec<Document>, config: UnifierConfig, parallel: bool) -> Result<Self, IndexError> {
        let prepared: Vec<PreparedDoc> = if parallel {
            docs.into_par_iter().map(|d| PreparedDoc::new(d, &config)).collect()
        } else {
            docs.into_iter().map(|d| PreparedDoc::new(d, &config)).collect()
        };
        let mut index = Index::new(config);
        for doc in prepared {
            index.insert(doc)?;
        }
        Ok(index)
    }

    pub fn add_document(&mut self, doc: Document) -> Result<DocNum, IndexError> {
        let prepared = PreparedDoc::new(doc, &self.config);
        self.insert(prepared)
    }

    /// Adds a document prepared with this index's configuration.
    pub fn insert(&mut self, prepared: PreparedDoc) -> Result<DocNum, IndexError> {
        if self.by_id.contains_key(&prepared.doc.doc_id) {
            return Err(IndexError::DuplicateDocId(prepared.doc.doc_id));
        }
        let num = DocNum::try_from(self.docs.len()).expect("fewer than 2^32 documents");
        for (kind, items) in [(TermKind::Text, prepared.text), (TermKind::Math, prepared.math)] {
            let map = self.map_mut(kind);
            for (token, tf_w) in items {
                map.entry(token)
                    .or_insert_with_key(|token| PostingList { token: token.clone(), kind, postings: Vec::new() })
                    .postings
                    .push(Posting { doc: num, tf_w });
            }
        }
        self.n_math_tokens += prepared.math_token_count;
        self.by_id.insert(prepared.doc.doc_id.clone(), num);
        self.docs.push(StoredDoc { doc: prepared.doc, norm: prepared.norm });
        Ok(num)
    }

    fn map(&self, kind: TermKind) -> &HashMap<String, PostingList> {
        match kind {
            TermKind::Text => &self.text,
            TermKind::Math => &self.math,
        }
    }

    fn map_mut(&mut self, kind: TermKind) -> &mut HashMap<String, PostingList> {
        match kind {
            TermKind::Text => &mut self.text,
            TermKind::Math => &mut self.math,
        }
    }

    pub fn lookup(&self, token: &str, kind: TermKind) -> Option<&PostingList> {
        self.map(kind).get(token)
    }

    /// All posting lists of one kind, in no particular order.
    pub fn posting_lists(&self, kind: TermKind) -> impl Iterator<Item = &PostingList> {
        self.map(kind).values()
    }

    pub fn config(&self) -> &UnifierConfig {
        &self.config
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    /// Formula tokens emitted while indexing, counted per formula.
    pub fn n_math_tokens(&self) -> u64 {
        self.n_math_tokens
    }

    pub fn meta(&self) -> IndexMeta {
        IndexMeta {
            version: FORMAT_VERSION,
            n_docs: self.n_docs(),
            n_math_tokens: self.n_math_tokens,
            config: self.config.clone(),
        }
    }

    pub fn doc(&self, num: DocNum) -> Option<&StoredDoc> {
        self.docs.get(num as usize)
    }

    pub fn docs(&self) -> &[StoredDoc] {
        &self.docs
    }

    pub fn doc_num(&self, doc_id: &str) -> Option<DocNum> {
        self.by_id.get(doc_id).copied()
    }

    /// `Σ q(t) · tf(t,d) · idf(t) / norm(d)` over tokens present in `doc`;
    /// absent tokens contribute nothing.
    pub fn score(&self, doc: DocNum, matched: &[(TermKind, &str, f64)]) -> f64 {
        let Some(stored) = self.doc(doc) else { return 0.0 };
        let n = self.n_docs();
        let sum: f64 = matched
            .iter()
            .filter_map(|&(kind, token, q)| {
                let list = self.lookup(token, kind)?;
                Some(token_score(q, list.tf_w(doc)?, n, list.df()))
            })
            .sum();
        sum / stored.norm
    }
}
