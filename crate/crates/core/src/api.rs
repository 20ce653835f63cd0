//! JSON shapes exchanged between the search service and its clients.

use serde::{Deserialize, Serialize};

/// Result count when a search request names none.
pub const DEFAULT_LIMIT: usize = 50;
/// Larger requested limits are clamped to this.
pub const MAX_LIMIT: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubqueryView {
    pub priority: usize,
    /// Stems.
    pub terms: Vec<String>,
    /// Normalized formulae as token strings.
    pub formulae: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub doc_id: String,
    pub title: String,
    pub score: f64,
    /// Priority of the subquery that first produced this hit.
    pub priority: usize,
    pub snippet: String,
    /// Byte range of `snippet` in the document text.
    pub snippet_range: [usize; 2],
    /// Byte spans in the document text.
    pub text_highlights: Vec<[usize; 2]>,
    /// Indices into the document's formulae.
    pub math_highlights: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query: String,
    pub subqueries: Vec<SubqueryView>,
    pub results: Vec<SearchHit>,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentView {
    pub doc_id: String,
    pub title: String,
    pub text: String,
    /// Normalized formulae rendered as infix.
    pub formulae: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub n_docs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    /// Byte offset into the query, for query errors that have one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}

impl DocumentView {
    pub fn from_document(doc: &crate::corpus::Document) -> Self {
        DocumentView {
            doc_id: doc.doc_id.clone(),
            title: doc.title.clone(),
            text: doc.text.clone(),
            formulae: doc.formulae.iter().map(|f| f.render()).collect(),
        }
    }
}
