//! Mixed text and math queries.
//!
//! A query is split into stemmed terms and normalized formulae, expanded into
//! prioritized subqueries, each subquery is run on its own, and the per
//! subquery rankings are interleaved.

mod exec;
mod highlight;
mod search;
mod subquery;

use thiserror::Error;

use crate::canon::normalize;
use crate::formula::{parse_infix, parse_mathml, FormulaError, FormulaTree};
use crate::mixed::{split_math, SegmentKind};
use crate::text::{analyze, TextTerm};

pub use exec::{execute_subquery, interleave, QueryTokens};
pub use highlight::{highlight, Highlights, UnknownDocument, SNIPPET_CHARS};
pub use search::{search, SearchConfig};
pub use subquery::{generate_subqueries, Strategy, Subquery};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("formula {segment} is malformed: {source}")]
    Formula {
        segment: usize,
        /// Byte offset into the query string, when the parser reported one.
        position: Option<usize>,
        source: FormulaError,
    },
    #[error("empty query")]
    EmptyQuery,
}

impl QueryError {
    pub fn position(&self) -> Option<usize> {
        match self {
            QueryError::Syntax { position, .. } => Some(*position),
            QueryError::Formula { position, .. } => *position,
            QueryError::EmptyQuery => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryFormula {
    /// Normalized (canonicalized and ordered).
    pub tree: FormulaTree,
    pub source: String,
}

/// Terms and formulae in order of appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub terms: Vec<TextTerm>,
    pub formulae: Vec<QueryFormula>,
}

pub fn parse_query(q: &str) -> Result<Query, QueryError> {
    let segments = split_math(q).map_err(|e| QueryError::Syntax { position: e.position, message: e.message })?;
    let mut terms = Vec::new();
    let mut formulae = Vec::new();
    for seg in segments {
        let body = &q[seg.inner.clone()];
        let parsed = match seg.kind {
            SegmentKind::Text => {
                terms.extend(analyze(body).into_iter().map(|t| TextTerm {
                    stem: t.stem,
                    span: t.span.start + seg.inner.start..t.span.end + seg.inner.start,
                }));
                continue;
            }
            SegmentKind::Infix => parse_infix(body),
            SegmentKind::MathMl => parse_mathml(body),
        };
        let tree = parsed.map_err(|source| QueryError::Formula {
            segment: formulae.len(),
            position: Some(seg.inner.start + source.position().unwrap_or(0)),
            source,
        })?;
        formulae.push(QueryFormula { tree: normalize(&tree), source: body.to_string() });
    }
    if terms.is_empty() && formulae.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    Ok(Query { terms, formulae })
}
