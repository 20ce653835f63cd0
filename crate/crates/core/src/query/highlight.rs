use std::collections::HashSet;
use std::ops::Range;

use thiserror::Error;

use super::Query;
use crate::index::Index;
use crate::unify::{tokens_for_index, tokens_for_query, Variant};

/// Maximum snippet length in characters.
pub const SNIPPET_CHARS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown document {0:?}")]
pub struct UnknownDocument(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Highlights {
    /// Byte spans into the stored document text.
    pub text: Vec<Range<usize>>,
    /// Indices into the stored document's formulae.
    pub math: Vec<usize>,
    pub snippet: String,
    /// Byte range of the snippet within the document text.
    pub snippet_range: Range<usize>,
}

/// Marks text terms whose stem occurs in the query, and formulae sharing a
/// non-structural variant token with some query formula.
pub fn highlight(index: &Index, doc_id: &str, query: &Query) -> Result<Highlights, UnknownDocument> {
    let num = index.doc_num(doc_id).ok_or_else(|| UnknownDocument(doc_id.to_string()))?;
    let doc = &index.doc(num).expect("id map points at a stored doc").doc;

    let stems: HashSet<&str> = query.terms.iter().map(|t| t.stem.as_str()).collect();
    let text: Vec<Range<usize>> =
        doc.text_terms().into_iter().filter(|t| stems.contains(t.stem.as_str())).map(|t| t.span).collect();

    let config = index.config();
    let wanted: HashSet<String> = query
        .formulae
        .iter()
        .flat_map(|f| tokens_for_query(&f.tree, config))
        .filter(|t| !matches!(t.variant, Variant::Structural(_)))
        .map(|t| t.token)
        .collect();
    let math = if wanted.is_empty() {
        Vec::new()
    } else {
        doc.formulae
            .iter()
            .enumerate()
            .filter(|(_, f)| tokens_for_index(f, config).iter().any(|t| wanted.contains(&t.token)))
            .map(|(i, _)| i)
            .collect()
    };

    let snippet_range = snippet_window(&doc.text, text.first());
    Ok(Highlights { snippet: doc.text[snippet_range.clone()].to_string(), snippet_range, text, math })
}

/// A window of at most [`SNIPPET_CHARS`] characters centred on `focus`, or the
/// start of the text without one.
fn snippet_window(text: &str, focus: Option<&Range<usize>>) -> Range<usize> {
    let boundaries: Vec<usize> = text.char_indices().map(|(i, _)| i).chain([text.len()]).collect();
    let total = boundaries.len() - 1;
    if total <= SNIPPET_CHARS {
        return 0..text.len();
    }
    let start_char = match focus {
        Some(span) => {
            let mid_byte = (span.start + span.end) / 2;
            let mid_char = boundaries.partition_point(|&b| b <= mid_byte).saturating_sub(1);
            mid_char.saturating_sub(SNIPPET_CHARS / 2).min(total - SNIPPET_CHARS)
        }
        None => 0,
    };
    boundaries[start_char]..boundaries[start_char + SNIPPET_CHARS]
}
