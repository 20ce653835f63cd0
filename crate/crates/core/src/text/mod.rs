//! Text tokenization and stemming.

mod porter;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use porter::stem;

/// Tokens shorter than this (in characters) are dropped.
pub const MIN_TOKEN_CHARS: usize = 2;

/// A lowercased word and where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken {
    pub text: String,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextTerm {
    pub stem: String,
    pub span: Range<usize>,
}

/// Splits on every non-alphanumeric character and lowercases.
pub fn tokenize_text(text: &str) -> Vec<RawToken> {
    let mut out = Vec::new();
    let mut start = None;
    let flush = |start: usize, end: usize, out: &mut Vec<RawToken>| {
        let word = &text[start..end];
        if word.chars().count() >= MIN_TOKEN_CHARS {
            out.push(RawToken { text: word.to_lowercase(), span: start..end });
        }
    };
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                flush(s, i, &mut out);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        flush(s, text.len(), &mut out);
    }
    out
}

/// Tokenize and stem.
pub fn analyze(text: &str) -> Vec<TextTerm> {
    tokenize_text(text).into_iter().map(|t| TextTerm { stem: stem(&t.text), span: t.span }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(text: &str) -> Vec<String> {
        tokenize_text(text).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn splits_and_lowercases() {
        assert_eq!(words("Quadratic polynomials!"), ["quadratic", "polynomials"]);
        assert!(words("").is_empty());
        assert_eq!(words("a+b and sums"), ["and", "sums"]);
        assert_eq!(words("x2 is éx"), ["x2", "is", "éx"]);
    }

    #[test]
    fn spans_point_into_the_original() {
        let text = "Über   Quadratic-FORMS.";
        for tok in tokenize_text(text) {
            assert_eq!(text[tok.span.clone()].to_lowercase(), tok.text);
        }
    }

    #[test]
    fn analyzed_terms_are_stems() {
        let terms = analyze("Quadratic polynomials");
        assert_eq!(terms.iter().map(|t| t.stem.as_str()).collect::<Vec<_>>(), ["quadrat", "polynomi"]);
        assert_eq!(terms[1].span, 10..21);
    }
}
