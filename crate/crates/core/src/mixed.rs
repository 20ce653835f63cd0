//! Splitting mixed text into prose and embedded math.
//!
//! Math is written as `$infix$` or as inline `<math>…</math>` markup. `\$` is
//! a literal dollar sign.

use std::ops::Range;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Text,
    Infix,
    MathMl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Whole segment including delimiters.
    pub outer: Range<usize>,
    /// Payload handed to a parser: the infix body, or the full `<math>` element.
    pub inner: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at byte {position}")]
pub struct SegmentError {
    pub position: usize,
    pub message: String,
}

pub fn split_math(text: &str) -> Result<Vec<Segment>, SegmentError> {
    let mut segments = Vec::new();
    let mut text_start = 0;
    let mut i = 0;
    let bytes = text.as_bytes();
    let push_text = |segments: &mut Vec<Segment>, start: usize, end: usize| {
        if start < end {
            segments.push(Segment { kind: SegmentKind::Text, outer: start..end, inner: start..end });
        }
    };
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if bytes.get(i + 1) == Some(&b'$') => i += 2,
            b'$' => {
                let close = find_unescaped_dollar(text, i + 1).ok_or_else(|| SegmentError {
                    position: i,
                    message: "unbalanced '$'".into(),
                })?;
                push_text(&mut segments, text_start, i);
                segments.push(Segment { kind: SegmentKind::Infix, outer: i..close + 1, inner: i + 1..close });
                i = close + 1;
                text_start = i;
            }
            b'<' if starts_math_tag(&text[i..]) => {
                let close = text[i..].find("</math>").ok_or_else(|| SegmentError {
                    position: i,
                    message: "unclosed <math> element".into(),
                })?;
                let end = i + close + "</math>".len();
                push_text(&mut segments, text_start, i);
                segments.push(Segment { kind: SegmentKind::MathMl, outer: i..end, inner: i..end });
                i = end;
                text_start = i;
            }
            _ => i += 1,
        }
    }
    push_text(&mut segments, text_start, text.len());
    Ok(segments)
}

fn find_unescaped_dollar(text: &str, from: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    (from..bytes.len()).find(|&j| bytes[j] == b'$' && !(j > from && bytes[j - 1] == b'\\'))
}

fn starts_math_tag(s: &str) -> bool {
    s.strip_prefix("<math").is_some_and(|rest| rest.starts_with(['>', ' ', '\t', '\n', '\r', '/']))
}

/// Copy of `text` with every math segment blanked out byte-for-byte, so that
/// spans found in the copy are valid spans of the original.
pub fn mask_math(text: &str, segments: &[Segment]) -> String {
    let mut masked = String::with_capacity(text.len());
    for seg in segments {
        match seg.kind {
            SegmentKind::Text => masked.push_str(&text[seg.outer.clone()]),
            _ => masked.extend(std::iter::repeat_n(' ', seg.outer.len())),
        }
    }
    masked
}
