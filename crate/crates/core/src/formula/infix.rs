use super::expr::{parse_tokens, Token, TokenKind};
use super::{is_name_char, is_name_start, FormulaError, FormulaTree};

/// Parses plain infix notation such as `3*x^2-2*x+2` or `sqrt(a) = b`.
///
/// Juxtaposition (`3x`, `2(a+b)`) reads as multiplication. Errors carry the
/// byte offset of the offending character.
pub fn parse_infix(text: &str) -> Result<FormulaTree, FormulaError> {
    let tokens = lex(text)?;
    parse_tokens(tokens, text.len())
}

fn lex(text: &str) -> Result<Vec<Token>, FormulaError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let kind = if c.is_ascii_digit() {
            let mut end = pos;
            let mut seen_dot = false;
            while let Some(&(i, d)) = chars.peek() {
                if d.is_ascii_digit() {
                    end = i + 1;
                    chars.next();
                } else if d == '.' && !seen_dot {
                    // only a dot followed by a digit belongs to the literal
                    let next_is_digit = text[i + 1..].starts_with(|n: char| n.is_ascii_digit());
                    if !next_is_digit {
                        return Err(FormulaError::parse(i, "expected digits after '.'"));
                    }
                    seen_dot = true;
                    end = i + 1;
                    chars.next();
                } else {
                    break;
                }
            }
            TokenKind::Number(text[pos..end].to_string())
        } else if is_name_start(c) {
            let mut end = pos;
            while let Some(&(i, d)) = chars.peek() {
                if !is_name_char(d) {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            TokenKind::Ident(text[pos..end].to_string())
        } else {
            chars.next();
            match c {
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                ',' => TokenKind::Comma,
                '+' | '^' | '_' | '=' | '<' | '>' | '≤' | '≥' | '≠' | '-' | '*' | '/' => TokenKind::Op(c.to_string()),
                '−' => TokenKind::Op("-".into()),
                '×' | '·' | '⋅' | '\u{2062}' => TokenKind::Op("*".into()),
                '÷' | '∕' => TokenKind::Op("/".into()),
                _ => return Err(FormulaError::parse(pos, format!("unexpected character {c:?}"))),
            }
        };
        tokens.push(Token { kind, pos });
    }
    Ok(tokens)
}
