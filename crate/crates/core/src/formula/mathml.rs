use roxmltree::{Document, Node, ParsingOptions};

use super::expr::{parse_tokens, Token, TokenKind};
use super::{is_valid_literal, is_valid_name, FormulaError, FormulaTree, ROOT, SQRT};

/// Named entities that MathML producers emit but plain XML does not define.
const ENTITIES: &[(&str, &str)] = &[
    ("InvisibleTimes", "&#x2062;"),
    ("it", "&#x2062;"),
    ("minus", "&#x2212;"),
    ("times", "&#xD7;"),
    ("sdot", "&#x22C5;"),
    ("middot", "&#xB7;"),
    ("divide", "&#xF7;"),
    ("le", "&#x2264;"),
    ("leq", "&#x2264;"),
    ("ge", "&#x2265;"),
    ("geq", "&#x2265;"),
    ("ne", "&#x2260;"),
    ("plus", "+"),
    ("equals", "="),
];

/// Parses the supported Presentation MathML subset (`math`, `mrow`, `mi`,
/// `mn`, `mo`, `msup`, `msub`, `mfrac`, `msqrt`, `mroot`).
///
/// Flat token runs inside `math`/`mrow` are grouped with the same operator
/// table as [`parse_infix`](super::parse_infix); adjacent operands multiply.
pub fn parse_mathml(xml: &str) -> Result<FormulaTree, FormulaError> {
    let needs_prelude = !(xml.trim_start().starts_with("<?xml") || xml.contains("<!DOCTYPE"));
    let prelude = if needs_prelude {
        let decls: String = ENTITIES.iter().map(|(name, value)| format!("<!ENTITY {name} \"{value}\">")).collect();
        format!("<!DOCTYPE math [{decls}]>\n")
    } else {
        String::new()
    };
    let source = format!("{prelude}{xml}");
    let options = ParsingOptions { allow_dtd: true, ..ParsingOptions::default() };
    let doc = Document::parse_with_options(&source, options).map_err(|e| {
        let pos = e.pos();
        let row = (pos.row as usize).saturating_sub(if needs_prelude { 1 } else { 0 });
        FormulaError::parse(offset_of(xml, row, pos.col as usize), e.to_string())
    })?;
    let shift = prelude.len();
    let ctx = Ctx { shift };
    let root = doc.root_element();
    match root.tag_name().name() {
        "math" | "mrow" => ctx.element(root),
        other => Err(FormulaError::UnsupportedElement(other.to_string())),
    }
}

/// Byte offset of a 1-based (row, column-in-chars) position.
fn offset_of(text: &str, row: usize, col: usize) -> usize {
    let line_start: usize = text.split_inclusive('\n').take(row.saturating_sub(1)).map(str::len).sum();
    let line = &text[line_start.min(text.len())..];
    line_start + line.chars().take(col.saturating_sub(1)).map(char::len_utf8).sum::<usize>()
}

struct Ctx {
    shift: usize,
}

impl Ctx {
    fn pos(&self, node: Node) -> usize {
        node.range().start.saturating_sub(self.shift)
    }

    fn element_children<'a, 'i>(&self, node: Node<'a, 'i>) -> Result<Vec<Node<'a, 'i>>, FormulaError> {
        let mut out = Vec::new();
        for child in node.children() {
            if child.is_element() {
                out.push(child);
            } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
                return Err(FormulaError::parse(self.pos(child), "unexpected text content"));
            }
        }
        Ok(out)
    }

    fn leaf_text(&self, node: Node) -> Result<String, FormulaError> {
        if node.children().any(|c| c.is_element()) {
            return Err(FormulaError::parse(self.pos(node), "token element must contain only text"));
        }
        let text: String = node.children().filter_map(|c| c.text()).collect();
        let text = text.trim();
        if text.is_empty() {
            return Err(FormulaError::parse(self.pos(node), format!("empty <{}>", node.tag_name().name())));
        }
        Ok(text.to_string())
    }

    fn exactly<'a, 'i, const N: usize>(&self, node: Node<'a, 'i>) -> Result<[Node<'a, 'i>; N], FormulaError> {
        let children = self.element_children(node)?;
        let found = children.len();
        children.try_into().map_err(|_| {
            FormulaError::parse(
                self.pos(node),
                format!("<{}> needs {N} children, found {found}", node.tag_name().name()),
            )
        })
    }

    fn element(&self, node: Node) -> Result<FormulaTree, FormulaError> {
        let tag = node.tag_name().name();
        match tag {
            "math" | "mrow" => self.sequence(node),
            "semantics" => match self.element_children(node)?.first() {
                Some(&first) => self.element(first),
                None => Err(FormulaError::EmptyFormula),
            },
            "mi" => {
                let name = self.leaf_text(node)?;
                if !is_valid_name(&name) {
                    return Err(FormulaError::parse(self.pos(node), format!("unsupported identifier {name:?}")));
                }
                Ok(FormulaTree::Var(name))
            }
            "mn" => {
                let literal = self.leaf_text(node)?;
                if !is_valid_literal(&literal) || literal.starts_with('-') {
                    return Err(FormulaError::parse(self.pos(node), format!("bad number {literal:?}")));
                }
                Ok(FormulaTree::Num(literal))
            }
            "msup" | "msub" | "mfrac" | "mroot" => {
                let [a, b] = self.exactly::<2>(node)?;
                let sym = match tag {
                    "msup" => "^",
                    "msub" => "_",
                    "mfrac" => "/",
                    _ => ROOT,
                };
                Ok(FormulaTree::binary(sym, self.element(a)?, self.element(b)?))
            }
            "msqrt" => Ok(FormulaTree::op(SQRT, vec![self.sequence(node)?])),
            "mo" => Err(FormulaError::parse(self.pos(node), "operator where an operand was expected")),
            other => Err(FormulaError::UnsupportedElement(other.to_string())),
        }
    }

    /// Children of an mrow-like element, grouped by operator precedence.
    fn sequence(&self, node: Node) -> Result<FormulaTree, FormulaError> {
        let mut tokens = Vec::new();
        for child in self.element_children(node)? {
            let pos = self.pos(child);
            let kind = match child.tag_name().name() {
                "mo" => {
                    let symbol = self.leaf_text(child)?;
                    operator_token(&symbol).ok_or(FormulaError::UnsupportedOperator { symbol, position: pos })?
                }
                "mn" => match self.element(child)? {
                    FormulaTree::Num(lit) => TokenKind::Number(lit),
                    other => TokenKind::Operand(other),
                },
                _ => TokenKind::Operand(self.element(child)?),
            };
            tokens.push(Token { kind, pos });
        }
        let end = self.pos(node) + node.range().len();
        parse_tokens(tokens, end)
    }
}

fn operator_token(symbol: &str) -> Option<TokenKind> {
    let op = |s: &str| Some(TokenKind::Op(s.to_string()));
    match symbol {
        "+" => op("+"),
        "-" | "−" => op("-"),
        "*" | "∗" | "⋅" | "·" | "×" | "\u{2062}" => op("*"),
        "/" | "÷" | "∕" => op("/"),
        "=" | "<" | ">" | "≤" | "≥" | "≠" => op(symbol),
        "(" | "[" => Some(TokenKind::LParen),
        ")" | "]" => Some(TokenKind::RParen),
        _ => None,
    }
}
