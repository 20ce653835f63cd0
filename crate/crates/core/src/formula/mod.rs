//! Formula trees and their textual forms.
//!
//! A [`FormulaTree`] is the unit every rewrite in this crate acts on. Trees are
//! built by [`parse_infix`] or [`parse_mathml`], keyed in the index by their
//! [`serialize`](FormulaTree::serialize)d token string, and shown to people via
//! [`render`](FormulaTree::render).

mod expr;
mod infix;
mod mathml;

use std::fmt::{self, Write as _};

use thiserror::Error;

pub use infix::parse_infix;
pub use mathml::parse_mathml;

/// Unary negation that was not folded into a number literal.
pub const NEG: &str = "neg";
pub const SQRT: &str = "sqrt";
pub const ROOT: &str = "root";

/// Relation symbols, all sharing the lowest binding power.
pub const RELATIONS: &[&str] = &["=", "<", ">", "≤", "≥", "≠"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unsupported MathML element <{0}>")]
    UnsupportedElement(String),
    #[error("unsupported operator {symbol:?} at byte {position}")]
    UnsupportedOperator { symbol: String, position: usize },
    #[error("empty formula")]
    EmptyFormula,
}

impl FormulaError {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        FormulaError::Parse { position, message: message.into() }
    }

    /// Byte offset of the error in the parsed input, when known.
    pub fn position(&self) -> Option<usize> {
        match self {
            FormulaError::Parse { position, .. } | FormulaError::UnsupportedOperator { position, .. } => {
                Some(*position)
            }
            _ => None,
        }
    }
}

/// An ordered rooted tree of math nodes.
///
/// `Const`, `Id` and `Unif` never come out of a parser; they are the
/// placeholders introduced by constant, variable and structural unification.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormulaTree {
    Var(String),
    /// Numeric literal kept verbatim, optionally with a folded leading `-`.
    Num(String),
    Const,
    Id(u32),
    Unif,
    Op(String, Vec<FormulaTree>),
}

/// Distance of a node from the formula root (root = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeDepth(pub usize);

impl NodeDepth {
    pub const ROOT: NodeDepth = NodeDepth(0);

    pub fn child(self) -> NodeDepth {
        NodeDepth(self.0 + 1)
    }
}

impl FormulaTree {
    pub fn var(name: impl Into<String>) -> Self {
        FormulaTree::Var(name.into())
    }

    pub fn num(literal: impl Into<String>) -> Self {
        FormulaTree::Num(literal.into())
    }

    pub fn op(symbol: impl Into<String>, children: Vec<FormulaTree>) -> Self {
        FormulaTree::Op(symbol.into(), children)
    }

    pub fn binary(symbol: impl Into<String>, lhs: FormulaTree, rhs: FormulaTree) -> Self {
        FormulaTree::Op(symbol.into(), vec![lhs, rhs])
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, FormulaTree::Op(..))
    }

    pub fn children(&self) -> &[FormulaTree] {
        match self {
            FormulaTree::Op(_, children) => children,
            _ => &[],
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            FormulaTree::Op(sym, _) => Some(sym),
            _ => None,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(FormulaTree::node_count).sum::<usize>()
    }

    /// Maximum node depth; a single leaf has height 0.
    pub fn height(&self) -> usize {
        self.children().iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    /// Visits every node in pre-order together with its depth.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a FormulaTree, NodeDepth)) {
        fn go<'a>(node: &'a FormulaTree, depth: NodeDepth, visit: &mut impl FnMut(&'a FormulaTree, NodeDepth)) {
            visit(node, depth);
            for child in node.children() {
                go(child, depth.child(), visit);
            }
        }
        go(self, NodeDepth::ROOT, visit)
    }

    /// Checks the structural invariants: non-empty operators, leaves without
    /// children, well-formed names and literals, dense identifier numbering.
    pub fn validate(&self) -> Result<(), String> {
        let mut ids = Vec::new();
        let mut result = Ok(());
        self.walk(&mut |node, _| {
            if result.is_err() {
                return;
            }
            result = match node {
                FormulaTree::Var(name) if !is_valid_name(name) => Err(format!("invalid variable name {name:?}")),
                FormulaTree::Num(lit) if !is_valid_literal(lit) => Err(format!("invalid numeric literal {lit:?}")),
                FormulaTree::Op(sym, _) if !is_valid_symbol(sym) => Err(format!("invalid operator symbol {sym:?}")),
                FormulaTree::Op(sym, children) if children.is_empty() => Err(format!("operator {sym:?} has no operands")),
                FormulaTree::Id(k) => {
                    ids.push(*k);
                    Ok(())
                }
                _ => Ok(()),
            };
        });
        result?;
        ids.sort_unstable();
        ids.dedup();
        if ids.iter().enumerate().any(|(i, &k)| k as usize != i + 1) {
            return Err(format!("identifiers are not dense from 1: {ids:?}"));
        }
        Ok(())
    }

    /// Canonical prefix token string, used as the index key.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        self.write_tokens(&mut out);
        out
    }

    fn write_tokens(&self, out: &mut String) {
        match self {
            FormulaTree::Var(name) => {
                let _ = write!(out, "(v {name})");
            }
            FormulaTree::Num(lit) => {
                let _ = write!(out, "(n {lit})");
            }
            FormulaTree::Const => out.push_str("(c)"),
            FormulaTree::Id(k) => {
                let _ = write!(out, "(i {k})");
            }
            FormulaTree::Unif => out.push_str("(u)"),
            FormulaTree::Op(sym, children) => {
                out.push('(');
                out.push_str(sym);
                for child in children {
                    out.push(' ');
                    child.write_tokens(out);
                }
                out.push(')');
            }
        }
    }

    /// Reads a token string produced by [`serialize`](Self::serialize).
    pub fn from_token_str(input: &str) -> Result<FormulaTree, FormulaError> {
        let mut reader = TokenReader { input, pos: 0 };
        let tree = reader.node()?;
        if reader.pos != input.len() {
            return Err(FormulaError::parse(reader.pos, "trailing input after token string"));
        }
        Ok(tree)
    }

    /// Infix rendering that [`parse_infix`] reads back to the same tree.
    ///
    /// Placeholders render as `id1`, `const` and `◻`; those forms are for
    /// display only.
    pub fn render(&self) -> String {
        let mut out = String::new();
        render_into(self, &mut out, true);
        out
    }
}

impl fmt::Display for FormulaTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub(crate) fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || (!c.is_ascii() && !c.is_whitespace() && !c.is_numeric() && !is_operator_char(c))
}

pub(crate) fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_alphanumeric()
}

pub(crate) fn is_operator_char(c: char) -> bool {
    matches!(c, '≤' | '≥' | '≠' | '−' | '×' | '·' | '⋅' | '÷' | '∕' | '◻' | '\u{2062}')
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if is_name_start(c)) && chars.all(is_name_char)
}

/// `[0-9]+(\.[0-9]+)?`, optionally preceded by a folded unary minus.
pub(crate) fn is_valid_literal(lit: &str) -> bool {
    let unsigned = lit.strip_prefix('-').unwrap_or(lit);
    let (int, frac) = match unsigned.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (unsigned, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    digits(int) && frac.is_none_or(digits)
}

fn is_valid_symbol(sym: &str) -> bool {
    !sym.is_empty() && !sym.chars().any(|c| c.is_whitespace() || c == '(' || c == ')')
}

struct TokenReader<'a> {
    input: &'a str,
    pos: usize,
}

impl TokenReader<'_> {
    fn expect(&mut self, s: &str) -> Result<(), FormulaError> {
        if self.input[self.pos..].starts_with(s) {
            self.pos += s.len();
            Ok(())
        } else {
            Err(FormulaError::parse(self.pos, format!("expected {s:?}")))
        }
    }

    /// An atom runs up to the next space or parenthesis.
    fn atom(&mut self) -> Result<&str, FormulaError> {
        let rest = &self.input[self.pos..];
        let len = rest.find([' ', '(', ')']).unwrap_or(rest.len());
        if len == 0 {
            return Err(FormulaError::parse(self.pos, "expected an atom"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn node(&mut self) -> Result<FormulaTree, FormulaError> {
        let start = self.pos;
        self.expect("(")?;
        let head = self.atom()?.to_string();
        let tree = match head.as_str() {
            "c" if self.peek_close() => FormulaTree::Const,
            "u" if self.peek_close() => FormulaTree::Unif,
            "v" | "n" | "i" if !self.peek_close() => {
                self.expect(" ")?;
                let arg = self.atom()?;
                match head.as_str() {
                    "v" if is_valid_name(arg) => FormulaTree::Var(arg.to_string()),
                    "n" if is_valid_literal(arg) => FormulaTree::Num(arg.to_string()),
                    "i" => match arg.parse::<u32>() {
                        Ok(k) if k >= 1 => FormulaTree::Id(k),
                        _ => return Err(FormulaError::parse(start, format!("bad identifier index {arg:?}"))),
                    },
                    _ => return Err(FormulaError::parse(start, format!("bad leaf argument {arg:?}"))),
                }
            }
            _ => {
                let mut children = Vec::new();
                while !self.peek_close() {
                    self.expect(" ")?;
                    children.push(self.node()?);
                }
                if children.is_empty() {
                    return Err(FormulaError::parse(start, format!("operator {head:?} without operands")));
                }
                FormulaTree::Op(head, children)
            }
        };
        self.expect(")")?;
        Ok(tree)
    }

    fn peek_close(&self) -> bool {
        self.input[self.pos..].starts_with(')')
    }
}

/// Binding power used by the renderer; mirrors the parser's grammar levels.
pub(crate) fn binding_power(node: &FormulaTree) -> u8 {
    match node {
        FormulaTree::Num(lit) if lit.starts_with('-') => 7,
        FormulaTree::Op(sym, children) => match (sym.as_str(), children.len()) {
            (NEG, 1) => 7,
            (s, 2) if RELATIONS.contains(&s) => 1,
            ("+" | "-", n) if n >= 2 => 2,
            ("*" | "/", n) if n >= 2 => 3,
            ("^", 2) => 8,
            ("_", 2) => 9,
            _ => 10,
        },
        _ => 10,
    }
}

fn render_into(node: &FormulaTree, out: &mut String, top: bool) {
    let paren = |child: &FormulaTree, needed: bool, out: &mut String| {
        if needed {
            out.push('(');
            render_into(child, out, false);
            out.push(')');
        } else {
            render_into(child, out, false);
        }
    };
    match node {
        FormulaTree::Var(name) => out.push_str(name),
        FormulaTree::Num(lit) if lit.starts_with('-') && !top => {
            out.push('(');
            out.push_str(lit);
            out.push(')');
        }
        FormulaTree::Num(lit) => out.push_str(lit),
        FormulaTree::Const => out.push_str("const"),
        FormulaTree::Id(k) => {
            let _ = write!(out, "id{k}");
        }
        FormulaTree::Unif => out.push('◻'),
        FormulaTree::Op(sym, children) => {
            let bp = binding_power(node);
            match (sym.as_str(), bp) {
                (NEG, 7) => {
                    let child = &children[0];
                    out.push('-');
                    paren(child, matches!(child, FormulaTree::Num(_)) || binding_power(child) < 7, out);
                }
                (_, 1..=3) => {
                    // left-associative chains, n-ary after flattening
                    let sep = format!(" {sym} ");
                    for (i, child) in children.iter().enumerate() {
                        if i > 0 {
                            out.push_str(&sep);
                        }
                        let cbp = binding_power(child);
                        paren(child, if i == 0 { cbp < bp } else { cbp <= bp }, out);
                    }
                }
                ("^", 8) => {
                    paren(&children[0], binding_power(&children[0]) < 9, out);
                    out.push('^');
                    paren(&children[1], binding_power(&children[1]) < 7, out);
                }
                ("_", 9) => {
                    paren(&children[0], binding_power(&children[0]) < 9, out);
                    out.push('_');
                    paren(&children[1], binding_power(&children[1]) < 10, out);
                }
                _ => {
                    out.push_str(sym);
                    out.push('(');
                    for (i, child) in children.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        render_into(child, out, true);
                    }
                    out.push(')');
                }
            }
        }
    }
}
