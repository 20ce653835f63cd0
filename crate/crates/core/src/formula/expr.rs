//! Precedence parser shared by the infix and MathML front ends.
//!
//! Both front ends lower their input to a flat [`Token`] stream; MathML layout
//! elements (msup, mfrac, ...) arrive pre-built as [`TokenKind::Operand`].
//!
//! Binding, loosest first: relations, `+ -`, `* /` (and juxtaposition), unary
//! minus, `^` (right-assoc), `_`.

use super::{FormulaError, FormulaTree, NEG, RELATIONS, ROOT, SQRT};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TokenKind {
    Operand(FormulaTree),
    Number(String),
    Ident(String),
    Op(String),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub pos: usize,
}

pub(crate) fn parse_tokens(tokens: Vec<Token>, end: usize) -> Result<FormulaTree, FormulaError> {
    if tokens.is_empty() {
        return Err(FormulaError::EmptyFormula);
    }
    let mut parser = Parser { tokens, idx: 0, end };
    let tree = parser.relation()?;
    if let Some(tok) = parser.tokens.get(parser.idx) {
        return Err(FormulaError::parse(tok.pos, "unexpected token"));
    }
    Ok(tree)
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.idx).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&TokenKind> {
        self.tokens.get(self.idx + offset).map(|t| &t.kind)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.idx).map_or(self.end, |t| t.pos)
    }

    fn peek_op(&self, accept: impl Fn(&str) -> bool) -> Option<String> {
        match self.peek() {
            Some(TokenKind::Op(sym)) if accept(sym) => Some(sym.clone()),
            _ => None,
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<(), FormulaError> {
        if self.peek() == Some(&kind) {
            self.idx += 1;
            Ok(())
        } else {
            Err(FormulaError::parse(self.pos(), format!("expected {what}")))
        }
    }

    fn relation(&mut self) -> Result<FormulaTree, FormulaError> {
        let mut lhs = self.additive()?;
        while let Some(sym) = self.peek_op(|s| RELATIONS.contains(&s)) {
            self.idx += 1;
            let rhs = self.additive()?;
            lhs = FormulaTree::binary(sym, lhs, rhs);
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<FormulaTree, FormulaError> {
        let mut lhs = self.multiplicative()?;
        while let Some(sym) = self.peek_op(|s| s == "+" || s == "-") {
            self.idx += 1;
            let rhs = self.multiplicative()?;
            lhs = FormulaTree::binary(sym, lhs, rhs);
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<FormulaTree, FormulaError> {
        let mut lhs = self.unary()?;
        loop {
            if let Some(sym) = self.peek_op(|s| s == "*" || s == "/") {
                self.idx += 1;
                let rhs = self.unary()?;
                lhs = FormulaTree::binary(sym, lhs, rhs);
            } else if self.starts_atom() {
                let rhs = self.unary()?;
                lhs = FormulaTree::binary("*", lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(TokenKind::Operand(_) | TokenKind::Number(_) | TokenKind::Ident(_) | TokenKind::LParen)
        )
    }

    fn unary(&mut self) -> Result<FormulaTree, FormulaError> {
        if self.peek_op(|s| s == "-").is_none() {
            return self.power();
        }
        self.idx += 1;
        // A bare literal absorbs the sign unless ^ or _ binds it first.
        if let Some(TokenKind::Number(lit)) = self.peek() {
            let binds_tighter = matches!(self.peek_at(1), Some(TokenKind::Op(s)) if s == "^" || s == "_");
            if !binds_tighter {
                let lit = format!("-{lit}");
                self.idx += 1;
                return Ok(FormulaTree::Num(lit));
            }
        }
        let operand = self.unary()?;
        Ok(FormulaTree::op(NEG, vec![operand]))
    }

    fn power(&mut self) -> Result<FormulaTree, FormulaError> {
        let base = self.subscript()?;
        if self.peek_op(|s| s == "^").is_some() {
            self.idx += 1;
            let exponent = self.unary()?;
            return Ok(FormulaTree::binary("^", base, exponent));
        }
        Ok(base)
    }

    fn subscript(&mut self) -> Result<FormulaTree, FormulaError> {
        let mut base = self.atom()?;
        while self.peek_op(|s| s == "_").is_some() {
            self.idx += 1;
            let sub = self.atom()?;
            base = FormulaTree::binary("_", base, sub);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<FormulaTree, FormulaError> {
        let pos = self.pos();
        let Some(tok) = self.tokens.get(self.idx).map(|t| t.kind.clone()) else {
            return Err(FormulaError::parse(pos, "unexpected end of formula"));
        };
        self.idx += 1;
        match tok {
            TokenKind::Operand(tree) => Ok(tree),
            TokenKind::Number(lit) => Ok(FormulaTree::Num(lit)),
            TokenKind::Ident(name) if (name == SQRT || name == ROOT) && self.peek() == Some(&TokenKind::LParen) => {
                self.idx += 1;
                let mut args = vec![self.relation()?];
                while self.peek() == Some(&TokenKind::Comma) {
                    self.idx += 1;
                    args.push(self.relation()?);
                }
                self.expect(TokenKind::RParen, "')'")?;
                let arity = if name == SQRT { 1 } else { 2 };
                if args.len() != arity {
                    return Err(FormulaError::parse(pos, format!("{name} takes {arity} argument(s)")));
                }
                Ok(FormulaTree::Op(name, args))
            }
            TokenKind::Ident(name) => Ok(FormulaTree::Var(name)),
            TokenKind::LParen => {
                let inner = self.relation()?;
                self.expect(TokenKind::RParen, "')'")?;
                Ok(inner)
            }
            TokenKind::RParen => Err(FormulaError::parse(pos, "unexpected ')'")),
            TokenKind::Comma => Err(FormulaError::parse(pos, "unexpected ','")),
            TokenKind::Op(sym) => Err(FormulaError::parse(pos, format!("expected an operand before {sym:?}"))),
        }
    }
}
