//! Canonical form of a formula: n-ary flattening of associative operators and
//! alphabetical ordering of commutative operands.

use crate::formula::FormulaTree;

/// Operators whose nested applications collapse into one n-ary node.
pub const ASSOCIATIVE: &[&str] = &["+", "*"];

/// Operators whose operands are sorted.
pub const COMMUTATIVE: &[&str] = &["+", "*", "="];

/// Flattens nested `+`/`*` chains and collapses single-operand `+`/`*`.
///
/// `(a + b) + c` becomes `+(a, b, c)`. Non-associative operators such as `-`
/// are left alone. The result is a fixed point.
pub fn canonicalize(tree: &FormulaTree) -> FormulaTree {
    match tree {
        FormulaTree::Op(sym, children) => {
            let children: Vec<FormulaTree> = children.iter().map(canonicalize).collect();
            if !ASSOCIATIVE.contains(&sym.as_str()) {
                return FormulaTree::Op(sym.clone(), children);
            }
            let mut flat = Vec::with_capacity(children.len());
            for child in children {
                match child {
                    FormulaTree::Op(inner, grandchildren) if inner == *sym => flat.extend(grandchildren),
                    other => flat.push(other),
                }
            }
            if flat.len() == 1 {
                flat.pop().unwrap()
            } else {
                FormulaTree::Op(sym.clone(), flat)
            }
        }
        leaf => leaf.clone(),
    }
}

/// Sorts the operands of every commutative node by their serialized token
/// string, bottom-up so that operands are already canonical when compared.
pub fn order_commutative(tree: &FormulaTree) -> FormulaTree {
    match tree {
        FormulaTree::Op(sym, children) => {
            let mut children: Vec<FormulaTree> = children.iter().map(order_commutative).collect();
            if COMMUTATIVE.contains(&sym.as_str()) {
                children.sort_by_cached_key(FormulaTree::serialize);
            }
            FormulaTree::Op(sym.clone(), children)
        }
        leaf => leaf.clone(),
    }
}

/// The full preprocessing applied to every document and query formula.
pub fn normalize(tree: &FormulaTree) -> FormulaTree {
    order_commutative(&canonicalize(tree))
}
