//! Expansion of one canonical formula into weighted index tokens.
//!
//! Documents index every subformula (weighted down with depth) in four
//! variants: exact, variables renamed to numbered identifiers, constants
//! replaced by a placeholder, and both. The whole formula is additionally
//! indexed in its structurally unified forms, where all subtrees at one depth
//! are replaced by `◻`. Queries get the same variants of the whole formula
//! only.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{FormulaTree, NodeDepth};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnifyError {
    #[error("structural level {level} outside 1..={height}")]
    InvalidLevel { level: usize, height: usize },
}

/// Identifier of the depth weighting rule; `inverse` is `1 / (depth + 1)`.
pub const DEPTH_WEIGHT_INVERSE: &str = "inverse";

/// Weighting configuration. Stored in the index metadata under the same keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifierConfig {
    #[serde(rename = "weight.var_unified")]
    pub var_unified: f64,
    #[serde(rename = "weight.const_unified")]
    pub const_unified: f64,
    #[serde(rename = "depth_weight")]
    pub depth_weight: String,
    #[serde(rename = "structural.enabled")]
    pub structural_enabled: bool,
}

impl Default for UnifierConfig {
    fn default() -> Self {
        UnifierConfig {
            var_unified: 0.8,
            const_unified: 0.8,
            depth_weight: DEPTH_WEIGHT_INVERSE.to_string(),
            structural_enabled: true,
        }
    }
}

impl UnifierConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (key, value) in [("weight.var_unified", self.var_unified), ("weight.const_unified", self.const_unified)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(format!("{key} must lie in (0, 1], got {value}"));
            }
        }
        if self.depth_weight != DEPTH_WEIGHT_INVERSE {
            return Err(format!("unknown depth_weight {:?}", self.depth_weight));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Exact,
    VarUnified,
    ConstUnified,
    VarConstUnified,
    Structural(usize),
}

/// An index or query key for one formula variant.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulaToken {
    pub token: String,
    pub weight: f64,
    pub variant: Variant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubformulaOccurrence<'a> {
    pub subtree: &'a FormulaTree,
    pub depth: NodeDepth,
}

/// One occurrence per node, in pre-order.
pub fn extract_subformulae(tree: &FormulaTree) -> Vec<SubformulaOccurrence<'_>> {
    let mut out = Vec::with_capacity(tree.node_count());
    tree.walk(&mut |subtree, depth| out.push(SubformulaOccurrence { subtree, depth }));
    out
}

pub fn depth_weight(depth: NodeDepth) -> f64 {
    1.0 / (depth.0 as f64 + 1.0)
}

/// Renames variables to `Id(1)`, `Id(2)`, ... by first pre-order occurrence.
///
/// Identifiers already present keep their numbers; fresh ones continue after
/// the largest.
pub fn unify_variables(tree: &FormulaTree) -> FormulaTree {
    fn max_id(t: &FormulaTree) -> u32 {
        match t {
            FormulaTree::Id(k) => *k,
            _ => t.children().iter().map(max_id).max().unwrap_or(0),
        }
    }
    fn go(t: &FormulaTree, names: &mut HashMap<String, u32>, next: &mut u32) -> FormulaTree {
        match t {
            FormulaTree::Var(name) => {
                let k = *names.entry(name.clone()).or_insert_with(|| {
                    *next += 1;
                    *next
                });
                FormulaTree::Id(k)
            }
            FormulaTree::Op(sym, children) => {
                FormulaTree::Op(sym.clone(), children.iter().map(|c| go(c, names, next)).collect())
            }
            leaf => leaf.clone(),
        }
    }
    let mut next = max_id(tree);
    go(tree, &mut HashMap::new(), &mut next)
}

/// Replaces every numeric literal with the constant placeholder.
pub fn unify_constants(tree: &FormulaTree) -> FormulaTree {
    match tree {
        FormulaTree::Num(_) => FormulaTree::Const,
        FormulaTree::Op(sym, children) => FormulaTree::Op(sym.clone(), children.iter().map(unify_constants).collect()),
        leaf => leaf.clone(),
    }
}

/// Replaces every subtree rooted at exactly `level` with `◻`.
pub fn unify_at_level(tree: &FormulaTree, level: usize) -> FormulaTree {
    if level == 0 {
        return FormulaTree::Unif;
    }
    match tree {
        FormulaTree::Op(sym, children) => {
            FormulaTree::Op(sym.clone(), children.iter().map(|c| unify_at_level(c, level - 1)).collect())
        }
        leaf => leaf.clone(),
    }
}

/// Structurally unified forms from the deepest level up to level 1.
pub fn structural_unify(tree: &FormulaTree) -> Vec<(FormulaTree, usize)> {
    (1..=tree.height()).rev().map(|level| (unify_at_level(tree, level), level)).collect()
}

pub fn variant_factor(variant: Variant, height: usize, config: &UnifierConfig) -> Result<f64, UnifyError> {
    Ok(match variant {
        Variant::Exact => 1.0,
        Variant::VarUnified => config.var_unified,
        Variant::ConstUnified => config.const_unified,
        Variant::VarConstUnified => config.var_unified * config.const_unified,
        Variant::Structural(level) => {
            if level < 1 || level > height {
                return Err(UnifyError::InvalidLevel { level, height });
            }
            level as f64 / (height as f64 + 1.0)
        }
    })
}

/// Accumulates tokens, summing the weights of repeated keys and keeping the
/// order and variant of each key's first emission.
#[derive(Default)]
struct TokenBag {
    tokens: Vec<FormulaToken>,
    slots: HashMap<String, usize>,
}

impl TokenBag {
    fn push(&mut self, token: String, weight: f64, variant: Variant) {
        match self.slots.get(&token) {
            Some(&i) => self.tokens[i].weight += weight,
            None => {
                self.slots.insert(token.clone(), self.tokens.len());
                self.tokens.push(FormulaToken { token, weight, variant });
            }
        }
    }

    fn push_variants(&mut self, tree: &FormulaTree, scale: f64, config: &UnifierConfig) {
        let vars = unify_variables(tree);
        let consts = unify_constants(tree);
        let both = unify_constants(&vars);
        let height = tree.height();
        for (form, variant) in [
            (tree, Variant::Exact),
            (&vars, Variant::VarUnified),
            (&consts, Variant::ConstUnified),
            (&both, Variant::VarConstUnified),
        ] {
            let factor = variant_factor(variant, height, config).expect("non-structural variants are total");
            self.push(form.serialize(), scale * factor, variant);
        }
    }

    fn push_structural(&mut self, tree: &FormulaTree, config: &UnifierConfig) {
        if !config.structural_enabled {
            return;
        }
        let height = tree.height();
        for (form, level) in structural_unify(tree) {
            let variant = Variant::Structural(level);
            let weight = variant_factor(variant, height, config).expect("levels come from 1..=height");
            self.push(form.serialize(), weight, variant);
        }
    }
}

/// Tokens indexed for a document formula: four variants of every subformula
/// plus the structural forms of the whole formula.
pub fn tokens_for_index(tree: &FormulaTree, config: &UnifierConfig) -> Vec<FormulaToken> {
    let mut bag = TokenBag::default();
    for occ in extract_subformulae(tree) {
        bag.push_variants(occ.subtree, depth_weight(occ.depth), config);
    }
    bag.push_structural(tree, config);
    bag.tokens
}

/// Tokens searched for a query formula: the whole formula only, no
/// subformulae.
pub fn tokens_for_query(tree: &FormulaTree, config: &UnifierConfig) -> Vec<FormulaToken> {
    let mut bag = TokenBag::default();
    bag.push_variants(tree, 1.0, config);
    bag.push_structural(tree, config);
    bag.tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::canonicalize;
    use crate::formula::parse_infix;

    fn canon(src: &str) -> FormulaTree {
        canonicalize(&parse_infix(src).unwrap())
    }

    fn weights(tokens: Vec<FormulaToken>) -> HashMap<String, f64> {
        tokens.into_iter().map(|t| (t.token, t.weight)).collect()
    }

    #[test]
    fn subformula_occurrences() {
        let t = canon("a+b^a");
        let occ: Vec<(String, usize)> = extract_subformulae(&t).iter().map(|o| (o.subtree.render(), o.depth.0)).collect();
        let expected = [("a + b^a", 0), ("a", 1), ("b^a", 1), ("b", 2), ("a", 2)];
        assert_eq!(occ, expected.map(|(s, d)| (s.to_string(), d)));
        assert_eq!(extract_subformulae(&canon("a")).len(), 1);
        let xy = canon("x/y");
        let frac = extract_subformulae(&xy);
        assert_eq!(frac.iter().map(|o| o.depth.0).collect::<Vec<_>>(), [0, 1, 1]);
    }

    #[test]
    fn depth_weights() {
        assert_eq!(depth_weight(NodeDepth(0)), 1.0);
        assert_eq!(depth_weight(NodeDepth(1)), 0.5);
        assert!((depth_weight(NodeDepth(2)) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn variable_unification() {
        let expected = FormulaTree::binary("+", FormulaTree::Id(1), FormulaTree::binary("^", FormulaTree::Id(2), FormulaTree::Id(1)));
        assert_eq!(unify_variables(&canon("a+b^a")), expected);
        assert_eq!(unify_variables(&canon("x+y^x")), expected);
        assert_eq!(unify_variables(&FormulaTree::num("2")), FormulaTree::num("2"));
    }

    #[test]
    fn constant_unification() {
        let a = unify_constants(&canon("3*x^2-2*x+2"));
        let b = unify_constants(&canon("8*x^2-3*x+6"));
        assert_eq!(a, b);
        assert_eq!(a.render(), "const * x^const - const * x + const");
        assert_eq!(unify_constants(&FormulaTree::var("a")), FormulaTree::var("a"));
    }

    #[test]
    fn structural_levels() {
        let t = canon("a^2 + sqrt(b)/c");
        let forms: Vec<(String, usize)> = structural_unify(&t).into_iter().map(|(t, l)| (t.render(), l)).collect();
        assert_eq!(
            forms,
            [("a^2 + sqrt(◻) / c".to_string(), 3), ("◻^◻ + ◻ / ◻".to_string(), 2), ("◻ + ◻".to_string(), 1)]
        );
        assert!(structural_unify(&FormulaTree::var("a")).is_empty());
    }

    #[test]
    fn factors() {
        let cfg = UnifierConfig::default();
        assert_eq!(variant_factor(Variant::Structural(3), 3, &cfg), Ok(0.75));
        assert_eq!(variant_factor(Variant::Exact, 0, &cfg), Ok(1.0));
        assert!((variant_factor(Variant::VarConstUnified, 0, &cfg).unwrap() - 0.64).abs() < 1e-12);
        assert_eq!(variant_factor(Variant::Structural(4), 3, &cfg), Err(UnifyError::InvalidLevel { level: 4, height: 3 }));
        assert_eq!(variant_factor(Variant::Structural(0), 3, &cfg), Err(UnifyError::InvalidLevel { level: 0, height: 3 }));
    }

    #[test]
    fn degenerate_leaf_tokens_collapse() {
        let cfg = UnifierConfig::default();
        let w = weights(tokens_for_index(&FormulaTree::var("a"), &cfg));
        assert_eq!(w.len(), 2);
        assert!((w["(v a)"] - 1.8).abs() < 1e-12);
        assert!((w["(i 1)"] - 1.44).abs() < 1e-12);
        let w = weights(tokens_for_index(&FormulaTree::num("2"), &cfg));
        assert_eq!(w.len(), 2);
        assert!((w["(n 2)"] - 1.8).abs() < 1e-12);
        assert!((w["(c)"] - 1.44).abs() < 1e-12);
        assert_eq!(tokens_for_query(&FormulaTree::var("a"), &cfg).len(), 2);
    }

    #[test]
    fn structural_switch() {
        let cfg = UnifierConfig { structural_enabled: false, ..UnifierConfig::default() };
        let tokens = tokens_for_query(&canon("x^2+3"), &cfg);
        assert!(tokens.iter().all(|t| !matches!(t.variant, Variant::Structural(_))));
        assert_eq!(tokens.len(), 4);
    }

    #[test]
    fn config_validation() {
        assert!(UnifierConfig::default().validate().is_ok());
        assert!(UnifierConfig { var_unified: 0.0, ..UnifierConfig::default() }.validate().is_err());
        assert!(UnifierConfig { depth_weight: "log".into(), ..UnifierConfig::default() }.validate().is_err());
        let json = serde_json::to_string(&UnifierConfig::default()).unwrap();
        assert_eq!(
            json,
            r#"{"weight.var_unified":0.8,"weight.const_unified":0.8,"depth_weight":"inverse","structural.enabled":true}"#
        );
    }
}
