use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::CorpusRecord;
use crate::formula::FormulaTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorBounds {
    pub words: RangeInclusive<usize>,
    pub formulae: RangeInclusive<usize>,
    pub max_height: usize,
    pub max_int: u32,
}

pub const BOUNDS: GeneratorBounds = GeneratorBounds { words: 5..=50, formulae: 1..=10, max_height: 4, max_int: 12 };

const VOCABULARY: &[&str] = &[
    "theorem", "lemma", "proof", "function", "equation", "polynomial", "quadratic", "root", "integral", "derivative",
    "matrix", "vector", "space", "field", "group", "ring", "prime", "number", "series", "sequence", "limit", "bound",
    "convex", "linear", "operator", "kernel", "graph", "edge", "vertex", "set", "measure", "probability", "random",
    "variable", "expectation", "norm", "metric", "continuous", "smooth", "manifold", "curve", "surface", "angle",
    "triangle", "circle", "solution", "system", "algebra", "identity", "inequality",
];

const OPERATORS: &[&str] = &["+", "-", "*", "/", "^"];

fn random_tree(rng: &mut ChaCha8Rng, height: usize) -> FormulaTree {
    if height == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.6) {
            FormulaTree::var(char::from(rng.gen_range(b'a'..=b'z')).to_string())
        } else {
            FormulaTree::num(rng.gen_range(0..=BOUNDS.max_int).to_string())
        };
    }
    let symbol = *OPERATORS.choose(rng).expect("non-empty");
    FormulaTree::binary(symbol, random_tree(rng, height - 1), random_tree(rng, height - 1))
}

/// Synthetic records, identically distributed, drawn from one seeded stream:
/// the first `n` records do not depend on how many follow.
pub fn generate_records(n_docs: usize, seed: u64) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_docs)
        .map(|i| {
            let n_words = rng.gen_range(BOUNDS.words.clone());
            let n_formulae = rng.gen_range(BOUNDS.formulae.clone());
            let mut parts: Vec<String> =
                (0..n_words).map(|_| VOCABULARY.choose(&mut rng).expect("non-empty").to_string()).collect();
            for _ in 0..n_formulae {
                let formula = format!("${}$", random_tree(&mut rng, BOUNDS.max_height).render());
                let at = rng.gen_range(0..=parts.len());
                parts.insert(at, formula);
            }
            CorpusRecord { id: format!("gen{i:07}"), title: format!("Synthetic document {i}"), text: parts.join(" "), mathml: vec![] }
        })
        .collect()
}

/// JSONL corpus text, byte-identical for equal arguments.
pub fn generate_corpus(n_docs: usize, seed: u64) -> String {
    generate_records(n_docs, seed)
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}
