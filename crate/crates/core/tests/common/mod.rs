//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use mias_core::formula::FormulaTree;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub const BINARY: &[&str] = &["+", "-", "*", "/", "^", "_", "=", "<", "≤", "≠"];
const NAMES: &[&str] = &["a", "b", "c", "d", "x", "y", "z", "x1", "α"];

fn leaf_from(pick: u32, rng_num: u32) -> FormulaTree {
    match pick % 3 {
        0 | 1 => FormulaTree::var(NAMES[(rng_num as usize) % NAMES.len()]),
        _ => match rng_num % 5 {
            0 => FormulaTree::num(format!("-{}", rng_num % 10)),
            1 => FormulaTree::num(format!("{}.{}", rng_num % 10, rng_num % 7)),
            _ => FormulaTree::num((rng_num % 13).to_string()),
        },
    }
}

/// Trees shaped the way the infix parser produces them: binary operators,
/// unary minus, `sqrt` and `root`.
pub fn arb_tree() -> impl Strategy<Value = FormulaTree> {
    let leaf = (any::<u32>(), any::<u32>()).prop_map(|(p, n)| leaf_from(p, n));
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            6 => (prop::sample::select(BINARY), inner.clone(), inner.clone())
                .prop_map(|(s, l, r)| FormulaTree::binary(s, l, r)),
            1 => inner.clone().prop_map(|c| FormulaTree::op("neg", vec![c])),
            1 => inner.clone().prop_map(|c| FormulaTree::op("sqrt", vec![c])),
            1 => (inner.clone(), inner).prop_map(|(x, n)| FormulaTree::binary("root", x, n)),
        ]
    })
}

/// Same distribution as [`arb_tree`], drawn from a plain RNG for harnesses
/// that do not run under proptest.
pub fn random_tree(rng: &mut impl Rng, depth: usize) -> FormulaTree {
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf_from(rng.gen(), rng.gen());
    }
    match rng.gen_range(0..9) {
        0..=5 => FormulaTree::binary(
            *BINARY.choose(rng).unwrap(),
            random_tree(rng, depth - 1),
            random_tree(rng, depth - 1),
        ),
        6 => FormulaTree::op("neg", vec![random_tree(rng, depth - 1)]),
        7 => FormulaTree::op("sqrt", vec![random_tree(rng, depth - 1)]),
        _ => FormulaTree::binary("root", random_tree(rng, depth - 1), random_tree(rng, depth - 1)),
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Presentation MathML with every operand wrapped in its own mrow, so no
/// precedence decisions are left to the parser.
pub fn to_mathml(tree: &FormulaTree) -> String {
    fn go(t: &FormulaTree, out: &mut String) {
        let mrow = |c: &FormulaTree, out: &mut String| {
            out.push_str("<mrow>");
            go(c, out);
            out.push_str("</mrow>");
        };
        match t {
            FormulaTree::Var(n) => out.push_str(&format!("<mi>{}</mi>", xml_escape(n))),
            FormulaTree::Num(l) => match l.strip_prefix('-') {
                Some(abs) => out.push_str(&format!("<mrow><mo>-</mo><mn>{abs}</mn></mrow>")),
                None => out.push_str(&format!("<mn>{l}</mn>")),
            },
            FormulaTree::Op(s, cs) => match (s.as_str(), cs.as_slice()) {
                ("neg", [c]) => {
                    out.push_str("<mrow><mo>-</mo>");
                    mrow(c, out);
                    out.push_str("</mrow>");
                }
                ("sqrt", [c]) => {
                    out.push_str("<msqrt>");
                    mrow(c, out);
                    out.push_str("</msqrt>");
                }
                (tag @ ("^" | "_" | "root"), [a, b]) => {
                    let el = match tag {
                        "^" => "msup",
                        "_" => "msub",
                        _ => "mroot",
                    };
                    out.push_str(&format!("<{el}>"));
                    mrow(a, out);
                    mrow(b, out);
                    out.push_str(&format!("</{el}>"));
                }
                (sym, [a, b]) => {
                    out.push_str("<mrow>");
                    mrow(a, out);
                    out.push_str(&format!("<mo>{}</mo>", xml_escape(sym)));
                    mrow(b, out);
                    out.push_str("</mrow>");
                }
                _ => panic!("no MathML form for {t:?}"),
            },
            other => panic!("no MathML form for {other:?}"),
        }
    }
    let mut out = String::from("<math>");
    go(tree, &mut out);
    out.push_str("</math>");
    out
}

/// Applies `f` to every variable name.
pub fn rename(tree: &FormulaTree, f: &impl Fn(&str) -> String) -> FormulaTree {
    match tree {
        FormulaTree::Var(n) => FormulaTree::Var(f(n)),
        FormulaTree::Op(s, cs) => FormulaTree::Op(s.clone(), cs.iter().map(|c| rename(c, f)).collect()),
        other => other.clone(),
    }
}

/// Randomly reorders operands of commutative operators, recursively.
pub fn shuffle_commutative(tree: &FormulaTree, rng: &mut impl Rng) -> FormulaTree {
    match tree {
        FormulaTree::Op(s, cs) => {
            let mut cs: Vec<FormulaTree> = cs.iter().map(|c| shuffle_commutative(c, rng)).collect();
            if matches!(s.as_str(), "+" | "*" | "=") {
                cs.shuffle(rng);
            }
            FormulaTree::Op(s.clone(), cs)
        }
        other => other.clone(),
    }
}

// --- TREC metric oracle: literal transcriptions of the textbook definitions.

pub struct MetricInstance {
    pub qrels: String,
    pub run: String,
    /// topic → ranked docs
    pub ranked: BTreeMap<String, Vec<String>>,
    /// topic → doc → level
    pub judged: BTreeMap<String, BTreeMap<String, u32>>,
}

pub fn random_instance(rng: &mut impl Rng, max_topics: usize) -> MetricInstance {
    let docs: Vec<String> = (0..30).map(|i| format!("doc{i}")).collect();
    let n_topics = rng.gen_range(1..=max_topics);
    let mut qrels = String::new();
    let mut run = String::new();
    let mut ranked = BTreeMap::new();
    let mut judged = BTreeMap::new();
    for t in 0..n_topics {
        let topic = format!("T{t}");
        let mut judged_docs: Vec<&String> = docs.iter().filter(|_| rng.gen_bool(0.3)).collect();
        if judged_docs.is_empty() {
            judged_docs.push(&docs[rng.gen_range(0..docs.len())]);
        }
        judged_docs.shuffle(rng);
        let mut levels = BTreeMap::new();
        for d in judged_docs {
            let level = rng.gen_range(0..=4);
            qrels.push_str(&format!("{topic} 0 {d} {level}\n"));
            levels.insert(d.clone(), level);
        }
        judged.insert(topic.clone(), levels);
        // some topics are absent from the run
        if rng.gen_bool(0.85) {
            let mut list = docs.clone();
            list.shuffle(rng);
            list.truncate(rng.gen_range(0..=20));
            for (i, d) in list.iter().enumerate() {
                run.push_str(&format!("{topic} Q0 {d} {} {} tag\n", i + 1, 100.0 - i as f64));
            }
            ranked.insert(topic, list);
        }
    }
    MetricInstance { qrels, run, ranked, judged }
}

fn relevant_set(levels: &BTreeMap<String, u32>, level: u32) -> HashSet<String> {
    levels.iter().filter(|(_, &l)| l >= level).map(|(d, _)| d.clone()).collect()
}

pub fn oracle_precision_at(ranked: &[String], relevant: &HashSet<String>, k: usize) -> f64 {
    let mut hits = 0;
    for i in 0..k {
        if i < ranked.len() && relevant.contains(&ranked[i]) {
            hits += 1;
        }
    }
    hits as f64 / k as f64
}

pub fn oracle_ap(ranked: &[String], relevant: &HashSet<String>) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for (i, d) in ranked.iter().enumerate() {
        if relevant.contains(d) {
            // precision over the prefix ending at this hit, recounted from scratch
            total += oracle_precision_at(ranked, relevant, i + 1);
        }
    }
    total / relevant.len() as f64
}

/// (MAP, P@5, P@10) over all judged topics.
pub fn oracle_scores(inst: &MetricInstance, level: u32) -> (f64, f64, f64) {
    let empty = Vec::new();
    let (mut ap, mut p5, mut p10) = (0.0, 0.0, 0.0);
    for (topic, levels) in &inst.judged {
        let ranked = inst.ranked.get(topic).unwrap_or(&empty);
        let rel = relevant_set(levels, level);
        ap += oracle_ap(ranked, &rel);
        p5 += oracle_precision_at(ranked, &rel, 5);
        p10 += oracle_precision_at(ranked, &rel, 10);
    }
    let n = inst.judged.len() as f64;
    (ap / n, p5 / n, p10 / n)
}
