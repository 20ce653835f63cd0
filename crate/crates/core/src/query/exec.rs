use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use super::{Query, Subquery};
use crate::index::{token_score, DocNum, Index, TermKind};
use crate::unify::tokens_for_query;

/// Query-side token weights of one subquery, keyed in a fixed order so score
/// sums are reproducible bit for bit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryTokens(pub BTreeMap<(TermKind, String), f64>);

impl QueryTokens {
    /// Stems weigh 1 each (repeats do not add up); formula tokens carry their
    /// query-side variant weights, summed across formulae.
    pub fn for_subquery(index: &Index, query: &Query, sq: &Subquery) -> Self {
        let mut weights = BTreeMap::new();
        for term in sq.terms(query) {
            weights.insert((TermKind::Text, term.stem.clone()), 1.0);
        }
        for formula in sq.formulae(query) {
            for tok in tokens_for_query(&formula.tree, index.config()) {
                *weights.entry((TermKind::Math, tok.token)).or_insert(0.0) += tok.weight;
            }
        }
        QueryTokens(weights)
    }
}

#[derive(Default)]
struct Candidate {
    sum: f64,
    text: bool,
    math: bool,
}

/// Runs one subquery: a document qualifies by matching at least one stem and
/// at least one formula token (only the clause for the categories the
/// subquery has). Sorted by descending score, then ascending doc id.
pub fn execute_subquery(index: &Index, query: &Query, sq: &Subquery, limit: usize) -> Vec<(DocNum, f64)> {
    let tokens = QueryTokens::for_subquery(index, query, sq);
    let n = index.n_docs();
    let mut candidates: HashMap<DocNum, Candidate> = HashMap::new();
    for ((kind, token), &q) in &tokens.0 {
        let Some(list) = index.lookup(token, *kind) else { continue };
        let df = list.df();
        for posting in &list.postings {
            let c = candidates.entry(posting.doc).or_default();
            c.sum += token_score(q, posting.tf_w, n, df);
            match kind {
                TermKind::Text => c.text = true,
                TermKind::Math => c.math = true,
            }
        }
    }
    let need_text = sq.n_terms > 0;
    let need_math = sq.n_formulae > 0;
    let mut ranked: Vec<(DocNum, f64)> = candidates
        .into_iter()
        .filter(|(_, c)| (!need_text || c.text) && (!need_math || c.math))
        .map(|(doc, c)| (doc, c.sum / index.doc(doc).expect("posting points at a stored doc").norm))
        .collect();
    let id = |doc: DocNum| index.doc(doc).map(|d| d.doc.doc_id.as_str());
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| id(a.0).cmp(&id(b.0))));
    ranked.truncate(limit);
    ranked
}

/// Round-robin merge: takes the next unseen head of each list in priority
/// order, cycling until all lists are exhausted. Returns each item with the
/// index of the list it was first taken from.
pub fn interleave<T: Clone + Eq + Hash>(lists: &[Vec<T>]) -> Vec<(T, usize)> {
    let mut seen = HashSet::new();
    let mut cursors = vec![0usize; lists.len()];
    let mut out = Vec::new();
    loop {
        let mut progressed = false;
        for (li, list) in lists.iter().enumerate() {
            while let Some(item) = list.get(cursors[li]) {
                cursors[li] += 1;
                if seen.insert(item.clone()) {
                    out.push((item.clone(), li));
                    progressed = true;
                    break;
                }
            }
        }
        if !progressed {
            return out;
        }
    }
}
