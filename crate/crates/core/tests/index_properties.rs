mod common;

use std::collections::{BTreeMap, HashMap, HashSet};

use common::arb_tree;
use mias_core::corpus::{CorpusRecord, Document};
use mias_core::index::{Index, TermKind};
use mias_core::query::{search, SearchConfig};
use mias_core::unify::tokens_for_index;
use proptest::prelude::*;

const WORDS: &[&str] = &["matrix", "root", "roots", "prime", "group", "limit", "graph"];

fn arb_docs() -> impl Strategy<Value = Vec<Document>> {
    let doc = (prop::collection::vec(prop::sample::select(WORDS), 0..6), prop::collection::vec(arb_tree(), 0..4));
    prop::collection::vec(doc, 1..8).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, (words, trees))| {
                let mut text = words.join(" ");
                for t in trees {
                    text.push_str(&format!(" ${}$", t.render()));
                }
                let record = CorpusRecord { id: format!("d{i}"), title: String::new(), text, mathml: vec![] };
                Document::from_record(&record).unwrap()
            })
            .collect()
    })
}

/// token → doc id → tf_w, independent of document numbering.
fn by_doc_id(index: &Index, kind: TermKind) -> BTreeMap<String, BTreeMap<String, f64>> {
    index
        .posting_lists(kind)
        .map(|list| {
            let docs = list.postings.iter().map(|p| (index.doc(p.doc).unwrap().doc.doc_id.clone(), p.tf_w)).collect();
            (list.token.clone(), docs)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn insertion_order_does_not_matter(docs in arb_docs(), query in arb_tree()) {
        let forward = Index::build(docs.clone(), Default::default(), false).unwrap();
        let mut reversed_docs = docs;
        reversed_docs.reverse();
        let reversed = Index::build(reversed_docs, Default::default(), true).unwrap();
        for kind in [TermKind::Text, TermKind::Math] {
            prop_assert_eq!(by_doc_id(&forward, kind), by_doc_id(&reversed, kind));
        }
        let q = format!("matrix roots ${}$", query.render());
        let a = search(&forward, &q, &SearchConfig::default()).unwrap();
        let b = search(&reversed, &q, &SearchConfig::default()).unwrap();
        let strip = |r: &mias_core::api::SearchResponse| r.results.iter().map(|h| (h.doc_id.clone(), h.score, h.priority)).collect::<Vec<_>>();
        prop_assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn postings_match_brute_force(docs in arb_docs()) {
        let index = Index::build(docs.clone(), Default::default(), false).unwrap();
        let config = index.config().clone();

        let mut math: HashMap<String, HashMap<String, f64>> = HashMap::new();
        let mut text: HashMap<String, HashSet<String>> = HashMap::new();
        for d in &docs {
            for f in &d.formulae {
                for tok in tokens_for_index(f, &config) {
                    *math.entry(tok.token).or_default().entry(d.doc_id.clone()).or_default() += tok.weight;
                }
            }
            for term in d.text_terms() {
                text.entry(term.stem).or_default().insert(d.doc_id.clone());
            }
        }
        prop_assert_eq!(index.posting_lists(TermKind::Math).count(), math.len());
        for (token, docs) in &math {
            let list = index.lookup(token, TermKind::Math).unwrap();
            prop_assert_eq!(list.df(), docs.len());
            for p in &list.postings {
                let expected = docs[&index.doc(p.doc).unwrap().doc.doc_id];
                prop_assert!((p.tf_w - expected).abs() < 1e-9);
            }
        }
        prop_assert_eq!(index.posting_lists(TermKind::Text).count(), text.len());
        for (stem, docs) in &text {
            prop_assert_eq!(index.lookup(stem, TermKind::Text).unwrap().df(), docs.len());
        }
        let tokens: u64 = docs.iter().flat_map(|d| &d.formulae).map(|f| tokens_for_index(f, &config).len() as u64).sum();
        prop_assert_eq!(index.n_math_tokens(), tokens);
    }

    #[test]
    fn persisted_index_answers_identically(docs in arb_docs(), query in arb_tree()) {
        let index = Index::build(docs, Default::default(), false).unwrap();
        let dir = tempfile::tempdir().unwrap();
        index.persist(dir.path()).unwrap();
        let reopened = Index::open(dir.path()).unwrap();
        let q = format!("group ${}$", query.render());
        let mut a = search(&index, &q, &SearchConfig::default()).unwrap();
        let mut b = search(&reopened, &q, &SearchConfig::default()).unwrap();
        a.timing_ms = 0.0;
        b.timing_ms = 0.0;
        prop_assert_eq!(a, b);
    }
}
