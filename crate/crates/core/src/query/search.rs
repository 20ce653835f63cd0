use std::time::Instant;

use rayon::prelude::*;

use super::{execute_subquery, generate_subqueries, highlight, interleave, parse_query, QueryError, Strategy};
use crate::api::{SearchHit, SearchResponse, SubqueryView};
use crate::index::{DocNum, Index};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Hits kept from each subquery before interleaving.
    pub per_subquery_limit: usize,
    pub final_limit: usize,
    pub strategy: Strategy,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { per_subquery_limit: 100, final_limit: 50, strategy: Strategy::LeaveRightmostOut }
    }
}

impl SearchConfig {
    /// Returns at most `limit` hits, keeping enough per subquery to fill them.
    pub fn with_limit(limit: usize) -> Self {
        let default = SearchConfig::default();
        SearchConfig { per_subquery_limit: default.per_subquery_limit.max(limit), final_limit: limit, ..default }
    }
}

pub fn search(index: &Index, q: &str, config: &SearchConfig) -> Result<SearchResponse, QueryError> {
    let started = Instant::now();
    let query = parse_query(q)?;
    let subqueries = generate_subqueries(&query, config.strategy);
    let ranked: Vec<Vec<(DocNum, f64)>> =
        subqueries.par_iter().map(|sq| execute_subquery(index, &query, sq, config.per_subquery_limit)).collect();

    let docs: Vec<Vec<DocNum>> = ranked.iter().map(|r| r.iter().map(|&(d, _)| d).collect()).collect();
    let results = interleave(&docs)
        .into_iter()
        .take(config.final_limit)
        .map(|(doc, list)| {
            let score = ranked[list].iter().find(|&&(d, _)| d == doc).map(|&(_, s)| s).unwrap_or_default();
            let stored = &index.doc(doc).expect("ranked docs are stored").doc;
            let h = highlight(index, &stored.doc_id, &query).expect("ranked docs are stored");
            SearchHit {
                doc_id: stored.doc_id.clone(),
                title: stored.title.clone(),
                score,
                priority: subqueries[list].priority,
                snippet: h.snippet,
                snippet_range: [h.snippet_range.start, h.snippet_range.end],
                text_highlights: h.text.iter().map(|r| [r.start, r.end]).collect(),
                math_highlights: h.math,
            }
        })
        .collect();

    let subqueries = subqueries
        .iter()
        .map(|sq| SubqueryView {
            priority: sq.priority,
            terms: sq.terms(&query).iter().map(|t| t.stem.clone()).collect(),
            formulae: sq.formulae(&query).iter().map(|f| f.tree.serialize()).collect(),
        })
        .collect();
    Ok(SearchResponse {
        query: q.to_string(),
        subqueries,
        results,
        timing_ms: started.elapsed().as_secs_f64() * 1000.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusRecord, Document};

    fn index(docs: &[(&str, &str)]) -> Index {
        let docs = docs
            .iter()
            .map(|(id, text)| {
                Document::from_record(&CorpusRecord { id: id.to_string(), title: format!("T{id}"), text: text.to_string(), mathml: vec![] })
                    .unwrap()
            })
            .collect();
        Index::build(docs, Default::default(), false).unwrap()
    }

    fn ids(r: &SearchResponse) -> Vec<&str> {
        r.results.iter().map(|h| h.doc_id.as_str()).collect()
    }

    #[test]
    fn relaxed_subqueries_fill_in() {
        let ix = index(&[("full", "quadratic $x^2$"), ("math", "nothing $x^2$"), ("text", "quadratic only")]);
        let r = search(&ix, "$x^2$ quadratic", &SearchConfig::default()).unwrap();
        assert_eq!(ids(&r), ["full", "math", "text"]);
        let priorities: Vec<usize> = r.results.iter().map(|h| h.priority).collect();
        assert_eq!(priorities, [1, 2, 3]);
        assert_eq!(r.subqueries.len(), 3);
        assert_eq!(r.subqueries[0].terms, ["quadrat"]);
        assert_eq!(r.subqueries[0].formulae, ["(^ (v x) (n 2))"]);
        assert_eq!(r.results[0].title, "Tfull");
        assert_eq!(r.results[0].math_highlights, [0]);
        assert_eq!(r.results[0].text_highlights, [[0, 9]]);
    }

    #[test]
    fn final_limit_caps_results() {
        let docs: Vec<(String, String)> = (0..10).map(|i| (format!("d{i}"), "word".to_string())).collect();
        let refs: Vec<(&str, &str)> = docs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let ix = index(&refs);
        let r = search(&ix, "word", &SearchConfig { final_limit: 3, ..Default::default() }).unwrap();
        assert_eq!(r.results.len(), 3);
    }

    #[test]
    fn no_results_is_not_an_error() {
        let ix = index(&[("a", "alpha")]);
        assert!(search(&ix, "beta", &SearchConfig::default()).unwrap().results.is_empty());
        assert_eq!(search(&ix, "", &SearchConfig::default()).unwrap_err(), QueryError::EmptyQuery);
    }
}
