use super::Query;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Leave Rightmost Out: drop trailing terms under all formulae, then drop
    /// trailing formulae under all terms.
    #[default]
    LeaveRightmostOut,
}

/// A reduced query: the first `n_formulae` formulae and first `n_terms` terms
/// of the original.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subquery {
    /// 1 is tried first.
    pub priority: usize,
    pub n_formulae: usize,
    pub n_terms: usize,
}

impl Subquery {
    pub fn terms<'q>(&self, query: &'q Query) -> &'q [crate::text::TextTerm] {
        &query.terms[..self.n_terms]
    }

    pub fn formulae<'q>(&self, query: &'q Query) -> &'q [super::QueryFormula] {
        &query.formulae[..self.n_formulae]
    }

    pub fn is_empty(&self) -> bool {
        self.n_formulae == 0 && self.n_terms == 0
    }
}

pub fn generate_subqueries(query: &Query, strategy: Strategy) -> Vec<Subquery> {
    let (m, n) = (query.formulae.len(), query.terms.len());
    let shapes: Vec<(usize, usize)> = match strategy {
        Strategy::LeaveRightmostOut => {
            let phase1 = (0..=n).rev().map(|j| (m, j));
            let phase2 = (0..m).rev().map(|k| (k, n));
            phase1.chain(phase2).collect()
        }
    };
    let mut out: Vec<Subquery> = Vec::new();
    for (n_formulae, n_terms) in shapes {
        let sq = Subquery { priority: out.len() + 1, n_formulae, n_terms };
        if sq.is_empty() || out.iter().any(|s| (s.n_formulae, s.n_terms) == (n_formulae, n_terms)) {
            continue;
        }
        out.push(sq);
    }
    out
}
