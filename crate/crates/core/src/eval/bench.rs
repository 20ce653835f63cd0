use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::generate::generate_records;
use crate::corpus::{CorpusRecord, Document};
use crate::index::{Index, IndexError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("need at least 3 corpus sizes for a linear fit, got {0}")]
    InsufficientPoints(usize),
    #[error("corpus sizes must be positive and strictly increasing")]
    NotIncreasing,
    #[error("generated document {doc_id} failed to parse: {message}")]
    Document { doc_id: String, message: String },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub seed: u64,
    /// Each size is indexed this many times; the fastest run is reported.
    pub repeats: usize,
    /// `None` indexes on the calling thread; `Some(n)` on an n-thread pool.
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { seed: 7, repeats: 1, threads: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub docs: usize,
    pub formulae: usize,
    /// Formula tokens emitted while indexing.
    pub tokens: u64,
    pub wall_s: f64,
    pub cpu_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub threads: usize,
    pub rows: Vec<BenchRow>,
    /// Wall time against document count.
    pub fit: LinearFit,
    pub cpu_fit: LinearFit,
}

/// User plus system CPU time consumed by this process so far.
pub fn cpu_time() -> Duration {
    // SAFETY: getrusage only writes into the zeroed struct we hand it.
    let usage = unsafe {
        let mut usage: libc::rusage = std::mem::zeroed();
        libc::getrusage(libc::RUSAGE_SELF, &mut usage);
        usage
    };
    let tv = |t: libc::timeval| Duration::new(t.tv_sec as u64, t.tv_usec as u32 * 1000);
    tv(usage.ru_utime) + tv(usage.ru_stime)
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    LinearFit { slope, intercept, r_squared }
}

fn index_records(records: &[CorpusRecord], parallel: bool) -> Result<Index, BenchError> {
    let parse = |r: &CorpusRecord| {
        Document::from_record(r).map_err(|e| BenchError::Document { doc_id: r.id.clone(), message: e.to_string() })
    };
    let docs: Vec<Document> = if parallel {
        records.par_iter().map(parse).collect::<Result<_, _>>()?
    } else {
        records.iter().map(parse).collect::<Result<_, _>>()?
    };
    Ok(Index::build(docs, Default::default(), parallel)?)
}

/// Indexes growing prefixes of one generated corpus, timing formula parsing
/// plus index construction, and fits time against document count.
pub fn bench_indexing(sizes: &[usize], config: &BenchConfig) -> Result<BenchReport, BenchError> {
    if sizes.len() < 3 {
        return Err(BenchError::InsufficientPoints(sizes.len()));
    }
    if sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::NotIncreasing);
    }
    let pool = match config.threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| BenchError::ThreadPool(e.to_string()))?,
        ),
        None => None,
    };
    let records = generate_records(*sizes.last().expect("checked non-empty"), config.seed);
    let mut rows = Vec::new();
    for &n in sizes {
        let prefix = &records[..n];
        let mut best: Option<BenchRow> = None;
        for _ in 0..config.repeats.max(1) {
            let (wall0, cpu0) = (Instant::now(), cpu_time());
            let index = match &pool {
                Some(pool) => pool.install(|| index_records(prefix, true))?,
                None => index_records(prefix, false)?,
            };
            let (wall, cpu) = (wall0.elapsed(), cpu_time().saturating_sub(cpu0));
            let row = BenchRow {
                docs: n,
                formulae: index.docs().iter().map(|d| d.doc.formulae.len()).sum(),
                tokens: index.n_math_tokens(),
                wall_s: wall.as_secs_f64(),
                cpu_s: cpu.as_secs_f64(),
            };
            drop(index);
            if best.as_ref().is_none_or(|b| row.wall_s < b.wall_s) {
                best = Some(row);
            }
        }
        rows.push(best.expect("at least one repeat"));
    }
    let fit = linear_fit(&rows.iter().map(|r| (r.docs as f64, r.wall_s)).collect::<Vec<_>>());
    let cpu_fit = linear_fit(&rows.iter().map(|r| (r.docs as f64, r.cpu_s)).collect::<Vec<_>>());
    Ok(BenchReport { seed: config.seed, threads: config.threads.unwrap_or(1), rows, fit, cpu_fit })
}

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut out = format!("{:>8} {:>9} {:>10} {:>9} {:>9}\n", "docs", "formulae", "tokens", "wall_s", "cpu_s");
        for r in &self.rows {
            out += &format!("{:>8} {:>9} {:>10} {:>9.3} {:>9.3}\n", r.docs, r.formulae, r.tokens, r.wall_s, r.cpu_s);
        }
        out += &format!(
            "fit: wall_s = {:.3e} * docs + {:.3e}  R² = {:.4}  (cpu R² = {:.4}, threads = {})\n",
            self.fit.slope, self.fit.intercept, self.fit.r_squared, self.cpu_fit.r_squared, self.threads
        );
        out
    }
}
