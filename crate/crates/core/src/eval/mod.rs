//! TREC-style quality evaluation, plus the synthetic corpus generator and the
//! indexing-time benchmark.

mod bench;
mod generate;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bench::{bench_indexing, cpu_time, linear_fit, BenchConfig, BenchError, BenchReport, BenchRow, LinearFit};
pub use generate::{generate_corpus, generate_records, GeneratorBounds, BOUNDS};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl EvalError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        EvalError::Parse { line, message: message.into() }
    }

    /// Prefixes parse errors with the file they came from.
    fn in_file(self, path: &Path) -> Self {
        match self {
            EvalError::Parse { line, message } => EvalError::Parse { line, message: format!("{}: {message}", path.display()) },
            other => other,
        }
    }
}

/// Relevance judgments: topic → doc → level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels(pub BTreeMap<String, BTreeMap<String, u32>>);

impl Qrels {
    /// Docs judged at `level` or above for one topic.
    pub fn relevant(&self, topic: &str, level: u32) -> HashSet<&str> {
        self.0
            .get(topic)
            .map(|docs| docs.iter().filter(|(_, &l)| l >= level).map(|(d, _)| d.as_str()).collect())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub topic: String,
    pub doc_id: String,
    /// 1-based.
    pub rank: usize,
    pub score: f64,
}

/// Ranked runs per topic, each in rank order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run(pub BTreeMap<String, Vec<RunEntry>>);

impl Run {
    pub fn ranked(&self, topic: &str) -> Vec<&str> {
        self.0.get(topic).map(|e| e.iter().map(|e| e.doc_id.as_str()).collect()).unwrap_or_default()
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, f)| !f.is_empty())
}

/// Parses `topic 0 docid level` lines.
pub fn parse_qrels(text: &str) -> Result<Qrels, EvalError> {
    let mut qrels = Qrels::default();
    for (line, fields) in lines(text) {
        let [topic, _, doc, level] = fields[..] else {
            return Err(EvalError::parse(line, format!("expected 4 fields, found {}", fields.len())));
        };
        let level: u32 = level.parse().map_err(|_| EvalError::parse(line, format!("bad relevance level {level:?}")))?;
        let docs = qrels.0.entry(topic.to_string()).or_default();
        if docs.insert(doc.to_string(), level).is_some() {
            return Err(EvalError::parse(line, format!("duplicate judgment for {topic}/{doc}")));
        }
    }
    Ok(qrels)
}

/// Parses `topic Q0 docid rank score tag` lines. Ranks must run 1..=n per
/// topic without gaps, and a document may appear once per topic.
pub fn parse_run(text: &str) -> Result<Run, EvalError> {
    let mut by_topic: BTreeMap<String, Vec<(usize, RunEntry)>> = BTreeMap::new();
    for (line, fields) in lines(text) {
        let [topic, _, doc, rank, score, _] = fields[..] else {
            return Err(EvalError::parse(line, format!("expected 6 fields, found {}", fields.len())));
        };
        let rank: usize = rank.parse().ok().filter(|&r| r >= 1).ok_or_else(|| EvalError::parse(line, format!("bad rank {rank:?}")))?;
        let score: f64 = score.parse().map_err(|_| EvalError::parse(line, format!("bad score {score:?}")))?;
        let entries = by_topic.entry(topic.to_string()).or_default();
        if let Some((first, _)) = entries.iter().find(|(_, e)| e.doc_id == doc) {
            return Err(EvalError::parse(line, format!("{doc} already ranked for topic {topic} on line {first}")));
        }
        if let Some((first, _)) = entries.iter().find(|(_, e)| e.rank == rank) {
            return Err(EvalError::parse(line, format!("rank {rank} already used for topic {topic} on line {first}")));
        }
        entries.push((line, RunEntry { topic: topic.to_string(), doc_id: doc.to_string(), rank, score }));
    }
    let mut run = Run::default();
    for (topic, mut entries) in by_topic {
        entries.sort_by_key(|(_, e)| e.rank);
        if let Some((line, e)) = entries.iter().enumerate().find(|(i, (_, e))| e.rank != i + 1).map(|(_, x)| x) {
            return Err(EvalError::parse(*line, format!("ranks for topic {topic} are not dense: {} has no predecessor", e.rank)));
        }
        run.0.insert(topic, entries.into_iter().map(|(_, e)| e).collect());
    }
    Ok(run)
}

fn read(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.to_path_buf(), source })
}

pub fn read_qrels(path: &Path) -> Result<Qrels, EvalError> {
    parse_qrels(&read(path)?).map_err(|e| e.in_file(path))
}

pub fn read_run(path: &Path) -> Result<Run, EvalError> {
    parse_run(&read(path)?).map_err(|e| e.in_file(path))
}

/// Mean of precision at each relevant hit, over all relevant documents.
pub fn average_precision(ranked: &[&str], relevant: &HashSet<&str>) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, doc) in ranked.iter().enumerate() {
        if relevant.contains(doc) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / relevant.len() as f64
}

/// Relevant documents among the first `k`, divided by `k` regardless of how
/// many were returned.
pub fn precision_at_k(ranked: &[&str], relevant: &HashSet<&str>, k: usize) -> f64 {
    assert!(k >= 1, "precision_at_k needs k >= 1");
    ranked.iter().take(k).filter(|d| relevant.contains(*d)).count() as f64 / k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScores {
    /// Relevance threshold: judged level ≥ this counts as relevant.
    pub level: u32,
    pub map: f64,
    pub p5: f64,
    pub p10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub topics: usize,
    pub levels: Vec<LevelScores>,
}

/// Averages over the topics in `qrels`; topics missing from the run score 0.
pub fn evaluate(run: &Run, qrels: &Qrels, levels: &[u32]) -> EvalReport {
    let n = qrels.0.len();
    let mean = |total: f64| if n == 0 { 0.0 } else { total / n as f64 };
    let levels = levels
        .iter()
        .map(|&level| {
            let (mut ap, mut p5, mut p10) = (0.0, 0.0, 0.0);
            for topic in qrels.0.keys() {
                let ranked = run.ranked(topic);
                let relevant = qrels.relevant(topic, level);
                ap += average_precision(&ranked, &relevant);
                p5 += precision_at_k(&ranked, &relevant, 5);
                p10 += precision_at_k(&ranked, &relevant, 10);
            }
            LevelScores { level, map: mean(ap), p5: mean(p5), p10: mean(p10) }
        })
        .collect();
    EvalReport { topics: n, levels }
}

impl EvalReport {
    /// Measures as rows, relevance levels as columns.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<8}", "measure");
        for l in &self.levels {
            let _ = write!(out, " {:>8}", format!("≥{}", l.level));
        }
        out.push('\n');
        type Measure = fn(&LevelScores) -> f64;
        let measures: [(&str, Measure); 3] = [("MAP", |l| l.map), ("P@10", |l| l.p10), ("P@5", |l| l.p5)];
        for (name, get) in measures {
            let _ = write!(out, "{name:<8}");
            for l in &self.levels {
                let _ = write!(out, " {:>8.4}", get(l));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "topics   {:>8}", self.topics);
        out
    }
}
