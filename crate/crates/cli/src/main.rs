use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use mias_client::MiasClient;
use mias_core::api::{SearchResponse, DEFAULT_LIMIT, MAX_LIMIT};
use mias_core::corpus::{read_corpus, CorpusError};
use mias_core::eval::{
    bench_indexing, evaluate, generate_corpus, read_qrels, read_run, BenchConfig, BenchError, EvalError,
};
use mias_core::index::{Index, IndexError};
use mias_core::query::{search, SearchConfig};
use mias_service::{spawn, ServeConfig, INDEX_DIR_ENV};

#[derive(Parser)]
#[command(name = "mias", version, about = "Math-aware full-text search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index directory from a JSONL corpus.
    Index {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Query an index directory, or a running service given as an http(s) URL.
    Search {
        target: String,
        query: String,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        /// Print the service's JSON response shape.
        #[arg(long)]
        json: bool,
    },
    /// Score a TREC run against relevance judgments.
    Eval {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,3")]
        levels: Vec<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Time indexing over growing synthetic corpora.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Index on a pool of this many threads instead of the calling thread.
        #[arg(long)]
        threads: Option<usize>,
        /// Runs per size; the fastest is kept.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic JSONL corpus.
    Generate {
        #[arg(long)]
        docs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the HTTP/JSON API over an index directory.
    Serve {
        #[arg(long, env = INDEX_DIR_ENV)]
        index: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Origin allowed by CORS (`*` for any).
        #[arg(long)]
        cors_origin: Option<String>,
    },
}

/// Exit codes: 1 for operational failures, 2 for bad queries.
enum Failure {
    Operational(anyhow::Error),
    Query(String),
}

macro_rules! operational {
    ($($error:ty),*) => {$(
        impl From<$error> for Failure {
            fn from(e: $error) -> Self {
                Failure::Operational(e.into())
            }
        }
    )*};
}

operational!(anyhow::Error, CorpusError, IndexError, EvalError);

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Index { corpus, out } => cmd_index(&corpus, &out),
        Command::Search { target, query, limit, json } => cmd_search(&target, &query, limit, json),
        Command::Eval { run, qrels, levels, json } => cmd_eval(&run, &qrels, &levels, json),
        Command::Bench { sizes, seed, threads, repeats, json } => {
            cmd_bench(&sizes, BenchConfig { seed, repeats, threads }, json)
        }
        Command::Generate { docs, seed, out } => cmd_generate(docs, seed, &out),
        Command::Serve { index, port, host, cors_origin } => cmd_serve(index, SocketAddr::new(host, port), cors_origin),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Operational(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Query(message)) => {
            eprintln!("query error: {message}");
            ExitCode::from(2)
        }
    }
}

fn cmd_index(corpus: &Path, out: &Path) -> Outcome {
    let started = Instant::now();
    let docs = read_corpus(corpus)?;
    if docs.is_empty() {
        eprintln!("warning: {} contains no documents; writing an empty index", corpus.display());
    }
    let index = Index::build(docs, Default::default(), true).with_context(|| format!("indexing {}", corpus.display()))?;
    index.persist(out)?;
    println!("docs={} math_tokens={} time={:.3}", index.n_docs(), index.n_math_tokens(), started.elapsed().as_secs_f64());
    Ok(())
}

fn is_url(target: &str) -> bool {
    target.starts_with("http://") || target.starts_with("https://")
}

fn cmd_search(target: &str, q: &str, limit: usize, json: bool) -> Outcome {
    let limit = limit.min(MAX_LIMIT);
    let response = if is_url(target) {
        let client = MiasClient::new(target).map_err(anyhow::Error::from)?;
        let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build().context("starting runtime")?;
        runtime.block_on(client.search(q, Some(limit))).map_err(|e| match e.api_error() {
            Some((status, body)) if status.as_u16() == 400 => Failure::Query(body.error.clone()),
            _ => Failure::Operational(e.into()),
        })?
    } else {
        let index = Index::open(Path::new(target))?;
        search(&index, q, &SearchConfig::with_limit(limit)).map_err(|e| Failure::Query(e.to_string()))?
    };
    let mut stdout = std::io::stdout().lock();
    if json {
        writeln!(stdout, "{}", serde_json::to_string(&response).context("encoding response")?).context("writing output")?;
    } else {
        print_results(&mut stdout, &response).context("writing output")?;
    }
    Ok(())
}

fn print_results(out: &mut impl Write, response: &SearchResponse) -> std::io::Result<()> {
    let n = response.results.len();
    writeln!(out, "{n} result{} ({:.1} ms)", if n == 1 { "" } else { "s" }, response.timing_ms)?;
    for (rank, hit) in response.results.iter().enumerate() {
        writeln!(out, "{:>3}. {}  score={:.6}  subquery={}", rank + 1, hit.doc_id, hit.score, hit.priority)?;
        if !hit.title.is_empty() {
            writeln!(out, "     {}", hit.title)?;
        }
        let snippet = hit.snippet.split_whitespace().collect::<Vec<_>>().join(" ");
        if !snippet.is_empty() {
            writeln!(out, "     {snippet}")?;
        }
    }
    Ok(())
}

fn cmd_eval(run: &Path, qrels: &Path, levels: &[u32], json: bool) -> Outcome {
    let report = evaluate(&read_run(run)?, &read_qrels(qrels)?, levels);
    if json {
        println!("{}", serde_json::to_string(&report).context("encoding report")?);
    } else {
        print!("{}", report.to_table());
    }
    Ok(())
}

fn cmd_bench(sizes: &[usize], config: BenchConfig, json: bool) -> Outcome {
    let report = bench_indexing(sizes, &config).map_err(|e| match e {
        BenchError::InsufficientPoints(_) | BenchError::NotIncreasing => anyhow!("{e}"),
        other => anyhow::Error::from(other).context("benchmark failed"),
    })?;
    if json {
        println!("{}", serde_json::to_string(&report).context("encoding report")?);
    } else {
        print!("{}", report.to_table());
    }
    Ok(())
}

fn cmd_generate(docs: usize, seed: u64, out: &Path) -> Outcome {
    if docs == 0 {
        return Err(anyhow!("--docs must be at least 1").into());
    }
    std::fs::write(out, generate_corpus(docs, seed)).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn cmd_serve(index_dir: PathBuf, addr: SocketAddr, cors_origin: Option<String>) -> Outcome {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(async move {
        let service = spawn(ServeConfig { index_dir, addr, cors_origin }).await.map_err(anyhow::Error::from)?;
        eprintln!("listening on http://{}", service.local_addr);
        let n = service.loaded.await.context("index loader panicked")?.context("loading index")?;
        eprintln!("serving {n} documents");
        tokio::select! {
            served = service.server => {
                served.context("server task failed")?.context("server failed")?;
            }
            _ = tokio::signal::ctrl_c() => eprintln!("shutting down"),
        }
        Ok(())
    })
}
