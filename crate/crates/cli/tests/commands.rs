use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

fn mias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mias")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn demo_index() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("index");
    let o = mias(&["index", p(&repo("data/demo.jsonl")), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    (dir, out)
}

fn meta_docs(index: &Path) -> u64 {
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(index.join("meta.json")).unwrap()).unwrap();
    meta["n_docs"].as_u64().unwrap()
}

#[test]
fn index_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    std::fs::write(
        &corpus,
        "{\"id\":\"1\",\"text\":\"sum $a+b$\"}\n{\"id\":\"2\",\"text\":\"words only\"}\n{\"id\":\"3\",\"text\":\"$x^2$\"}\n",
    )
    .unwrap();
    let out = dir.path().join("ix");
    let o = mias(&["index", p(&corpus), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.starts_with("docs=3 math_tokens="), "{line}");
    assert!(line.contains(" time="), "{line}");
    assert_eq!(meta_docs(&out), 3);
}

#[test]
fn index_reports_the_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.jsonl");
    std::fs::write(&corpus, "{\"id\":\"1\",\"text\":\"fine $a$\"}\n{\"id\":\"2\",\"text\":\"broken $a+$\"}\n").unwrap();
    let o = mias(&["index", p(&corpus), "--out", p(&dir.path().join("ix"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.jsonl:2"), "{err}");
}

#[test]
fn empty_corpus_gives_empty_index_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.jsonl");
    std::fs::write(&corpus, "").unwrap();
    let out = dir.path().join("ix");
    let o = mias(&["index", p(&corpus), "--out", p(&out)]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));
    assert_eq!(meta_docs(&out), 0);
}

#[test]
fn search_ranks_the_ordered_sum_first() {
    let (_dir, index) = demo_index();
    let o = mias(&["search", p(&index), "$b+a$"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let first = text.lines().nth(1).unwrap();
    assert!(first.contains("commutative-sum"), "{text}");
}

#[test]
fn search_exit_codes() {
    let (_dir, index) = demo_index();
    let o = mias(&["search", p(&index), "unbalanced $a+b"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("query error"));
    let o = mias(&["search", p(&index), "zzzzqqq"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("0 results"));
    let o = mias(&["search", "/nonexistent/index", "x"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn search_json_is_the_service_shape() {
    let (_dir, index) = demo_index();
    let o = mias(&["search", p(&index), "quadratic $x^2$", "--json", "--limit", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["query"], "quadratic $x^2$");
    assert_eq!(v["results"].as_array().unwrap().len(), 3);
    let keys: Vec<&str> = v["results"][0].as_object().unwrap().keys().map(String::as_str).collect();
    for key in ["doc_id", "score", "priority", "snippet", "text_highlights", "math_highlights"] {
        assert!(keys.contains(&key), "{keys:?}");
    }
    assert!(v["timing_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn eval_prints_map() {
    let fixtures = repo("crates/core/tests/fixtures");
    let o = mias(&["eval", "--run", p(&fixtures.join("two_topic.run")), "--qrels", p(&fixtures.join("two_topic.qrels"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    let map_row = table.lines().find(|l| l.starts_with("MAP")).unwrap();
    assert!(map_row.contains("0.7500"), "{table}");
    let o = mias(&[
        "eval",
        "--run",
        p(&fixtures.join("two_topic.run")),
        "--qrels",
        p(&fixtures.join("two_topic.qrels")),
        "--levels",
        "1",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["levels"][0]["map"], 0.75);
}

#[test]
fn eval_names_malformed_lines() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("bad.run");
    std::fs::write(&run, "1 Q0 d1 1 1.0 x\n1 Q0 d2\n").unwrap();
    let qrels = repo("crates/core/tests/fixtures/two_topic.qrels");
    let o = mias(&["eval", "--run", p(&run), "--qrels", p(&qrels)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 2") && err.contains("bad.run"), "{err}");
}

#[test]
fn bench_needs_three_sizes() {
    let o = mias(&["bench", "--sizes", "1000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at least 3"));
    let o = mias(&["bench", "--sizes", "20,40,80", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(v["fit"]["r_squared"].is_number());
}

#[test]
fn generate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    assert!(mias(&["generate", "--docs", "100", "--seed", "7", "--out", p(&a)]).status.success());
    assert!(mias(&["generate", "--docs", "100", "--seed", "7", "--out", p(&b)]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = mias(&["index", p(&a), "--out", p(&dir.path().join("ix"))]);
    assert!(stdout(&o).starts_with("docs=100 "));
}

#[test]
fn serve_refuses_a_missing_index() {
    let o = mias(&["serve", "--index", "/nonexistent/index", "--port", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

/// Starts `mias serve` on an ephemeral port; returns it once the index is loaded.
fn serve(index: &Path) -> (Server, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mias"))
        .args(["serve", "--port", "0"])
        .env("MIAS_INDEX_DIR", index)
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let deadline = Instant::now() + Duration::from_secs(30);
    let mut base = None;
    for line in lines.by_ref() {
        let line = line.unwrap();
        if let Some(url) = line.strip_prefix("listening on ") {
            base = Some(url.to_string());
        }
        if line.starts_with("serving ") {
            break;
        }
        assert!(Instant::now() < deadline, "service did not come up");
    }
    // keep draining so the child never blocks on a full pipe
    std::thread::spawn(move || for _ in lines {});
    (Server(child), base.expect("listening line"))
}

#[test]
fn search_through_the_service_matches_local_search() {
    let (_dir, index) = demo_index();
    let (_server, base) = serve(&index);
    let strip = |o: Output| {
        assert!(o.status.success(), "{}", stderr(&o));
        let mut v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["timing_ms"] = 0.into();
        v
    };
    for q in ["$b+a$", "quadratic roots $x^2$", "the"] {
        let remote = strip(mias(&["search", &base, q, "--json"]));
        let local = strip(mias(&["search", p(&index), q, "--json"]));
        assert_eq!(remote, local, "{q}");
    }
    let o = mias(&["search", &base, "$a+"]);
    assert_eq!(o.status.code(), Some(2));
}
