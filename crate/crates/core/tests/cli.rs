mod common;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use rand::Rng;

const SCHEMA: &str = r#"{"graph_id":"g","edge_types":{"call":[{"col":"secs","type":"int"},{"col":"cost","type":"double"}],"follow":[]},"vertex_attrs":[{"col":"age","type":"int"}]}"#;

fn tsgraph(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsgraph")).arg("--root").arg(root).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Self { dir: tempfile::tempdir().unwrap() };
        ws.file("schema.json", SCHEMA);
        ws
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        tsgraph(self.dir.path(), args)
    }

    fn ingest(&self, edges: &str, extra: &[&str]) -> Output {
        let input = self.file("edges.tsv", edges);
        let schema = self.dir.path().join("schema.json");
        let mut args = vec!["ingest", "--schema", schema.to_str().unwrap(), input.to_str().unwrap()];
        args.extend_from_slice(extra);
        self.run(&args)
    }
}

fn kv(line: &str, key: &str) -> u64 {
    line.split_whitespace()
        .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {line:?}"))
        .parse()
        .unwrap()
}

#[test]
fn ingest_reports_counts() {
    let ws = Workspace::new();
    let o = ws.ingest("1\t2\tcall\t1700000000000\t30\t0.5\n# comment\n\n2\t3\tfollow\t1700000000001\n", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("edges=2 vertices=3"));
    let stats = ws.run(&["--graph", "g", "stats"]);
    assert!(stats.status.success());
    assert!(stdout(&stats).contains("edge_types\tcall,follow"));
}

#[test]
fn malformed_line_exits_2_and_names_the_line() {
    let ws = Workspace::new();
    let o = ws.ingest("1\t2\tcall\t1700000000000\t30\t0.5\n1\t2\tcall\tsoon\t30\t0.5\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("edges.tsv:2"), "{}", stderr(&o));
    assert!(!ws.dir.path().join("g").join("manifest.json").exists());
}

#[test]
fn stored_bytes_are_smaller_than_input() {
    let ws = Workspace::new();
    let mut r = rng(11);
    let mut text = String::new();
    for i in 0..100_000u64 {
        let (s, d) = (r.gen_range(1..5_000u64), r.gen_range(1..5_000u64));
        writeln!(text, "{s}\t{d}\tcall\t{}\t{}\t{:.2}", BASE_TS + i * 37, r.gen_range(1..600), r.gen_range(0..100) as f64 / 4.0).unwrap();
    }
    let o = ws.ingest(&text, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let totals = stdout(&o).lines().last().unwrap().to_owned();
    assert!(kv(&totals, "stored_bytes") < kv(&totals, "input_bytes"), "{totals}");
}

#[test]
fn khop_matches_oracle_at_a_random_time() {
    let ws = Workspace::new();
    let sample = random_digraph(12, 80, 500, false);
    let mut text = String::new();
    for e in &sample.edges {
        writeln!(text, "{}\t{}\tfollow\t{}", e.src, e.dst, e.timestamp).unwrap();
    }
    assert!(ws.ingest(&text, &["--n", "3"]).status.success());
    let mut r = rng(12);
    for _ in 0..5 {
        let t = BASE_TS + r.gen_range(0..sample.max_ts() - BASE_TS + 1);
        let seed = sample.edges[r.gen_range(0..sample.edges.len())].src;
        let o = ws.run(&["--graph", "g", "--at", &t.to_string(), "query", "khop", "--seeds", &seed.to_string(), "--k", "2", "--exact"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let got: Vec<u64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
        let want: Vec<u64> = bfs_exact(&adjacency(&sample.edges, t, Dir::Out), &[seed].into(), 2).into_iter().collect();
        assert_eq!(got, want, "seed {seed} at {t}");
    }
    let unknown = ws.run(&["--graph", "g", "query", "khop", "--seeds", "999999", "--k", "1"]);
    assert_eq!(unknown.status.code(), Some(3));
}

#[test]
fn attribute_at_prints_value_or_absent() {
    let ws = Workspace::new();
    let attrs = ws.file("attrs.tsv", "1\tage\t1700000000100\t41\n1\tage\t1700000000200\t42\n");
    let o = ws.ingest("1\t2\tfollow\t1700000000000\n", &["--vertex-attrs", attrs.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let at = |t: &str| stdout(&ws.run(&["--graph", "g", "--at", t, "query", "attribute-at", "--vertex", "1", "--attr", "age"]));
    assert_eq!(at("1700000000050").trim(), "absent");
    assert_eq!(at("1700000000150").trim(), "41");
    assert_eq!(at("1700000000200").trim(), "42");
    let bad = ws.run(&["--graph", "g", "query", "attribute-at", "--vertex", "1", "--attr", "height"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn pagerank_on_a_cycle_is_uniform() {
    let ws = Workspace::new();
    assert!(ws.ingest("1\t2\tfollow\t1\n2\t3\tfollow\t2\n3\t1\tfollow\t3\n", &[]).status.success());
    let o = ws.run(&["--graph", "g", "--workers", "2", "run", "pagerank"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<(u64, f64)> = stdout(&o)
        .lines()
        .map(|l| {
            let (v, r) = l.split_once('\t').unwrap();
            (v.parse().unwrap(), r.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|&(_, r)| (r - 1.0 / 3.0).abs() < 1e-6), "{rows:?}");
    assert!(stderr(&o).contains("supersteps="));
}

#[test]
fn sssp_prints_inf_for_unreached() {
    let ws = Workspace::new();
    let edges = "1\t2\tcall\t1\t5\t1.5\n2\t3\tcall\t2\t5\t2.0\n4\t1\tcall\t3\t5\t1.0\n";
    assert!(ws.ingest(edges, &[]).status.success());
    let o = ws.run(&["--graph", "g", "run", "sssp", "--source", "1", "--weight", "cost"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "1\t0\n2\t1.5\n3\t3.5\n4\tinf\n");
    let neg = Workspace::new();
    assert!(neg.ingest("1\t2\tcall\t1\t5\t-1\n", &[]).status.success());
    let o = neg.run(&["--graph", "g", "run", "sssp", "--source", "1", "--weight", "cost"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn selective_run_skips_blocks() {
    let ws = Workspace::new();
    let mut text = String::new();
    let mut r = rng(13);
    let source = r.gen_range(1..20_000u64);
    writeln!(text, "{source}\t{}\tfollow\t{BASE_TS}", source + 1).unwrap();
    for i in 0..40_000u64 {
        writeln!(text, "{}\t{}\tfollow\t{}", r.gen_range(1..20_000u64), r.gen_range(1..20_000u64), BASE_TS + i).unwrap();
    }
    let o = ws.ingest(&text, &["--n", "1", "--block-bytes", "1024"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = ws.dir.path().join("d.tsv");
    let o = ws.run(&["--graph", "g", "run", "sssp", "--source", &source.to_string(), "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stats = stdout(&o);
    assert!(kv(&stats, "messages") > 0, "{stats}");
    assert!(kv(&stats, "blocks_skipped") > 0, "{stats}");
}

#[test]
fn bench_json_and_codec_errors() {
    let ws = Workspace::new();
    let o = ws.run(&["bench", "--synthetic", "timestamps", "--count", "20000", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    let ratio = |rows: &[serde_json::Value], name: &str| rows.iter().find(|r| r["codec"] == name).unwrap()["ratio"].as_f64().unwrap();
    assert!(ratio(&rows, "DELTA_TS+NONE") < ratio(&rows, "NONE+NONE"));

    let o = ws.run(&["bench", "--synthetic", "categories", "--count", "20000", "--codecs", "DICT+NONE", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(ratio(&rows, "DICT+NONE") < 1.0);

    let table = ws.run(&["bench", "--synthetic", "doubles", "--count", "5000"]);
    assert!(table.status.success());
    assert!(stdout(&table).contains("DFCM"));

    let bad = ws.run(&["bench", "--synthetic", "doubles", "--count", "100", "--codecs", "DELTA_TS"]);
    assert_eq!(bad.status.code(), Some(5), "{}", stderr(&bad));
    let unknown = ws.run(&["bench", "--synthetic", "doubles", "--count", "100", "--codecs", "LZ4"]);
    assert_eq!(unknown.status.code(), Some(5));
}

#[test]
fn missing_graph_and_bad_arguments() {
    let ws = Workspace::new();
    assert_eq!(ws.run(&["--graph", "nope", "stats"]).status.code(), Some(3));
    assert_eq!(ws.run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ws.run(&["--help"]).status.code(), Some(0));
}
