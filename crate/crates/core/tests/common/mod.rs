//! Generators and brute-force oracles shared by the integration tests and
//! the acceptance harness. Nothing here calls into the store or engine
//! except `ingest`, which builds the graph under test.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsgraph::model::{AttrType, AttributeValue, ColumnDef, Edge, GraphSchema, Timestamp, VertexId, VertexUpdate};
use tsgraph::partition::PartitionLayout;
use tsgraph::store::{CodecConfig, Graph, GraphWriter, IngestSummary, LocalFs, StorageBackend};

pub const DAY: u64 = 86_400_000;
pub const BASE_TS: u64 = 1_700_000_000_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn schema(graph_id: &str) -> GraphSchema {
    GraphSchema::new(graph_id)
        .with_edge_type("call", vec![ColumnDef::new("secs", AttrType::Int), ColumnDef::new("cost", AttrType::Double)])
        .with_edge_type("sms", vec![ColumnDef::new("text", AttrType::Str)])
        .with_edge_type("follow", vec![])
        .with_edge_type("pay", vec![ColumnDef::new("amount", AttrType::Long), ColumnDef::new("w", AttrType::Double)])
        .with_vertex_attr("age", AttrType::Int)
        .with_vertex_attr("city", AttrType::Str)
}

/// Random attribute cells for `edge_type` under [`schema`].
pub fn attrs_for(rng: &mut ChaCha8Rng, edge_type: &str) -> Vec<AttributeValue> {
    match edge_type {
        "call" => vec![AttributeValue::Int(rng.gen_range(0..3600)), AttributeValue::Double(rng.gen_range(0..10_000) as f64 / 100.0)],
        "sms" => {
            let words = ["hi", "ok", "on my way", "call me", ""];
            vec![AttributeValue::Str(words.choose(rng).unwrap().to_string())]
        }
        "follow" => vec![],
        _ => vec![AttributeValue::Long(rng.gen_range(-1_000_000..1_000_000)), AttributeValue::Double(rng.gen_range(1..100) as f64)],
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub schema: GraphSchema,
    pub edges: Vec<Edge>,
    pub updates: Vec<VertexUpdate>,
}

impl Sample {
    pub fn vertices(&self) -> BTreeSet<VertexId> {
        self.edges.iter().flat_map(|e| [e.src, e.dst]).collect()
    }

    pub fn max_ts(&self) -> Timestamp {
        self.edges.iter().map(|e| e.timestamp).max().unwrap_or(BASE_TS)
    }
}

/// Multi-type, multi-day graph with duplicate edges and attribute histories.
pub fn random_sample(seed: u64, vertices: u64, edges: usize, days: u64) -> Sample {
    let mut rng = rng(seed);
    let types = ["call", "sms", "follow", "pay"];
    let mut out = Vec::with_capacity(edges);
    for _ in 0..edges {
        let src = rng.gen_range(1..=vertices);
        let dst = rng.gen_range(1..=vertices);
        let t = BASE_TS + rng.gen_range(0..days.max(1) * DAY);
        let ty = *types.choose(&mut rng).unwrap();
        let attrs = attrs_for(&mut rng, ty);
        out.push(Edge::new(src, dst, ty, t, attrs));
    }
    // Exact duplicates must survive the round trip too.
    for i in 0..edges / 50 {
        let e = out[i * 7 % out.len().max(1)].clone();
        out.push(e);
    }
    let updates = random_updates(&mut rng, vertices, vertices as usize * 2, days);
    Sample { schema: schema("g"), edges: out, updates }
}

pub fn random_updates(rng: &mut ChaCha8Rng, vertices: u64, count: usize, days: u64) -> Vec<VertexUpdate> {
    let cities = ["Paris", "Lyon", "Oslo", "Lima"];
    (0..count)
        .map(|_| {
            let vertex = rng.gen_range(1..=vertices);
            // Coarse timestamps so that same-time rewrites happen.
            let timestamp = BASE_TS + rng.gen_range(0..days.max(1) * 24) * 3_600_000;
            if rng.gen_bool(0.5) {
                VertexUpdate { vertex, attr: "age".into(), timestamp, value: AttributeValue::Int(rng.gen_range(10..80)) }
            } else {
                let city = cities.choose(rng).unwrap().to_string();
                VertexUpdate { vertex, attr: "city".into(), timestamp, value: AttributeValue::Str(city) }
            }
        })
        .collect()
}

/// Single-type graph of `follow`/`pay` edges for traversal and algorithm
/// checks. `weighted` uses `pay` so that the `w` column carries weights.
pub fn random_digraph(seed: u64, vertices: u64, edges: usize, weighted: bool) -> Sample {
    let mut rng = rng(seed);
    let ty = if weighted { "pay" } else { "follow" };
    let edges = (0..edges)
        .map(|_| {
            let src = rng.gen_range(1..=vertices);
            let dst = rng.gen_range(1..=vertices);
            let t = BASE_TS + rng.gen_range(0..3 * DAY);
            let attrs = attrs_for(&mut rng, ty);
            Edge::new(src, dst, ty, t, attrs)
        })
        .collect();
    Sample { schema: schema("g"), edges, updates: Vec::new() }
}

pub fn ingest_with(
    backend: Arc<dyn StorageBackend>,
    sample: &Sample,
    layout: PartitionLayout,
    codecs: CodecConfig,
) -> (Graph, IngestSummary) {
    let mut w = GraphWriter::create(backend.clone(), sample.schema.clone(), layout, codecs).expect("create graph");
    for e in &sample.edges {
        w.add_edge(e.clone()).expect("valid edge");
    }
    for u in &sample.updates {
        w.add_vertex_update(u.clone()).expect("valid update");
    }
    let summary = w.finish().expect("finish ingest");
    (Graph::open(backend, &sample.schema.graph_id).expect("open graph"), summary)
}

pub fn ingest(dir: &Path, sample: &Sample) -> Graph {
    let codecs = CodecConfig { block_target_bytes: 2048, ..Default::default() };
    ingest_with(Arc::new(LocalFs::new(dir)), sample, PartitionLayout::new(3, 4).unwrap(), codecs).0
}

pub fn sorted(mut edges: Vec<Edge>) -> Vec<Edge> {
    edges.sort_by(|a, b| {
        (a.src, a.dst, a.timestamp, &a.edge_type, &a.attributes).cmp(&(b.src, b.dst, b.timestamp, &b.edge_type, &b.attributes))
    });
    edges
}

// ---------------------------------------------------------------- replay

/// Edges of the ingest log with timestamp at or before `t`.
pub fn replay_edges(edges: &[Edge], t: Timestamp) -> Vec<Edge> {
    sorted(edges.iter().filter(|e| e.timestamp <= t).cloned().collect())
}

/// Latest value of `attr` for `vertex` at or before `t`; among updates
/// sharing a timestamp the one ingested last wins.
pub fn replay_attr(updates: &[VertexUpdate], vertex: VertexId, attr: &str, t: Timestamp) -> Option<AttributeValue> {
    let mut best: Option<(Timestamp, &AttributeValue)> = None;
    for u in updates {
        if u.vertex == vertex && u.attr == attr && u.timestamp <= t && best.is_none_or(|(bt, _)| u.timestamp >= bt) {
            best = Some((u.timestamp, &u.value));
        }
    }
    best.map(|(_, v)| v.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Out,
    In,
    Both,
}

/// Neighbor sets of the edges alive at `t`.
pub fn adjacency(edges: &[Edge], t: Timestamp, dir: Dir) -> BTreeMap<VertexId, BTreeSet<VertexId>> {
    let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for e in edges.iter().filter(|e| e.timestamp <= t) {
        if dir != Dir::In {
            adj.entry(e.src).or_default().insert(e.dst);
        }
        if dir != Dir::Out {
            adj.entry(e.dst).or_default().insert(e.src);
        }
    }
    adj
}

fn step(adj: &BTreeMap<VertexId, BTreeSet<VertexId>>, frontier: &BTreeSet<VertexId>) -> BTreeSet<VertexId> {
    frontier.iter().filter_map(|v| adj.get(v)).flatten().copied().collect()
}

/// The k-th breadth layer, taken as a set of walk endpoints.
pub fn bfs_exact(adj: &BTreeMap<VertexId, BTreeSet<VertexId>>, seeds: &BTreeSet<VertexId>, k: usize) -> BTreeSet<VertexId> {
    (0..k).fold(seeds.clone(), |f, _| step(adj, &f))
}

/// Every vertex at breadth depth at most k, seeds included.
pub fn bfs_within(adj: &BTreeMap<VertexId, BTreeSet<VertexId>>, seeds: &BTreeSet<VertexId>, k: usize) -> BTreeSet<VertexId> {
    let mut seen = seeds.clone();
    let mut frontier = seeds.clone();
    for _ in 0..k {
        frontier = step(adj, &frontier).difference(&seen).copied().collect();
        seen.extend(frontier.iter().copied());
    }
    seen
}

// ---------------------------------------------------------------- pagerank

/// Dense power iteration on distinct links, dangling mass spread evenly.
/// Returns ranks indexed like `vertices`.
pub fn dense_pagerank(vertices: &[VertexId], links: &BTreeSet<(VertexId, VertexId)>, d: f64, iterations: usize) -> Vec<f64> {
    let n = vertices.len();
    let index: BTreeMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut m = vec![vec![0.0f64; n]; n];
    let mut outdeg = vec![0usize; n];
    for (s, _) in links {
        outdeg[index[s]] += 1;
    }
    for (s, t) in links {
        let (i, j) = (index[s], index[t]);
        m[j][i] += 1.0 / outdeg[i] as f64;
    }
    let mut r = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        let dangling: f64 = (0..n).filter(|&i| outdeg[i] == 0).map(|i| r[i]).sum();
        let next: Vec<f64> = (0..n)
            .map(|j| {
                let incoming: f64 = (0..n).map(|i| m[j][i] * r[i]).sum();
                (1.0 - d) / n as f64 + d * (incoming + dangling / n as f64)
            })
            .collect();
        let delta = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r = next;
        if delta < 1e-15 {
            break;
        }
    }
    r
}

// ---------------------------------------------------------------- sssp

/// Dijkstra over `(src, dst, weight)` arcs. Unreached vertices are absent.
pub fn dijkstra(arcs: &[(VertexId, VertexId, f64)], source: VertexId) -> BTreeMap<VertexId, f64> {
    let mut adj: BTreeMap<VertexId, Vec<(VertexId, f64)>> = BTreeMap::new();
    for &(s, t, w) in arcs {
        adj.entry(s).or_default().push((t, w));
    }
    let mut dist: BTreeMap<VertexId, f64> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrdF64(0.0), source)));
    while let Some(Reverse((OrdF64(d), v))) = heap.pop() {
        if dist.contains_key(&v) {
            continue;
        }
        dist.insert(v, d);
        for &(t, w) in adj.get(&v).into_iter().flatten() {
            if !dist.contains_key(&t) {
                heap.push(Reverse((OrdF64(d + w), t)));
            }
        }
    }
    dist
}

#[derive(Clone, Copy)]
struct OrdF64(f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

// ---------------------------------------------------------------- dfcm

/// Straight transcription of the two-predictor scheme: FCM keyed by a hash
/// of recent values, DFCM keyed by a hash of recent strides, residual =
/// value XOR the prediction with more leading zero bytes (FCM on ties).
pub fn reference_dfcm(values: &[u64], table_bits: u32) -> Vec<u8> {
    let size = 1usize << table_bits;
    let mask = (size - 1) as u64;
    let mut fcm_table = vec![0u64; size];
    let mut dfcm_table = vec![0u64; size];
    let (mut fcm_ctx, mut dfcm_ctx, mut prev) = (0u64, 0u64, 0u64);
    let mut out = Vec::new();
    for &v in values {
        let p_fcm = fcm_table[fcm_ctx as usize];
        let p_dfcm = prev.wrapping_add(dfcm_table[dfcm_ctx as usize]);
        let zero_bytes = |x: u64| x.to_be_bytes().iter().take_while(|&&b| b == 0).count();
        let (sel, xor) = if zero_bytes(v ^ p_fcm) >= zero_bytes(v ^ p_dfcm) { (0u8, v ^ p_fcm) } else { (1u8, v ^ p_dfcm) };
        let lz = zero_bytes(xor).min(7);
        out.push(sel << 7 | (lz as u8) << 4);
        out.extend_from_slice(&xor.to_le_bytes()[..8 - lz]);

        fcm_table[fcm_ctx as usize] = v;
        fcm_ctx = ((fcm_ctx << 6) ^ (v >> 48)) & mask;
        let stride = v.wrapping_sub(prev);
        dfcm_table[dfcm_ctx as usize] = stride;
        dfcm_ctx = ((dfcm_ctx << 6) ^ (stride >> 48)) & mask;
        prev = v;
    }
    out
}

/// Ten value streams exercising both predictors.
pub fn dfcm_fixtures() -> Vec<(&'static str, Vec<u64>)> {
    let mut r = rng(99);
    vec![
        ("empty", vec![]),
        ("single", vec![0xdead_beef_0bad_f00d]),
        ("zeros", vec![0; 500]),
        ("arithmetic_stride_3", (0..2000u64).map(|i| 1_000 + 3 * i).collect()),
        ("repeating_cycle", (0..3000u64).map(|i| [7u64, 1 << 60, 42, u64::MAX][(i % 4) as usize]).collect()),
        ("smooth_doubles", (0..4000).map(|i| ((i as f64 * 0.01).sin() * 100.0).to_bits()).collect()),
        ("integral_doubles", (0..4000).map(|i| (i as f64 * 2.0 + 0.5).to_bits()).collect()),
        ("timestamps", (0..3000u64).scan(BASE_TS, |t, _| { *t += r.gen_range(0..1000); Some(*t) }).collect()),
        ("random_words", (0..2000).map(|_| r.gen()).collect()),
        ("negative_longs", (0..3000i64).map(|i| (-5_000_000 + i * i) as u64).collect()),
    ]
}
