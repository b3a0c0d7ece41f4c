//! Stock workloads over graph views: PageRank and single-source shortest
//! paths as vertex programs, plus k-hop and attribute-filtered neighbor
//! queries built on traversal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::engine::{
    self, Aggregator, Context, EngineConfig, EngineError, ProgramFailure, RunStats, TraverseOptions,
    Traverser, VertexInfo, VertexProgram,
};
use crate::model::{AttrType, AttributeValue, Edge, VertexId};
use crate::store::{GraphView, ScanOptions, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum AlgorithmError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("the view has no vertices")]
    EmptyGraph,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("source vertex {0} is not in the view")]
    UnknownSource(VertexId),
    #[error("negative weight {weight} on edge {src} -> {dst}")]
    NegativeWeight { src: VertexId, dst: VertexId, weight: f64 },
    #[error("unknown vertex attribute {0:?}")]
    UnknownAttribute(String),
    #[error("no edge type has a numeric column {0:?}")]
    UnknownWeightColumn(String),
    #[error("bad predicate {0:?} (expected e.g. age>16)")]
    BadPredicate(String),
}

impl From<StoreError> for AlgorithmError {
    fn from(e: StoreError) -> Self {
        AlgorithmError::Engine(EngineError::Store(e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    pub max_iterations: u64,
    /// Stop once no rank moves by this much or more in one iteration.
    pub tolerance: f64,
    pub workers: usize,
    /// Count every edge between a pair instead of one link per pair.
    pub multiplicity: bool,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self { damping: 0.85, max_iterations: 100, tolerance: 1e-10, workers: 1, multiplicity: false }
    }
}

pub struct PageRankResult {
    pub ranks: BTreeMap<VertexId, f64>,
    /// Sum of all ranks after each superstep.
    pub rank_sums: Vec<f64>,
    pub stats: RunStats,
}

const DANGLING: usize = 0;
const RANK_SUM: usize = 1;
const MAX_DELTA: usize = 2;

struct PageRank {
    damping: f64,
    tolerance: f64,
    multiplicity: bool,
}

impl PageRank {
    fn out_links(&self, info: &VertexInfo) -> u64 {
        if self.multiplicity {
            info.out_edges
        } else {
            info.out_degree
        }
    }
}

impl VertexProgram for PageRank {
    type State = f64;
    type Message = f64;

    fn init(&self, _: &VertexInfo) -> f64 {
        0.0
    }

    fn compute(&self, ctx: &mut Context<'_, f64>, rank: &mut f64, messages: &[f64]) -> Result<(), ProgramFailure> {
        let n = ctx.num_vertices() as f64;
        let next = if ctx.superstep() == 0 {
            1.0 / n
        } else {
            let incoming: f64 = messages.iter().sum();
            let dangling = ctx.previous_aggregate(DANGLING).unwrap_or(0.0);
            (1.0 - self.damping) / n + self.damping * (incoming + dangling / n)
        };
        ctx.aggregate(MAX_DELTA, (next - *rank).abs());
        *rank = next;
        ctx.aggregate(RANK_SUM, next);
        match self.out_links(ctx.info()) {
            0 => ctx.aggregate(DANGLING, next),
            links => ctx.send_along_edges(next / links as f64),
        }
        Ok(())
    }

    fn combine(&self, a: &f64, b: &f64) -> Option<f64> {
        Some(a + b)
    }

    fn distinct_links(&self) -> bool {
        !self.multiplicity
    }

    fn aggregators(&self) -> Vec<Aggregator> {
        vec![Aggregator::Sum, Aggregator::Sum, Aggregator::Max]
    }

    fn halt(&self, superstep: u64, aggregates: &[f64]) -> bool {
        superstep >= 1 && aggregates[MAX_DELTA] < self.tolerance
    }
}

pub fn pagerank(view: GraphView<'_>, config: PageRankConfig) -> Result<PageRankResult, AlgorithmError> {
    if !(config.damping > 0.0 && config.damping < 1.0) {
        return Err(AlgorithmError::InvalidParameter(format!("damping {} is not in (0, 1)", config.damping)));
    }
    if config.max_iterations == 0 {
        return Err(AlgorithmError::InvalidParameter("max iterations must be at least 1".into()));
    }
    let program = PageRank { damping: config.damping, tolerance: config.tolerance, multiplicity: config.multiplicity };
    // Superstep 0 only seeds the uniform start vector.
    let engine = EngineConfig { workers: config.workers, max_supersteps: config.max_iterations + 1 };
    let result = engine::run(&program, view, engine)?;
    if result.states.is_empty() {
        return Err(AlgorithmError::EmptyGraph);
    }
    let rank_sums = result.stats.per_superstep.iter().map(|s| s.aggregates[RANK_SUM]).collect();
    Ok(PageRankResult { ranks: result.states, rank_sums, stats: result.stats })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SsspConfig {
    /// Numeric edge column holding weights; `None` weighs every edge 1.
    /// Edge types without the column are not followed.
    pub weight: Option<String>,
    pub workers: usize,
    /// Defaults to one more than the number of vertices, enough for any
    /// shortest path.
    pub max_supersteps: Option<u64>,
}

pub struct SsspResult {
    /// `f64::INFINITY` marks unreached vertices.
    pub distances: BTreeMap<VertexId, f64>,
    pub stats: RunStats,
}

#[derive(Debug)]
struct NegativeWeight {
    src: VertexId,
    dst: VertexId,
    weight: f64,
}

impl fmt::Display for NegativeWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "negative weight {} on {} -> {}", self.weight, self.src, self.dst)
    }
}

impl std::error::Error for NegativeWeight {}

struct Sssp {
    source: VertexId,
    scan: ScanOptions,
    weighted: bool,
}

impl VertexProgram for Sssp {
    type State = f64;
    type Message = f64;

    fn init(&self, _: &VertexInfo) -> f64 {
        f64::INFINITY
    }

    fn compute(&self, ctx: &mut Context<'_, f64>, dist: &mut f64, messages: &[f64]) -> Result<(), ProgramFailure> {
        let offered = if ctx.superstep() == 0 && ctx.vertex() == self.source { 0.0 } else { f64::INFINITY };
        let best = messages.iter().copied().fold(offered, f64::min);
        if best < *dist {
            *dist = best;
            ctx.send_along_edges(best);
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn combine(&self, a: &f64, b: &f64) -> Option<f64> {
        Some(a.min(*b))
    }

    fn edge_scan(&self) -> ScanOptions {
        self.scan.clone()
    }

    fn along_edge(&self, dist: &f64, edge: &Edge) -> Result<Option<f64>, ProgramFailure> {
        if !self.weighted {
            return Ok(Some(dist + 1.0));
        }
        let weight = edge.attributes.first().and_then(AttributeValue::as_f64).unwrap_or(f64::NAN);
        if weight.is_nan() || weight < 0.0 {
            return Err(Box::new(NegativeWeight { src: edge.src, dst: edge.dst, weight }));
        }
        Ok(Some(dist + weight))
    }
}

pub fn sssp(view: GraphView<'_>, source: VertexId, config: &SsspConfig) -> Result<SsspResult, AlgorithmError> {
    let scan = match &config.weight {
        None => ScanOptions::structure_only(),
        Some(col) => {
            let types: Vec<String> = view
                .graph()
                .schema()
                .edge_types
                .iter()
                .filter(|(_, cols)| cols.iter().any(|c| &c.col == col && c.ty != AttrType::Str))
                .map(|(name, _)| name.clone())
                .collect();
            if types.is_empty() {
                return Err(AlgorithmError::UnknownWeightColumn(col.clone()));
            }
            ScanOptions { edge_types: Some(types), columns: Some(vec![col.clone()]) }
        }
    };
    let program = Sssp { source, scan, weighted: config.weight.is_some() };
    let max_supersteps = match config.max_supersteps {
        Some(m) => m,
        None => view.vertices()?.len() as u64 + 1,
    };
    let engine = EngineConfig { workers: config.workers, max_supersteps: max_supersteps.max(1) };
    let result = engine::run(&program, view, engine).map_err(|e| match e {
        EngineError::Program { source, superstep } => match source.downcast::<NegativeWeight>() {
            Ok(n) => AlgorithmError::NegativeWeight { src: n.src, dst: n.dst, weight: n.weight },
            Err(source) => AlgorithmError::Engine(EngineError::Program { superstep, source }),
        },
        other => AlgorithmError::Engine(other),
    })?;
    if !result.states.contains_key(&source) {
        return Err(AlgorithmError::UnknownSource(source));
    }
    Ok(SsspResult { distances: result.states, stats: result.stats })
}

/// Sorted ids of every vertex within `k` hops of `seeds`, seeds included.
pub fn k_degree_query(
    view: GraphView<'_>,
    seeds: &[VertexId],
    k: usize,
    opts: TraverseOptions,
) -> Result<Vec<VertexId>, AlgorithmError> {
    let seeds: BTreeSet<VertexId> = seeds.iter().copied().collect();
    if k == 0 {
        return Ok(seeds.into_iter().collect());
    }
    Ok(Traverser::new(view, opts)?.within(&seeds, k)?.into_iter().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    fn accepts(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Lt => ord.is_lt(),
            CmpOp::Le => ord.is_le(),
            CmpOp::Eq => ord.is_eq(),
            CmpOp::Ne => ord.is_ne(),
            CmpOp::Ge => ord.is_ge(),
            CmpOp::Gt => ord.is_gt(),
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// `attr op value`, tested against a vertex attribute's value in a view.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexPredicate {
    pub attr: String,
    pub op: CmpOp,
    pub value: AttributeValue,
}

impl VertexPredicate {
    pub fn new(attr: impl Into<String>, op: CmpOp, value: AttributeValue) -> Self {
        Self { attr: attr.into(), op, value }
    }

    /// Absent values, and strings compared with numbers, never match.
    pub fn matches(&self, actual: Option<&AttributeValue>) -> bool {
        let Some(actual) = actual else { return false };
        let ord = match (actual, &self.value) {
            (AttributeValue::Str(a), AttributeValue::Str(b)) => Some(a.cmp(b)),
            (a, b) => a.as_f64().zip(b.as_f64()).and_then(|(a, b)| a.partial_cmp(&b)),
        };
        ord.is_some_and(|o| self.op.accepts(o))
    }
}

impl FromStr for VertexPredicate {
    type Err = AlgorithmError;

    /// Parses `name<op>value`, e.g. `age>16` or `city=Paris`. Numeric
    /// values become doubles, anything else a string.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlgorithmError::BadPredicate(s.to_owned());
        let at = s.find(['<', '>', '=', '!']).ok_or_else(bad)?;
        let (attr, rest) = s.split_at(at);
        let (op, value) = [
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("!=", CmpOp::Ne),
            ("==", CmpOp::Eq),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
            ("=", CmpOp::Eq),
        ]
        .into_iter()
        .find_map(|(sym, op)| rest.strip_prefix(sym).map(|v| (op, v)))
        .ok_or_else(bad)?;
        let (attr, value) = (attr.trim(), value.trim());
        if attr.is_empty() || value.is_empty() || value.starts_with(['<', '>', '=', '!']) {
            return Err(bad());
        }
        let value = match value.parse::<f64>() {
            Ok(v) => AttributeValue::Double(v),
            Err(_) => AttributeValue::Str(value.to_owned()),
        };
        Ok(Self { attr: attr.to_owned(), op, value })
    }
}

impl fmt::Display for VertexPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.attr, self.op.symbol(), self.value)
    }
}

/// For each seed whose attribute passes `predicate` at the end of the
/// view, the number of distinct neighbors one hop away in the view.
/// Seeds that fail are left out.
pub fn filtered_neighbor_count(
    view: GraphView<'_>,
    seeds: &[VertexId],
    predicate: &VertexPredicate,
    opts: TraverseOptions,
) -> Result<BTreeMap<VertexId, u64>, AlgorithmError> {
    if view.graph().schema().vertex_attr(&predicate.attr).is_none() {
        return Err(AlgorithmError::UnknownAttribute(predicate.attr.clone()));
    }
    let mut passing = BTreeSet::new();
    for &s in seeds {
        if predicate.matches(view.attribute_at(s, &predicate.attr)?.as_ref()) {
            passing.insert(s);
        }
    }
    if passing.is_empty() {
        return Ok(BTreeMap::new());
    }
    let neighbors = Traverser::new(view, opts)?.neighbors(&passing)?;
    Ok(passing
        .into_iter()
        .map(|s| (s, neighbors.get(&s).map_or(0, |n| n.len() as u64)))
        .collect())
}
