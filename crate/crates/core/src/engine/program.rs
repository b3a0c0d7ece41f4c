use crate::model::{Edge, VertexId};
use crate::store::ScanOptions;

use super::Direction;

/// Error raised by user code; aborts the run.
pub type ProgramFailure = Box<dyn std::error::Error + Send + Sync>;

/// Per-vertex facts computed from the view before superstep 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VertexInfo {
    pub id: VertexId,
    /// Distinct out-neighbors.
    pub out_degree: u64,
    /// Distinct in-neighbors.
    pub in_degree: u64,
    /// Out-edges counted with multiplicity.
    pub out_edges: u64,
}

/// How per-vertex contributions to a global value are folded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregator {
    Sum,
    Max,
    Min,
}

impl Aggregator {
    pub(crate) fn identity(self) -> f64 {
        match self {
            Aggregator::Sum => 0.0,
            Aggregator::Max => f64::NEG_INFINITY,
            Aggregator::Min => f64::INFINITY,
        }
    }

    pub(crate) fn fold(self, acc: f64, v: f64) -> f64 {
        match self {
            Aggregator::Sum => acc + v,
            Aggregator::Max => acc.max(v),
            Aggregator::Min => acc.min(v),
        }
    }
}

/// A vertex program in the Pregel style. `compute` runs for every active
/// vertex once per superstep and sees the messages sent to it during the
/// previous superstep.
pub trait VertexProgram: Sync {
    type State: Clone + Send + Sync;
    type Message: Clone + Send + Sync;

    fn init(&self, info: &VertexInfo) -> Self::State;

    fn compute(
        &self,
        ctx: &mut Context<'_, Self::Message>,
        state: &mut Self::State,
        messages: &[Self::Message],
    ) -> Result<(), ProgramFailure>;

    /// Merges two messages bound for the same vertex, or `None` to keep
    /// both. Must be associative and commutative when it merges.
    fn combine(&self, _a: &Self::Message, _b: &Self::Message) -> Option<Self::Message> {
        None
    }

    /// Edges followed by [`Context::send_along_edges`].
    fn direction(&self) -> Direction {
        Direction::Out
    }

    /// Edge types and columns read when sending along edges.
    fn edge_scan(&self) -> ScanOptions {
        ScanOptions::structure_only()
    }

    /// Message delivered across `edge` for a broadcast `msg`; `None` drops it.
    fn along_edge(&self, msg: &Self::Message, _edge: &Edge) -> Result<Option<Self::Message>, ProgramFailure> {
        Ok(Some(msg.clone()))
    }

    /// Treat repeated edges between the same pair as one link when sending
    /// along edges.
    fn distinct_links(&self) -> bool {
        false
    }

    fn aggregators(&self) -> Vec<Aggregator> {
        Vec::new()
    }

    /// Called after each superstep with that superstep's aggregates;
    /// returning `true` ends the run.
    fn halt(&self, _superstep: u64, _aggregates: &[f64]) -> bool {
        false
    }
}

/// What `compute` can see and do.
pub struct Context<'a, M> {
    pub(crate) superstep: u64,
    pub(crate) info: &'a VertexInfo,
    pub(crate) num_vertices: u64,
    pub(crate) previous: &'a [f64],
    pub(crate) outbox: &'a mut Vec<(VertexId, M)>,
    pub(crate) broadcast: Option<M>,
    pub(crate) contributions: &'a mut Vec<(usize, f64)>,
    pub(crate) halted: bool,
}

impl<M> Context<'_, M> {
    pub fn superstep(&self) -> u64 {
        self.superstep
    }

    pub fn vertex(&self) -> VertexId {
        self.info.id
    }

    pub fn info(&self) -> &VertexInfo {
        self.info
    }

    /// Vertices in the view.
    pub fn num_vertices(&self) -> u64 {
        self.num_vertices
    }

    /// Aggregate `slot` from the previous superstep, if there was one.
    pub fn previous_aggregate(&self, slot: usize) -> Option<f64> {
        self.previous.get(slot).copied()
    }

    pub fn send(&mut self, to: VertexId, msg: M) {
        self.outbox.push((to, msg));
    }

    /// Sends `msg` across every edge of this vertex in the program's
    /// direction. A second call in the same superstep replaces the first.
    pub fn send_along_edges(&mut self, msg: M) {
        self.broadcast = Some(msg);
    }

    pub fn aggregate(&mut self, slot: usize, value: f64) {
        self.contributions.push((slot, value));
    }

    pub fn vote_to_halt(&mut self) {
        self.halted = true;
    }
}
