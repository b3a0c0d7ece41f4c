//! A hand-written vertex program: label propagation for connected
//! components, with a min combiner and a counter aggregator.

use std::sync::Arc;

use tsgraph::engine::{run, Aggregator, Context, Direction, EngineConfig, ProgramFailure, VertexInfo, VertexProgram};
use tsgraph::model::{Edge, GraphSchema, VertexId};
use tsgraph::partition::PartitionLayout;
use tsgraph::store::{CodecConfig, Graph, GraphWriter, LocalFs};

struct Components;

impl VertexProgram for Components {
    type State = VertexId;
    type Message = VertexId;

    fn init(&self, info: &VertexInfo) -> VertexId {
        info.id
    }

    fn compute(&self, ctx: &mut Context<'_, VertexId>, label: &mut VertexId, messages: &[VertexId]) -> Result<(), ProgramFailure> {
        let best = messages.iter().copied().min().unwrap_or(*label);
        if ctx.superstep() == 0 || best < *label {
            *label = best.min(*label);
            ctx.aggregate(0, 1.0);
            ctx.send_along_edges(*label);
        }
        ctx.vote_to_halt();
        Ok(())
    }

    fn combine(&self, a: &VertexId, b: &VertexId) -> Option<VertexId> {
        Some(*a.min(b))
    }

    fn direction(&self) -> Direction {
        Direction::Both
    }

    fn aggregators(&self) -> Vec<Aggregator> {
        vec![Aggregator::Sum]
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut w = GraphWriter::create(Arc::new(LocalFs::new(dir.path())), GraphSchema::new("g").with_edge_type("e", vec![]), PartitionLayout::new(2, 2)?, CodecConfig::default())?;
    for (i, (s, d)) in [(1, 2), (3, 2), (4, 5), (6, 5), (7, 7), (8, 9), (9, 10)].into_iter().enumerate() {
        w.add_edge(Edge::new(s, d, "e", 1_700_000_000_000 + i as u64, vec![]))?;
    }
    w.finish()?;
    let g = Graph::open_local(dir.path(), "g")?;

    let result = run(&Components, g.full(), EngineConfig { workers: 2, max_supersteps: 50 })?;
    for (v, label) in &result.states {
        println!("{v}\tcomponent {label}");
    }
    for (s, step) in result.stats.per_superstep.iter().enumerate() {
        println!("superstep {s}: {} messages sent, {} delivered", step.messages_sent, step.messages_delivered);
    }
    Ok(())
}
