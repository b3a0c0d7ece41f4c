//! Vertex-centric BSP runtime and edge-stream traversal.
//!
//! Vertex state lives in memory, split by vertex partition; edges are only
//! ever streamed from the store, block by block, when a superstep needs to
//! send messages along them.

mod bsp;
mod program;
mod shuffle;
mod traverse;

use std::fmt;

use crate::model::VertexId;
use crate::store::StoreError;

pub use bsp::{run, EngineConfig, RunResult, RunStats, SuperstepStats};
pub use program::{Aggregator, Context, ProgramFailure, VertexInfo, VertexProgram};
pub use shuffle::{shuffle, MessageBatch};
pub use traverse::{traverse, EdgePredicate, TraverseOptions, Traverser};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Out,
    In,
    Both,
}

impl Direction {
    /// Whether a route entry with `role` can hold edges to follow.
    pub fn follows(self, role: crate::model::RoleFlag) -> bool {
        match self {
            Direction::Out => role.has_src(),
            Direction::In => role.has_dst(),
            Direction::Both => true,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "out" => Ok(Direction::Out),
            "in" => Ok(Direction::In),
            "both" => Ok(Direction::Both),
            other => Err(EngineError::UnknownDirection(other.to_owned())),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Out => "out",
            Direction::In => "in",
            Direction::Both => "both",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("program failed at superstep {superstep}: {source}")]
    Program {
        superstep: u64,
        #[source]
        source: ProgramFailure,
    },
    #[error("superstep {superstep}: message to vertex {vertex}, which is not in the view")]
    UnknownVertex { superstep: u64, vertex: VertexId },
    #[error("unknown direction {0:?} (expected out, in or both)")]
    UnknownDirection(String),
    #[error("invalid engine configuration: {0}")]
    Config(String),
}
