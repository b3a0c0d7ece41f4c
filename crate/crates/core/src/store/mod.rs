//! On-disk graph storage: block files, edge partitions, vertex partitions,
//! the graph manifest and time-bounded read views.

pub mod backend;
pub mod bloom;
pub mod edge;
pub mod format;
pub mod graph;
pub mod index;
pub mod manifest;
pub mod vertex;
pub mod writer;

use std::io;

use crate::codec::CodecError;
use crate::model::{Timestamp, VertexId, Violation, MAX_TIMESTAMP};
use crate::partition::LayoutError;

pub use backend::{InstrumentedBackend, IoCounters, IoSnapshot, LocalFs, StorageBackend};
pub use bloom::BloomFilter;
pub use edge::{EdgeFilter, EdgePartitionReader, EdgePartitionStats, G2l};
pub use format::{BlockCounters, BlockStats, FileKind, FileReader, FileStats};
pub use graph::{Graph, GraphView, ScanOptions};
pub use index::{BlockIndex, BlockKey, IndexKind};
pub use manifest::{CodecConfig, EdgeDir, GraphManifest};
pub use vertex::{AttributeHistory, RouteEntry, VertexRecord};
pub use writer::{GraphWriter, IngestSummary};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("corrupt file {path}: {reason}")]
    CorruptFile { path: String, reason: String },
    #[error("input not sorted at record {index}")]
    UnsortedInput { index: usize },
    #[error("edge {src}->{dst}@{timestamp} belongs to partition {actual}, not {expected}")]
    PartitionMismatch { src: VertexId, dst: VertexId, timestamp: Timestamp, expected: u32, actual: u32 },
    #[error("duplicate vertex id {0}")]
    DuplicateId(VertexId),
    #[error("unknown vertex attribute {0:?}")]
    UnknownAttribute(String),
    #[error("unknown edge type {0:?}")]
    UnknownEdgeType(String),
    #[error("edge type {edge_type:?} has no column {column:?}")]
    UnknownColumn { edge_type: String, column: String },
    #[error("graph {0:?} already exists")]
    GraphExists(String),
    #[error("graph {0:?} not found or not committed")]
    GraphNotFound(String),
    #[error("invalid record: {0}")]
    Invalid(#[from] Violation),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("manifest: {0}")]
    Manifest(String),
}

impl StoreError {
    pub(crate) fn corrupt(path: &str, reason: &str) -> Self {
        StoreError::CorruptFile { path: path.to_owned(), reason: reason.to_owned() }
    }
}

pub const MILLIS_PER_DAY: u64 = 86_400_000;

/// UTC calendar date of `t` as `YYYY-MM-DD`.
pub fn date_of(t: Timestamp) -> String {
    let t = t.min(MAX_TIMESTAMP);
    let dt = chrono::DateTime::from_timestamp_millis(t as i64).expect("timestamp within calendar range");
    dt.format("%Y-%m-%d").to_string()
}

/// First millisecond of a `YYYY-MM-DD` date.
pub fn day_start(date: &str) -> Option<Timestamp> {
    let d = chrono::NaiveDate::parse_from_str(date, "%Y-%m-%d").ok()?;
    let ms = d.and_hms_opt(0, 0, 0)?.and_utc().timestamp_millis();
    u64::try_from(ms).ok()
}

pub(crate) mod paths {
    pub fn manifest(graph: &str) -> String {
        format!("{graph}/manifest.json")
    }

    pub fn edge_dir(graph: &str, date: &str, edge_type: &str, pid: u32) -> String {
        format!("{graph}/dt={date}/{edge_type}/part-{pid}")
    }

    pub fn vertex_dir(graph: &str, vpid: u32) -> String {
        format!("{graph}/vertex/part-{vpid}")
    }

    pub fn attr_file(dir: &str, name: &str) -> String {
        format!("{dir}/attr.{name}.tgf")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dates_are_utc() {
        assert_eq!(date_of(1), "1970-01-01");
        assert_eq!(date_of(MILLIS_PER_DAY - 1), "1970-01-01");
        assert_eq!(date_of(MILLIS_PER_DAY), "1970-01-02");
        assert_eq!(date_of(1_700_000_000_000), "2023-11-14");
        assert_eq!(date_of(MAX_TIMESTAMP), "9999-12-31");
        assert_eq!(day_start("1970-01-02"), Some(MILLIS_PER_DAY));
        assert_eq!(day_start("2023-11-14").map(date_of).as_deref(), Some("2023-11-14"));
        assert_eq!(day_start("nope"), None);
    }
}
