//! Vertex and edge placement.
//!
//! Edge partitions form an `n × n` matrix. The row is a hash of the source
//! id and the column a hash of the destination id together with the hour
//! bucket of the timestamp, so all out-edges of a vertex stay inside one row
//! (at most `n` partitions) and, within one hour, its edges in either role
//! touch at most `2n - 1` partitions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{hour_bucket, Edge, Timestamp, VertexId};

/// Route entries reserve 30 bits for the edge partition id.
pub const MAX_EDGE_PARTITIONS: u64 = 1 << 30;

const DEFAULT_ROW_SEED: u64 = 0x243f_6a88_85a3_08d3;
const DEFAULT_COL_SEED: u64 = 0x1319_8a2e_0370_7344;
const VERTEX_SALT: u64 = 0xa409_3822_299f_31d0;
const HOUR_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LayoutError {
    #[error("matrix side n must be at least 1")]
    ZeroSide,
    #[error("vertex partition count must be at least 1")]
    ZeroVertexPartitions,
    #[error("n = {0} gives more than 2^30 edge partitions")]
    TooManyPartitions(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgePartitionId(pub u32);

impl EdgePartitionId {
    pub fn from_cell(row: u32, col: u32, n: u32) -> Self {
        EdgePartitionId(row * n + col)
    }

    pub fn row(self, n: u32) -> u32 {
        self.0 / n
    }

    pub fn col(self, n: u32) -> u32 {
        self.0 % n
    }
}

impl std::fmt::Display for EdgePartitionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionLayout {
    pub n: u32,
    pub vertex_partitions: u32,
    pub row_seed: u64,
    pub col_seed: u64,
}

impl Default for PartitionLayout {
    fn default() -> Self {
        Self { n: 4, vertex_partitions: 4, row_seed: DEFAULT_ROW_SEED, col_seed: DEFAULT_COL_SEED }
    }
}

impl PartitionLayout {
    pub fn new(n: u32, vertex_partitions: u32) -> Result<Self, LayoutError> {
        Self::with_seeds(n, vertex_partitions, DEFAULT_ROW_SEED, DEFAULT_COL_SEED)
    }

    pub fn with_seeds(n: u32, vertex_partitions: u32, row_seed: u64, col_seed: u64) -> Result<Self, LayoutError> {
        let layout = Self { n, vertex_partitions, row_seed, col_seed };
        layout.check()?;
        Ok(layout)
    }

    pub fn check(&self) -> Result<(), LayoutError> {
        if self.n == 0 {
            return Err(LayoutError::ZeroSide);
        }
        if self.vertex_partitions == 0 {
            return Err(LayoutError::ZeroVertexPartitions);
        }
        if u64::from(self.n) * u64::from(self.n) > MAX_EDGE_PARTITIONS {
            return Err(LayoutError::TooManyPartitions(self.n));
        }
        Ok(())
    }

    pub fn edge_partition_count(&self) -> u32 {
        self.n * self.n
    }

    pub fn vertex_partition(&self, vertex: VertexId) -> u32 {
        (mix64(vertex ^ self.row_seed ^ VERTEX_SALT) % u64::from(self.vertex_partitions)) as u32
    }

    #[inline]
    pub fn row_of(&self, src: VertexId) -> u32 {
        (mix64(src ^ self.row_seed) % u64::from(self.n)) as u32
    }

    #[inline]
    pub fn col_of(&self, dst: VertexId, timestamp: Timestamp) -> u32 {
        let h = mix64(dst ^ self.col_seed) ^ hour_bucket(timestamp).wrapping_mul(HOUR_SALT);
        (mix64(h) % u64::from(self.n)) as u32
    }

    pub fn edge_partition(&self, src: VertexId, dst: VertexId, timestamp: Timestamp) -> EdgePartitionId {
        EdgePartitionId::from_cell(self.row_of(src), self.col_of(dst, timestamp), self.n)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexScatter {
    /// Distinct partitions holding edges where the vertex is the source.
    pub as_src: usize,
    /// Distinct partitions holding edges where the vertex is the destination.
    pub as_dst: usize,
    /// Distinct partitions holding edges incident to the vertex in either role.
    pub union: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScatterReport {
    pub per_vertex: BTreeMap<VertexId, VertexScatter>,
    /// Edge count per edge partition id.
    pub load: Vec<u64>,
}

impl ScatterReport {
    pub fn is_empty(&self) -> bool {
        self.per_vertex.is_empty()
    }

    pub fn max_src_scatter(&self) -> usize {
        self.per_vertex.values().map(|s| s.as_src).max().unwrap_or(0)
    }

    pub fn max_union_scatter(&self) -> usize {
        self.per_vertex.values().map(|s| s.union).max().unwrap_or(0)
    }

    /// Largest partition load divided by the mean load (1.0 is perfect balance).
    pub fn max_over_mean_load(&self) -> f64 {
        let total: u64 = self.load.iter().sum();
        if total == 0 {
            return 0.0;
        }
        let mean = total as f64 / self.load.len() as f64;
        *self.load.iter().max().expect("non-empty") as f64 / mean
    }
}

pub fn scatter_report<'a>(edges: impl IntoIterator<Item = &'a Edge>, layout: &PartitionLayout) -> ScatterReport {
    let mut roles: BTreeMap<VertexId, (BTreeSet<u32>, BTreeSet<u32>)> = BTreeMap::new();
    let mut load = vec![0u64; layout.edge_partition_count() as usize];
    let mut any = false;
    for e in edges {
        any = true;
        let pid = layout.edge_partition(e.src, e.dst, e.timestamp).0;
        load[pid as usize] += 1;
        roles.entry(e.src).or_default().0.insert(pid);
        roles.entry(e.dst).or_default().1.insert(pid);
    }
    if !any {
        return ScatterReport::default();
    }
    let per_vertex = roles
        .into_iter()
        .map(|(v, (src, dst))| {
            let union = src.union(&dst).count();
            (v, VertexScatter { as_src: src.len(), as_dst: dst.len(), union })
        })
        .collect();
    ScatterReport { per_vertex, load }
}
