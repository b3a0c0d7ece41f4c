//! `manifest.json`: the graph's schema, layout and codec settings plus the
//! inventory of edge partition directories. It is written last, so its
//! presence marks the graph as committed.

use serde::{Deserialize, Serialize};

use crate::codec::GeneralCodec;
use crate::model::GraphSchema;
use crate::partition::PartitionLayout;

use super::backend::StorageBackend;
use super::format::FORMAT_VERSION;
use super::index::IndexKind;
use super::{paths, StoreError};

pub const DEFAULT_BLOCK_TARGET_BYTES: usize = 64 * 1024;
pub const DEFAULT_BLOOM_FP: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub general: GeneralCodec,
    /// Target uncompressed size of one block.
    pub block_target_bytes: usize,
    /// Index kind of `struct.tgf` files. Vertex files always use ranges.
    pub struct_index: IndexKind,
    pub bloom_fp: f64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            general: GeneralCodec::Zstd,
            block_target_bytes: DEFAULT_BLOCK_TARGET_BYTES,
            struct_index: IndexKind::Range,
            bloom_fp: DEFAULT_BLOOM_FP,
        }
    }
}

/// One `dt=<date>/<edge_type>` directory and the partitions written in it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDir {
    pub date: String,
    pub edge_type: String,
    pub pids: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphManifest {
    pub graph_id: String,
    pub format_version: u16,
    pub schema: GraphSchema,
    pub layout: PartitionLayout,
    pub codecs: CodecConfig,
    /// Sorted by (date, edge type).
    pub edge_dirs: Vec<EdgeDir>,
}

impl GraphManifest {
    pub fn new(schema: GraphSchema, layout: PartitionLayout, codecs: CodecConfig) -> Self {
        Self {
            graph_id: schema.graph_id.clone(),
            format_version: FORMAT_VERSION,
            schema,
            layout,
            codecs,
            edge_dirs: Vec::new(),
        }
    }

    pub fn load(backend: &dyn StorageBackend, graph_id: &str) -> Result<Self, StoreError> {
        let path = paths::manifest(graph_id);
        if !backend.exists(&path) {
            return Err(StoreError::GraphNotFound(graph_id.to_owned()));
        }
        let mut text = String::new();
        std::io::Read::read_to_string(&mut backend.open(&path)?, &mut text)?;
        let m: GraphManifest = serde_json::from_str(&text).map_err(|e| StoreError::Manifest(e.to_string()))?;
        if m.format_version != FORMAT_VERSION {
            return Err(StoreError::Manifest(format!("unsupported format version {}", m.format_version)));
        }
        if m.graph_id != graph_id || m.schema.graph_id != graph_id {
            return Err(StoreError::Manifest(format!("manifest describes graph {:?}", m.graph_id)));
        }
        m.layout.check()?;
        Ok(m)
    }

    pub fn store(&self, backend: &dyn StorageBackend) -> Result<(), StoreError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| StoreError::Manifest(e.to_string()))?;
        backend.create_atomic(&paths::manifest(&self.graph_id), text.as_bytes())?;
        Ok(())
    }
}
