//! Graph ingest: buffers edges and vertex updates, then writes every edge
//! partition, every vertex partition and finally the manifest.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::model::{validate_edge, validate_vertex_update, AttributeValue, Edge, GraphSchema, RoleFlag, Timestamp,
    VertexId, VertexUpdate, Violation};
use crate::partition::{EdgePartitionId, PartitionLayout};

use super::backend::StorageBackend;
use super::edge::{write_edge_partition, EdgePartitionStats};
use super::format::FileStats;
use super::manifest::{CodecConfig, EdgeDir, GraphManifest};
use super::vertex::{write_vertex_partition, AttributeHistory, RouteEntry, VertexRecord};
use super::{date_of, paths, StoreError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSummary {
    pub date: String,
    pub edge_type: String,
    pub pid: u32,
    pub edges: u64,
    pub file_bytes: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestSummary {
    pub edges: u64,
    pub vertices: u64,
    pub edge_partitions: Vec<PartitionSummary>,
    /// File bytes per vertex partition.
    pub vertex_partitions: Vec<u64>,
    pub edge_stats: EdgePartitionStats,
    pub vertex_stats: FileStats,
}

impl IngestSummary {
    /// Column-encoded bytes before general compression.
    pub fn raw_bytes(&self) -> u64 {
        self.edge_stats.total().raw_bytes + self.vertex_stats.raw_bytes
    }

    /// Bytes after general compression.
    pub fn encoded_bytes(&self) -> u64 {
        self.edge_stats.total().encoded_bytes + self.vertex_stats.encoded_bytes
    }

    pub fn file_bytes(&self) -> u64 {
        self.edge_stats.total().file_bytes + self.vertex_stats.file_bytes
    }
}

type PartitionKey = (String, String, u32);

pub struct GraphWriter {
    backend: Arc<dyn StorageBackend>,
    manifest: GraphManifest,
    partitions: BTreeMap<PartitionKey, Vec<Edge>>,
    updates: BTreeMap<VertexId, Vec<(usize, Timestamp, AttributeValue)>>,
    edges: u64,
}

impl GraphWriter {
    /// Starts a new graph. Fails if anything already exists under the
    /// graph id.
    pub fn create(
        backend: Arc<dyn StorageBackend>,
        schema: GraphSchema,
        layout: PartitionLayout,
        codecs: CodecConfig,
    ) -> Result<Self, StoreError> {
        schema.check()?;
        layout.check()?;
        if !(codecs.bloom_fp > 0.0 && codecs.bloom_fp < 1.0) {
            return Err(Violation::new("bloom_fp", "must be in (0, 1)").into());
        }
        if backend.exists(&schema.graph_id) {
            return Err(StoreError::GraphExists(schema.graph_id));
        }
        Ok(Self {
            backend,
            manifest: GraphManifest::new(schema, layout, codecs),
            partitions: BTreeMap::new(),
            updates: BTreeMap::new(),
            edges: 0,
        })
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.manifest.schema
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<(), Violation> {
        validate_edge(&edge, &self.manifest.schema)?;
        let pid = self.manifest.layout.edge_partition(edge.src, edge.dst, edge.timestamp).0;
        let key = (date_of(edge.timestamp), edge.edge_type.clone(), pid);
        self.partitions.entry(key).or_default().push(edge);
        self.edges += 1;
        Ok(())
    }

    pub fn add_vertex_update(&mut self, update: VertexUpdate) -> Result<(), Violation> {
        validate_vertex_update(&update, &self.manifest.schema)?;
        let attr = self.manifest.schema.vertex_attrs.iter().position(|c| c.col == update.attr).expect("validated");
        self.updates.entry(update.vertex).or_default().push((attr, update.timestamp, update.value));
        Ok(())
    }

    pub fn finish(self) -> Result<IngestSummary, StoreError> {
        let Self { backend, mut manifest, partitions, updates, edges } = self;
        let graph = manifest.graph_id.clone();
        let layout = manifest.layout;
        let mut summary = IngestSummary { edges, ..Default::default() };
        let mut roles: HashMap<VertexId, BTreeMap<u32, RoleFlag>> = HashMap::new();
        let mut dirs: BTreeMap<(String, String), Vec<u32>> = BTreeMap::new();

        for ((date, edge_type, pid), mut part) in partitions {
            part.sort();
            for e in &part {
                let r = roles.entry(e.src).or_default().entry(pid).or_insert(RoleFlag::Src);
                *r = r.union(RoleFlag::Src);
                let r = roles.entry(e.dst).or_default().entry(pid).or_insert(RoleFlag::Dst);
                *r = r.union(RoleFlag::Dst);
            }
            let dir = paths::edge_dir(&graph, &date, &edge_type, pid);
            let columns = manifest.schema.edge_columns(&edge_type).expect("validated edge type");
            let stats = write_edge_partition(
                &*backend,
                &dir,
                EdgePartitionId(pid),
                &edge_type,
                columns,
                &part,
                &layout,
                &manifest.codecs,
            )?;
            summary.edge_partitions.push(PartitionSummary {
                date: date.clone(),
                edge_type: edge_type.clone(),
                pid,
                edges: stats.edges,
                file_bytes: stats.total().file_bytes,
            });
            summary.edge_stats += stats;
            dirs.entry((date, edge_type)).or_default().push(pid);
        }

        let vertex_ids: BTreeSet<VertexId> = roles.keys().chain(updates.keys()).copied().collect();
        summary.vertices = vertex_ids.len() as u64;
        let attr_count = manifest.schema.vertex_attrs.len();
        let mut by_partition: Vec<Vec<VertexRecord>> = vec![Vec::new(); layout.vertex_partitions as usize];
        for id in vertex_ids {
            let routes = roles
                .get(&id)
                .map(|m| m.iter().map(|(&pid, &role)| RouteEntry::new(role, pid)).collect())
                .unwrap_or_default();
            let mut per_attr: Vec<Vec<(Timestamp, AttributeValue)>> = vec![Vec::new(); attr_count];
            for (a, t, v) in updates.get(&id).into_iter().flatten() {
                per_attr[*a].push((*t, v.clone()));
            }
            let attrs = per_attr.into_iter().map(AttributeHistory::from_updates).collect();
            by_partition[layout.vertex_partition(id) as usize].push(VertexRecord { id, routes, attrs });
        }
        for (vpid, records) in by_partition.iter().enumerate() {
            let dir = paths::vertex_dir(&graph, vpid as u32);
            let stats =
                write_vertex_partition(&*backend, &dir, &manifest.schema.vertex_attrs, records, &manifest.codecs)?;
            summary.vertex_partitions.push(stats.file_bytes);
            summary.vertex_stats += stats;
        }

        manifest.edge_dirs =
            dirs.into_iter().map(|((date, edge_type), pids)| EdgeDir { date, edge_type, pids }).collect();
        manifest.store(&*backend)?;
        Ok(summary)
    }
}
