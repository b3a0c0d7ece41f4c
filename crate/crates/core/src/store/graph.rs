//! Read side of a committed graph and its time-bounded views.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use crate::model::{AttributeValue, ColumnDef, Edge, GraphSchema, TimeRange, Timestamp, VertexId};
use crate::partition::PartitionLayout;

use super::backend::{LocalFs, StorageBackend};
use super::edge::{EdgeFilter, EdgePartitionReader};
use super::format::BlockCounters;
use super::manifest::GraphManifest;
use super::vertex::{read_all_routes, read_attribute, read_routes, AttributeHistory, RouteEntry};
use super::{day_start, paths, StoreError, MILLIS_PER_DAY};

/// Which edge types and attribute columns a scan touches.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanOptions {
    /// `None` scans every edge type.
    pub edge_types: Option<Vec<String>>,
    /// `None` materializes every column of each edge type.
    pub columns: Option<Vec<String>>,
}

impl ScanOptions {
    /// No attribute columns at all.
    pub fn structure_only() -> Self {
        Self { edge_types: None, columns: Some(Vec::new()) }
    }
}

pub struct Graph {
    backend: Arc<dyn StorageBackend>,
    manifest: GraphManifest,
    counters: Arc<BlockCounters>,
}

impl Graph {
    /// Opens a committed graph; fails if the manifest is missing.
    pub fn open(backend: Arc<dyn StorageBackend>, graph_id: &str) -> Result<Self, StoreError> {
        let manifest = GraphManifest::load(&*backend, graph_id)?;
        Ok(Self { backend, manifest, counters: Arc::default() })
    }

    pub fn open_local(root: impl AsRef<Path>, graph_id: &str) -> Result<Self, StoreError> {
        Self::open(Arc::new(LocalFs::new(root.as_ref())), graph_id)
    }

    pub fn manifest(&self) -> &GraphManifest {
        &self.manifest
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.manifest.schema
    }

    pub fn layout(&self) -> &PartitionLayout {
        &self.manifest.layout
    }

    pub fn backend(&self) -> &Arc<dyn StorageBackend> {
        &self.backend
    }

    pub fn counters(&self) -> &Arc<BlockCounters> {
        &self.counters
    }

    pub fn view(&self, range: TimeRange) -> GraphView<'_> {
        GraphView { graph: self, range }
    }

    /// The graph state at `t`: edges with timestamp ≤ t.
    pub fn at(&self, t: Timestamp) -> GraphView<'_> {
        self.view(TimeRange::up_to(t))
    }

    pub fn full(&self) -> GraphView<'_> {
        self.view(TimeRange::ALL)
    }

    /// Edge partition ids that hold at least one file.
    pub fn edge_partitions(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.manifest.edge_dirs.iter().flat_map(|d| d.pids.iter().copied()).collect();
        set.into_iter().collect()
    }

    fn vertex_attr(&self, name: &str) -> Result<&ColumnDef, StoreError> {
        self.schema().vertex_attr(name).ok_or_else(|| StoreError::UnknownAttribute(name.to_owned()))
    }

    fn group_by_vpid(&self, ids: &[VertexId]) -> BTreeMap<u32, Vec<VertexId>> {
        let mut groups: BTreeMap<u32, Vec<VertexId>> = BTreeMap::new();
        for &id in ids {
            groups.entry(self.layout().vertex_partition(id)).or_default().push(id);
        }
        for g in groups.values_mut() {
            g.sort_unstable();
            g.dedup();
        }
        groups
    }

    /// Route lists of `ids`; ids without a vertex record map to empty lists.
    pub fn resolve_routes(&self, ids: &[VertexId]) -> Result<BTreeMap<VertexId, Vec<RouteEntry>>, StoreError> {
        let mut out: BTreeMap<VertexId, Vec<RouteEntry>> = ids.iter().map(|&id| (id, Vec::new())).collect();
        for (vpid, group) in self.group_by_vpid(ids) {
            let dir = paths::vertex_dir(&self.manifest.graph_id, vpid);
            out.extend(read_routes(&*self.backend, &dir, &group, &self.counters)?);
        }
        Ok(out)
    }

    /// The subset of `ids` that have a vertex record.
    pub fn known_vertices(&self, ids: &[VertexId]) -> Result<BTreeSet<VertexId>, StoreError> {
        let mut out = BTreeSet::new();
        for (vpid, group) in self.group_by_vpid(ids) {
            let dir = paths::vertex_dir(&self.manifest.graph_id, vpid);
            out.extend(read_routes(&*self.backend, &dir, &group, &self.counters)?.into_keys());
        }
        Ok(out)
    }

    /// Every vertex's route list, loaded partition by partition.
    pub fn load_all_routes(&self) -> Result<HashMap<VertexId, Vec<RouteEntry>>, StoreError> {
        let mut out = HashMap::new();
        for vpid in 0..self.layout().vertex_partitions {
            let dir = paths::vertex_dir(&self.manifest.graph_id, vpid);
            out.extend(read_all_routes(&*self.backend, &dir, &self.counters)?);
        }
        Ok(out)
    }

    pub fn attribute_histories(
        &self,
        ids: &[VertexId],
        name: &str,
    ) -> Result<BTreeMap<VertexId, AttributeHistory>, StoreError> {
        let attr = self.vertex_attr(name)?;
        let mut out = BTreeMap::new();
        for (vpid, group) in self.group_by_vpid(ids) {
            let dir = paths::vertex_dir(&self.manifest.graph_id, vpid);
            out.extend(read_attribute(&*self.backend, &dir, attr, &group, &self.counters)?);
        }
        Ok(out)
    }

    pub fn attribute_history(&self, id: VertexId, name: &str) -> Result<AttributeHistory, StoreError> {
        Ok(self.attribute_histories(&[id], name)?.remove(&id).unwrap_or_default())
    }

    /// Latest version of `name` at or before `t`.
    pub fn attribute_at(&self, id: VertexId, name: &str, t: Timestamp) -> Result<Option<AttributeValue>, StoreError> {
        Ok(self.attribute_history(id, name)?.at(t).cloned())
    }
}

/// A read view limited to edges inside a time range. Creating one copies
/// nothing; the range is applied while blocks are scanned.
#[derive(Clone, Copy)]
pub struct GraphView<'g> {
    graph: &'g Graph,
    range: TimeRange,
}

impl<'g> GraphView<'g> {
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn range(&self) -> TimeRange {
        self.range
    }

    /// Directories of partition `pid` whose date overlaps the view.
    fn dirs(&self, pid: u32, opts: &ScanOptions) -> Vec<(String, &'g str)> {
        let m = &self.graph.manifest;
        m.edge_dirs
            .iter()
            .filter(|d| d.pids.binary_search(&pid).is_ok())
            .filter(|d| opts.edge_types.as_ref().is_none_or(|t| t.contains(&d.edge_type)))
            .filter(|d| {
                let Some(start) = day_start(&d.date) else { return true };
                start <= self.range.end && start.saturating_add(MILLIS_PER_DAY - 1) >= self.range.start
            })
            .map(|d| (paths::edge_dir(&m.graph_id, &d.date, &d.edge_type, pid), d.edge_type.as_str()))
            .collect()
    }

    /// Streams the view's edges in partition `pid`, one block at a time.
    pub fn scan_partition(
        &self,
        pid: u32,
        filter: &EdgeFilter,
        opts: &ScanOptions,
        mut visit: impl FnMut(&[Edge]),
    ) -> Result<(), StoreError> {
        for (dir, edge_type) in self.dirs(pid, opts) {
            let columns = self
                .graph
                .schema()
                .edge_columns(edge_type)
                .ok_or_else(|| StoreError::UnknownEdgeType(edge_type.to_owned()))?;
            let mut reader = EdgePartitionReader::open(
                &*self.graph.backend,
                &dir,
                edge_type,
                columns,
                opts.columns.as_deref(),
                filter.clone(),
                self.range,
                Arc::clone(&self.graph.counters),
            )?;
            while let Some(block) = reader.next_block()? {
                visit(&block);
            }
        }
        Ok(())
    }

    /// Edges of partition `pid` ordered by (src, dst, timestamp).
    pub fn read_edges(&self, pid: u32, filter: &EdgeFilter, opts: &ScanOptions) -> Result<Vec<Edge>, StoreError> {
        let mut out = Vec::new();
        self.scan_partition(pid, filter, opts, |b| out.extend_from_slice(b))?;
        sort_edges(&mut out);
        Ok(out)
    }

    /// Every edge in the view ordered by (src, dst, timestamp).
    pub fn read_all_edges(&self, opts: &ScanOptions) -> Result<Vec<Edge>, StoreError> {
        let mut out = Vec::new();
        for pid in self.graph.edge_partitions() {
            self.scan_partition(pid, &EdgeFilter::All, opts, |b| out.extend_from_slice(b))?;
        }
        sort_edges(&mut out);
        Ok(out)
    }

    /// Endpoints of the view's edges.
    pub fn vertices(&self) -> Result<BTreeSet<VertexId>, StoreError> {
        let mut out = BTreeSet::new();
        let opts = ScanOptions::structure_only();
        for pid in self.graph.edge_partitions() {
            self.scan_partition(pid, &EdgeFilter::All, &opts, |b| {
                for e in b {
                    out.insert(e.src);
                    out.insert(e.dst);
                }
            })?;
        }
        Ok(out)
    }

    /// Attribute value as of the end of the view.
    pub fn attribute_at(&self, id: VertexId, name: &str) -> Result<Option<AttributeValue>, StoreError> {
        self.graph.attribute_at(id, name, self.range.end)
    }
}

fn sort_edges(edges: &mut [Edge]) {
    edges.sort_by(|a, b| {
        (a.src, a.dst, a.timestamp, &a.edge_type, &a.attributes).cmp(&(b.src, b.dst, b.timestamp, &b.edge_type, &b.attributes))
    });
}
