//! Edge partition files.
//!
//! One partition directory holds `g2l.tgf`, `struct.tgf` and one
//! `attr.<column>.tgf` per schema column. Edges are grouped into stars (one
//! local source id with its sorted leaves); a star may continue into the
//! next block when it crosses the block size target. Attribute block `i`
//! holds the rows of the leaves in struct block `i`, in leaf order.
//!
//! Struct block layout:
//!
//! ```text
//! varint  star count
//! per star: varint local src, varint leaf count
//! per leaf: varint local dst
//! u64     first leaf timestamp, then zigzag varint deltas between leaves
//! ```

use std::collections::HashSet;
use std::sync::Arc;

use crate::codec::varint::{read_varint, varint_len, write_varint};
use crate::codec::{decode_column, encode_column_auto, unzigzag, zigzag, ColumnCodec, ColumnData, ColumnType};
use crate::model::{AttrType, AttributeValue, ColumnDef, Edge, TimeRange, VertexId, Violation};
use crate::partition::{EdgePartitionId, PartitionLayout};

use super::backend::StorageBackend;
use super::bloom::BloomFilter;
use super::format::{BlockCounters, FileBuilder, FileKind, FileReader, FileStats};
use super::index::{BlockKey, IndexKind};
use super::manifest::CodecConfig;
use super::{paths, StoreError};

/// Which edges of a partition a scan wants, by global endpoint id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum EdgeFilter {
    #[default]
    All,
    Src(HashSet<VertexId>),
    Dst(HashSet<VertexId>),
    /// Either endpoint in the set.
    Either(HashSet<VertexId>),
}

impl EdgeFilter {
    pub fn matches(&self, src: VertexId, dst: VertexId) -> bool {
        match self {
            EdgeFilter::All => true,
            EdgeFilter::Src(s) => s.contains(&src),
            EdgeFilter::Dst(s) => s.contains(&dst),
            EdgeFilter::Either(s) => s.contains(&src) || s.contains(&dst),
        }
    }

    fn ids(&self) -> Option<&HashSet<VertexId>> {
        match self {
            EdgeFilter::All => None,
            EdgeFilter::Src(s) | EdgeFilter::Dst(s) | EdgeFilter::Either(s) => Some(s),
        }
    }
}

/// Global-to-local id map of one partition. Source ids come first in
/// ascending order, so star blocks sorted by global source are also sorted
/// by local source; destination-only ids follow, also ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct G2l {
    globals: Vec<VertexId>,
    src_count: usize,
}

impl G2l {
    /// `edges` must be sorted by source.
    pub fn build(edges: &[Edge]) -> Self {
        let mut globals: Vec<VertexId> = edges.iter().map(|e| e.src).collect();
        globals.dedup();
        let src_count = globals.len();
        let srcs: HashSet<VertexId> = globals.iter().copied().collect();
        let mut dst_only: Vec<VertexId> = edges.iter().map(|e| e.dst).filter(|d| !srcs.contains(d)).collect();
        dst_only.sort_unstable();
        dst_only.dedup();
        globals.extend(dst_only);
        Self { globals, src_count }
    }

    pub fn len(&self) -> usize {
        self.globals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.globals.is_empty()
    }

    pub fn src_count(&self) -> usize {
        self.src_count
    }

    pub fn global(&self, local: u32) -> Option<VertexId> {
        self.globals.get(local as usize).copied()
    }

    pub fn local(&self, global: VertexId) -> Option<u32> {
        let (srcs, rest) = self.globals.split_at(self.src_count);
        if let Ok(i) = srcs.binary_search(&global) {
            return Some(i as u32);
        }
        rest.binary_search(&global).ok().map(|i| (self.src_count + i) as u32)
    }

    pub fn globals(&self) -> &[VertexId] {
        &self.globals
    }
}

/// Size accounting for one written edge partition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgePartitionStats {
    pub edges: u64,
    pub stars: u64,
    pub vertices: u64,
    pub g2l: FileStats,
    pub structure: FileStats,
    pub attrs: FileStats,
    /// Bytes spent on (local) ids inside struct blocks.
    pub local_id_bytes: u64,
    /// Bytes the same star ids would take as 64-bit globals.
    pub global_id_bytes: u64,
}

impl EdgePartitionStats {
    pub fn total(&self) -> FileStats {
        let mut t = self.g2l;
        t += self.structure;
        t += self.attrs;
        t
    }
}

impl std::ops::AddAssign for EdgePartitionStats {
    fn add_assign(&mut self, o: Self) {
        self.edges += o.edges;
        self.stars += o.stars;
        self.vertices += o.vertices;
        self.g2l += o.g2l;
        self.structure += o.structure;
        self.attrs += o.attrs;
        self.local_id_bytes += o.local_id_bytes;
        self.global_id_bytes += o.global_id_bytes;
    }
}

pub(crate) fn default_codec(ty: AttrType) -> ColumnCodec {
    match ty {
        AttrType::Int | AttrType::Long => ColumnCodec::ZigzagVarint,
        AttrType::Double => ColumnCodec::Dfcm,
        AttrType::Str => ColumnCodec::Dict,
    }
}

fn value_size(v: &AttributeValue) -> usize {
    match v {
        AttributeValue::Int(_) => 4,
        AttributeValue::Long(_) | AttributeValue::Double(_) => 8,
        AttributeValue::Str(s) => 1 + s.len(),
    }
}

/// Splits sorted edges into leaf ranges of roughly `target` raw bytes.
fn block_ranges(edges: &[Edge], g2l: &G2l, target: usize) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let (mut start, mut est) = (0, 0usize);
    for (i, e) in edges.iter().enumerate() {
        let new_star = i == start || edges[i - 1].src != e.src;
        let mut cost = varint_len(u64::from(g2l.local(e.dst).unwrap_or(0))) + 3;
        if new_star {
            cost += 2 + varint_len(u64::from(g2l.local(e.src).unwrap_or(0)));
        }
        cost += e.attributes.iter().map(value_size).sum::<usize>();
        if est > 0 && est + cost > target {
            out.push(start..i);
            start = i;
            est = 0;
        }
        est += cost;
    }
    if start < edges.len() {
        out.push(start..edges.len());
    }
    out
}

struct StructBlock {
    bytes: Vec<u8>,
    local_srcs: Vec<u32>,
    local_id_bytes: u64,
    global_id_bytes: u64,
}

fn encode_struct_block(edges: &[Edge], g2l: &G2l) -> StructBlock {
    let mut stars: Vec<(u32, usize)> = Vec::new();
    for e in edges {
        let src = g2l.local(e.src).expect("g2l covers every endpoint");
        match stars.last_mut() {
            Some((s, n)) if *s == src => *n += 1,
            _ => stars.push((src, 1)),
        }
    }
    let mut bytes = Vec::new();
    write_varint(&mut bytes, stars.len() as u64);
    let mut local_id_bytes = 0;
    for &(src, n) in &stars {
        local_id_bytes += varint_len(u64::from(src)) as u64;
        write_varint(&mut bytes, u64::from(src));
        write_varint(&mut bytes, n as u64);
    }
    for e in edges {
        let dst = g2l.local(e.dst).expect("g2l covers every endpoint");
        local_id_bytes += varint_len(u64::from(dst)) as u64;
        write_varint(&mut bytes, u64::from(dst));
    }
    if let Some(first) = edges.first() {
        bytes.extend_from_slice(&first.timestamp.to_le_bytes());
        for w in edges.windows(2) {
            write_varint(&mut bytes, zigzag(w[1].timestamp.wrapping_sub(w[0].timestamp) as i64));
        }
    }
    StructBlock {
        bytes,
        local_srcs: stars.iter().map(|s| s.0).collect(),
        local_id_bytes,
        global_id_bytes: 8 * (stars.len() + edges.len()) as u64,
    }
}

/// Decoded struct block: one entry per leaf.
struct Leaves {
    srcs: Vec<u32>,
    dsts: Vec<u32>,
    timestamps: Vec<u64>,
}

fn decode_struct_block(bytes: &[u8]) -> Result<Leaves, crate::codec::CodecError> {
    use crate::codec::CodecError;
    let mut pos = 0;
    let stars = read_varint(bytes, &mut pos)? as usize;
    if stars > bytes.len() {
        return Err(CodecError::TruncatedStream);
    }
    let mut srcs = Vec::new();
    for _ in 0..stars {
        let src = u32::try_from(read_varint(bytes, &mut pos)?).map_err(|_| CodecError::VarintOverflow)?;
        let n = read_varint(bytes, &mut pos)? as usize;
        if n > bytes.len() {
            return Err(CodecError::TruncatedStream);
        }
        srcs.extend(std::iter::repeat_n(src, n));
    }
    let dsts = (0..srcs.len())
        .map(|_| u32::try_from(read_varint(bytes, &mut pos)?).map_err(|_| CodecError::VarintOverflow))
        .collect::<Result<Vec<_>, _>>()?;
    let mut timestamps = Vec::with_capacity(srcs.len());
    if !srcs.is_empty() {
        let first = bytes.get(pos..pos + 8).ok_or(CodecError::TruncatedStream)?;
        let mut t = u64::from_le_bytes(first.try_into().expect("8 bytes"));
        pos += 8;
        timestamps.push(t);
        for _ in 1..srcs.len() {
            t = t.wrapping_add(unzigzag(read_varint(bytes, &mut pos)?) as u64);
            timestamps.push(t);
        }
    }
    if pos != bytes.len() {
        return Err(CodecError::TrailingBytes);
    }
    Ok(Leaves { srcs, dsts, timestamps })
}

fn edge_key(e: &Edge) -> (VertexId, VertexId, u64) {
    (e.src, e.dst, e.timestamp)
}

/// Writes the files of one edge partition directory. `edges` must be sorted
/// by (src, dst, timestamp), all of `edge_type`, and all hash to `pid`.
#[allow(clippy::too_many_arguments)]
pub fn write_edge_partition(
    backend: &dyn StorageBackend,
    dir: &str,
    pid: EdgePartitionId,
    edge_type: &str,
    columns: &[ColumnDef],
    edges: &[Edge],
    layout: &PartitionLayout,
    codecs: &CodecConfig,
) -> Result<EdgePartitionStats, StoreError> {
    for (i, e) in edges.iter().enumerate() {
        if i > 0 && edge_key(&edges[i - 1]) > edge_key(e) {
            return Err(StoreError::UnsortedInput { index: i });
        }
        let actual = layout.edge_partition(e.src, e.dst, e.timestamp);
        if actual != pid {
            return Err(StoreError::PartitionMismatch {
                src: e.src,
                dst: e.dst,
                timestamp: e.timestamp,
                expected: pid.0,
                actual: actual.0,
            });
        }
        if e.edge_type != edge_type {
            return Err(Violation::new("edge_type", format!("{:?} in a {edge_type:?} partition", e.edge_type)).into());
        }
        if e.attributes.len() != columns.len() {
            return Err(Violation::new("attributes", "does not match the schema").into());
        }
    }
    let g2l = G2l::build(edges);
    if g2l.len() > u32::MAX as usize {
        return Err(Violation::new("g2l", "more than 2^32 vertices in one partition").into());
    }
    let mut stats = EdgePartitionStats { edges: edges.len() as u64, vertices: g2l.len() as u64, ..Default::default() };

    // g2l: ascending runs, split at the source/destination boundary.
    let mut file = FileBuilder::new(FileKind::G2l, ColumnCodec::DeltaTs, codecs.general, IndexKind::Range);
    let per_block = (codecs.block_target_bytes / 8).max(1);
    let (srcs, dsts) = g2l.globals.split_at(g2l.src_count);
    for chunk in srcs.chunks(per_block).chain(dsts.chunks(per_block)) {
        let mut raw = Vec::new();
        encode_column_auto(&mut raw, &ColumnData::U64(chunk.to_vec()))?;
        file.add_block(&raw, BlockKey::Range { min: chunk[0], max: chunk[chunk.len() - 1] })?;
    }
    stats.g2l = file.write(backend, &format!("{dir}/g2l.tgf"))?;

    let ranges = block_ranges(edges, &g2l, codecs.block_target_bytes);

    let mut file = FileBuilder::new(FileKind::Struct, ColumnCodec::Varint, codecs.general, codecs.struct_index);
    for r in &ranges {
        let block = encode_struct_block(&edges[r.clone()], &g2l);
        let key = match codecs.struct_index {
            IndexKind::None => BlockKey::None,
            IndexKind::Range => BlockKey::Range {
                min: u64::from(block.local_srcs[0]),
                max: u64::from(*block.local_srcs.last().expect("non-empty block")),
            },
            IndexKind::Bloom => BlockKey::Bloom(BloomFilter::build(
                block.local_srcs.iter().map(|&s| u64::from(s)),
                block.local_srcs.len(),
                codecs.bloom_fp,
            )),
        };
        stats.stars += block.local_srcs.len() as u64;
        stats.local_id_bytes += block.local_id_bytes;
        stats.global_id_bytes += block.global_id_bytes;
        file.add_block(&block.bytes, key)?;
    }
    stats.structure = file.write(backend, &format!("{dir}/struct.tgf"))?;

    for (c, col) in columns.iter().enumerate() {
        let mut file = FileBuilder::new(FileKind::Attr, default_codec(col.ty), codecs.general, IndexKind::None);
        for r in &ranges {
            let values: Vec<AttributeValue> = edges[r.clone()].iter().map(|e| e.attributes[c].clone()).collect();
            let data = ColumnData::from_values(col.ty, &values).map_err(|_| {
                StoreError::Invalid(Violation::new(format!("attributes[{c}]"), "type does not match the schema"))
            })?;
            let mut raw = Vec::new();
            encode_column_auto(&mut raw, &data)?;
            file.add_block(&raw, BlockKey::None)?;
        }
        stats.attrs += file.write(backend, &paths::attr_file(dir, &col.col))?;
    }
    Ok(stats)
}

/// Streams the edges of one partition directory block by block.
pub struct EdgePartitionReader {
    edge_type: String,
    g2l: Vec<VertexId>,
    structure: Option<FileReader>,
    attrs: Vec<(AttrType, FileReader)>,
    /// Sorted local ids of a source filter, used against the struct index.
    local_srcs: Option<Vec<u32>>,
    filter: EdgeFilter,
    range: TimeRange,
    next: usize,
    counters: Arc<BlockCounters>,
}

impl EdgePartitionReader {
    /// Opens a partition for scanning. `columns` selects and orders the
    /// attribute columns to materialize; `None` reads all of them.
    #[allow(clippy::too_many_arguments)]
    pub fn open(
        backend: &dyn StorageBackend,
        dir: &str,
        edge_type: &str,
        schema_columns: &[ColumnDef],
        columns: Option<&[String]>,
        filter: EdgeFilter,
        range: TimeRange,
        counters: Arc<BlockCounters>,
    ) -> Result<Self, StoreError> {
        let selected: Vec<&ColumnDef> = match columns {
            None => schema_columns.iter().collect(),
            Some(names) => names
                .iter()
                .map(|n| {
                    schema_columns.iter().find(|c| &c.col == n).ok_or_else(|| StoreError::UnknownColumn {
                        edge_type: edge_type.to_owned(),
                        column: n.clone(),
                    })
                })
                .collect::<Result<_, _>>()?,
        };
        let mut reader = Self {
            edge_type: edge_type.to_owned(),
            g2l: Vec::new(),
            structure: None,
            attrs: Vec::new(),
            local_srcs: None,
            filter,
            range,
            next: 0,
            counters,
        };

        let mut g2l_file = FileReader::open(backend, &format!("{dir}/g2l.tgf"), Arc::clone(&reader.counters))?;
        if let Some(ids) = reader.filter.ids() {
            let any = (0..g2l_file.block_count()).any(|b| ids.iter().any(|&id| g2l_file.key(b).may_contain(id)));
            if !any {
                let structure = FileReader::open(backend, &format!("{dir}/struct.tgf"), Arc::clone(&reader.counters))?;
                reader.counters.skipped(structure.block_count() as u64);
                return Ok(reader);
            }
        }
        for b in 0..g2l_file.block_count() {
            let raw = g2l_file.read_block(b)?;
            match decode_column(&raw, ColumnType::U64)? {
                ColumnData::U64(ids) => reader.g2l.extend(ids),
                _ => unreachable!("decoded as U64"),
            }
        }
        if let EdgeFilter::Src(ids) = &reader.filter {
            let map: std::collections::HashMap<VertexId, u32> =
                reader.g2l.iter().enumerate().map(|(i, &g)| (g, i as u32)).collect();
            let mut locals: Vec<u32> = ids.iter().filter_map(|id| map.get(id).copied()).collect();
            locals.sort_unstable();
            reader.local_srcs = Some(locals);
        }
        reader.structure = Some(FileReader::open(backend, &format!("{dir}/struct.tgf"), Arc::clone(&reader.counters))?);
        for col in selected {
            let path = paths::attr_file(dir, &col.col);
            reader.attrs.push((col.ty, FileReader::open(backend, &path, Arc::clone(&reader.counters))?));
        }
        Ok(reader)
    }

    pub fn block_count(&self) -> usize {
        self.structure.as_ref().map_or(0, FileReader::block_count)
    }

    fn block_may_match(&self, key: &BlockKey) -> bool {
        let Some(locals) = &self.local_srcs else { return true };
        match key {
            BlockKey::None => !locals.is_empty(),
            BlockKey::Range { min, max } => {
                let i = locals.partition_point(|&l| u64::from(l) < *min);
                locals.get(i).is_some_and(|&l| u64::from(l) <= *max)
            }
            BlockKey::Bloom(f) => locals.iter().any(|&l| f.contains(u64::from(l))),
        }
    }

    /// Edges of the next block that has any match, or `None` at the end.
    pub fn next_block(&mut self) -> Result<Option<Vec<Edge>>, StoreError> {
        loop {
            let Some(structure) = self.structure.as_ref() else { return Ok(None) };
            if self.next >= structure.block_count() {
                return Ok(None);
            }
            let b = self.next;
            self.next += 1;
            if !self.block_may_match(structure.key(b)) {
                self.counters.skipped(1);
                continue;
            }
            let structure = self.structure.as_mut().expect("checked above");
            let path = structure.path().to_owned();
            let raw = structure.read_block(b)?;
            let leaves = decode_struct_block(&raw)?;
            let global = |l: u32| {
                self.g2l.get(l as usize).copied().ok_or_else(|| StoreError::corrupt(&path, "local id outside g2l"))
            };
            let mut keep = Vec::new();
            for i in 0..leaves.srcs.len() {
                let (src, dst) = (global(leaves.srcs[i])?, global(leaves.dsts[i])?);
                if self.range.contains(leaves.timestamps[i]) && self.filter.matches(src, dst) {
                    keep.push((i, src, dst));
                }
            }
            if keep.is_empty() {
                continue;
            }
            let mut columns = Vec::with_capacity(self.attrs.len());
            for (ty, file) in &mut self.attrs {
                let raw = file.read_block(b)?;
                let values = decode_column(&raw, ColumnType::from(*ty))?.into_values();
                if values.len() != leaves.srcs.len() {
                    return Err(StoreError::corrupt(file.path(), "attribute rows do not match leaves"));
                }
                columns.push(values);
            }
            let edges = keep
                .into_iter()
                .map(|(i, src, dst)| Edge {
                    src,
                    dst,
                    edge_type: self.edge_type.clone(),
                    timestamp: leaves.timestamps[i],
                    attributes: columns.iter().map(|c| c[i].clone()).collect(),
                })
                .collect();
            return Ok(Some(edges));
        }
    }

    pub fn read_all(mut self) -> Result<Vec<Edge>, StoreError> {
        let mut out = Vec::new();
        while let Some(block) = self.next_block()? {
            out.extend(block);
        }
        Ok(out)
    }
}

/// Directory of partition `pid` for a given date and edge type.
pub fn partition_dir(graph: &str, date: &str, edge_type: &str, pid: u32) -> String {
    paths::edge_dir(graph, date, edge_type, pid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::backend::LocalFs;
    use rand::{Rng, SeedableRng};

    fn cols() -> Vec<ColumnDef> {
        vec![ColumnDef::new("w", AttrType::Double), ColumnDef::new("tag", AttrType::Str)]
    }

    fn edge(src: u64, dst: u64, t: u64) -> Edge {
        Edge::new(src, dst, "e", t, vec![AttributeValue::Double(t as f64 / 3.0), AttributeValue::Str(format!("t{}", t % 3))])
    }

    fn single_cell() -> PartitionLayout {
        PartitionLayout::new(1, 1).unwrap()
    }

    fn write(fs: &LocalFs, edges: &[Edge], codecs: &CodecConfig) -> EdgePartitionStats {
        write_edge_partition(fs, "p", EdgePartitionId(0), "e", &cols(), edges, &single_cell(), codecs).unwrap()
    }

    fn open(fs: &LocalFs, filter: EdgeFilter, cols_req: Option<&[String]>, counters: Arc<BlockCounters>) -> EdgePartitionReader {
        EdgePartitionReader::open(fs, "p", "e", &cols(), cols_req, filter, TimeRange::ALL, counters).unwrap()
    }

    #[test]
    fn g2l_is_a_bijection_with_sorted_sources() {
        let edges = vec![edge(1, 9, 1), edge(1, 2, 2), edge(4, 1, 3), edge(7, 3, 4)];
        let mut sorted = edges.clone();
        sorted.sort_by_key(edge_key);
        let g = G2l::build(&sorted);
        assert_eq!(g.globals(), &[1, 4, 7, 2, 3, 9]);
        for l in 0..g.len() as u32 {
            assert_eq!(g.local(g.global(l).unwrap()), Some(l));
        }
        assert_eq!(g.local(100), None);
    }

    #[test]
    fn two_leaf_star() {
        let dir = tempfile::tempdir().unwrap();
        let fs = LocalFs::new(dir.path());
        let edges = vec![edge(10, 20, 5), edge(10, 30, 6)];
        let stats = write(&fs, &edges, &CodecConfig::default());
        assert_eq!((stats.stars, stats.edges, stats.vertices), (1, 2, 3));
        let all = open(&fs, EdgeFilter::Src([10].into()), None, Arc::default()).read_all().unwrap();
        assert_eq!(all, edges);
    }

    #[test]
    fn empty_partition_has_valid_files() {
        let dir = tempfile::tempdir().unwrap();
        let fs = LocalFs::new(dir.path());
        write(&fs, &[], &CodecConfig::default());
        let r = open(&fs, EdgeFilter::All, None, Arc::default());
        assert_eq!(r.block_count(), 0);
        assert!(r.read_all().unwrap().is_empty());
    }

    #[test]
    fn rejects_unsorted_and_misplaced_edges() {
        let dir = tempfile::tempdir().unwrap();
        let fs = LocalFs::new(dir.path());
        let l = single_cell();
        let err = write_edge_partition(&fs, "p", EdgePartitionId(0), "e", &cols(), &[edge(2, 1, 1), edge(1, 1, 1)], &l, &CodecConfig::default());
        assert!(matches!(err, Err(StoreError::UnsortedInput { index: 1 })));
        let l4 = PartitionLayout::new(4, 1).unwrap();
        let e = edge(2, 1, 1);
        let wrong = EdgePartitionId((l4.edge_partition(2, 1, 1).0 + 1) % 16);
        let err = write_edge_partition(&fs, "p", wrong, "e", &cols(), &[e], &l4, &CodecConfig::default());
        assert!(matches!(err, Err(StoreError::PartitionMismatch { .. })));
    }

    fn random_edges(seed: u64, n: usize, vertices: u64) -> Vec<Edge> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<Edge> = (0..n)
            .map(|_| edge(rng.gen_range(1..=vertices), rng.gen_range(1..=vertices), rng.gen_range(1..1_000_000)))
            .collect();
        edges.sort();
        edges
    }

    #[test]
    fn range_index_skips_blocks_soundly() {
        let dir = tempfile::tempdir().unwrap();
        let fs = LocalFs::new(dir.path());
        let edges = random_edges(3, 5000, 500);
        let codecs = CodecConfig { block_target_bytes: 1024, ..Default::default() };
        write(&fs, &edges, &codecs);
        let counters: Arc<BlockCounters> = Arc::default();
        let r = open(&fs, EdgeFilter::Src([250].into()), None, counters.clone());
        let blocks = r.block_count();
        assert!(blocks >= 16, "{blocks} blocks");
        let got = r.read_all().unwrap();
        let want: Vec<Edge> = edges.iter().filter(|e| e.src == 250).cloned().collect();
        assert_eq!(got, want);
        let s = counters.snapshot();
        assert!(s.struct_blocks_read <= 2);
        assert_eq!(s.struct_blocks_read + s.blocks_skipped, blocks as u64);

        counters.reset();
        let r = open(&fs, EdgeFilter::Src([100_000].into()), None, counters.clone());
        assert!(r.read_all().unwrap().is_empty());
        assert_eq!(counters.snapshot().blocks_read, 0);
    }

    #[test]
    fn bloom_index_and_dst_filter() {
        let dir = tempfile::tempdir().unwrap();
        let fs = LocalFs::new(dir.path());
        let edges = random_edges(4, 3000, 300);
        let codecs = CodecConfig { block_target_bytes: 2048, struct_index: IndexKind::Bloom, ..Default::default() };
        write(&fs, &edges, &codecs);
        for probe in [1u64, 77, 299] {
            let got = open(&fs, EdgeFilter::Src([probe].into()), None, Arc::default()).read_all().unwrap();
            let want: Vec<Edge> = edges.iter().filter(|e| e.src == probe).cloned().collect();
            assert_eq!(got, want);
            let got = open(&fs, EdgeFilter::Dst([probe].into()), None, Arc::default()).read_all().unwrap();
            let want: Vec<Edge> = edges.iter().filter(|e| e.dst == probe).cloned().collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn column_pruning_matches_projection() {
        let dir = tempfile::tempdir().unwrap();
        let fs = LocalFs::new(dir.path());
        let edges = random_edges(5, 800, 50);
        write(&fs, &edges, &CodecConfig { block_target_bytes: 512, ..Default::default() });
        let counters: Arc<BlockCounters> = Arc::default();
        let tag = open(&fs, EdgeFilter::All, Some(&["tag".to_string()]), counters.clone()).read_all().unwrap();
        for (full, pruned) in edges.iter().zip(&tag) {
            assert_eq!(pruned.attributes, vec![full.attributes[1].clone()]);
        }
        let none = open(&fs, EdgeFilter::All, Some(&[]), Arc::default()).read_all().unwrap();
        assert!(none.iter().all(|e| e.attributes.is_empty()));
        let err = EdgePartitionReader::open(&fs, "p", "e", &cols(), Some(&["x".into()]), EdgeFilter::All, TimeRange::ALL, Arc::default());
        assert!(matches!(err, Err(StoreError::UnknownColumn { .. })));
    }

    #[test]
    fn local_ids_halve_star_id_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let fs = LocalFs::new(dir.path());
        let edges = random_edges(6, 20_000, 1000);
        let stats = write(&fs, &edges, &CodecConfig::default());
        assert!(stats.vertices <= 2000);
        assert!((stats.local_id_bytes as f64) <= 0.5 * stats.global_id_bytes as f64);
    }
}
