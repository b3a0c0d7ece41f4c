//! Vertex partition files: `id.tgf` (ascending ids), `route.tgf` and one
//! `attr.<name>.tgf` per vertex attribute. Block `i` of every file covers
//! the same ids, and rows inside a block follow id order.
//!
//! Route row: `varint count, count × u32 packed entry`.
//! Attribute row: `varint versions`, then (when non-zero) an encoded value
//! column followed by the timestamps as a u64 base and varint deltas.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::codec::delta::{delta_ts_read, delta_ts_write};
use crate::codec::varint::{read_varint, write_varint};
use crate::codec::{decode_column, decode_column_at, encode_column_auto, ColumnCodec, ColumnData, ColumnType};
use crate::model::{AttrType, AttributeValue, ColumnDef, RoleFlag, Timestamp, VertexId};
use crate::partition::MAX_EDGE_PARTITIONS;

use super::backend::StorageBackend;
use super::edge::default_codec;
use super::format::{BlockCounters, FileBuilder, FileKind, FileReader, FileStats};
use super::index::{BlockKey, IndexKind};
use super::manifest::CodecConfig;
use super::{paths, StoreError};

/// `role << 30 | pid`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RouteEntry(pub u32);

impl RouteEntry {
    pub fn new(role: RoleFlag, pid: u32) -> Self {
        assert!(u64::from(pid) < MAX_EDGE_PARTITIONS, "partition id exceeds 30 bits");
        RouteEntry(role.bits() << 30 | pid)
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        RoleFlag::from_bits(bits >> 30).map(|_| RouteEntry(bits))
    }

    pub fn role(self) -> RoleFlag {
        RoleFlag::from_bits(self.0 >> 30).expect("validated on construction")
    }

    pub fn pid(self) -> u32 {
        self.0 & (MAX_EDGE_PARTITIONS as u32 - 1)
    }
}

impl std::fmt::Debug for AttributeHistory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.timestamps.iter().zip(&self.values)).finish()
    }
}

/// Version timeline of one vertex attribute, timestamps strictly ascending.
#[derive(Clone, Default, PartialEq)]
pub struct AttributeHistory {
    pub values: Vec<AttributeValue>,
    pub timestamps: Vec<Timestamp>,
}

impl AttributeHistory {
    /// Builds a history from updates in ingest order. Among updates with
    /// the same timestamp the last one wins.
    pub fn from_updates(updates: impl IntoIterator<Item = (Timestamp, AttributeValue)>) -> Self {
        let mut by_time: BTreeMap<Timestamp, AttributeValue> = BTreeMap::new();
        for (t, v) in updates {
            by_time.insert(t, v);
        }
        let (timestamps, values) = by_time.into_iter().unzip();
        Self { values, timestamps }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of the latest version at or before `t`.
    pub fn at(&self, t: Timestamp) -> Option<&AttributeValue> {
        let i = self.timestamps.partition_point(|&ts| ts <= t);
        i.checked_sub(1).map(|i| &self.values[i])
    }
}

/// Everything stored about one vertex. `attrs` follows the schema's vertex
/// attribute order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VertexRecord {
    pub id: VertexId,
    pub routes: Vec<RouteEntry>,
    pub attrs: Vec<AttributeHistory>,
}

fn record_cost(r: &VertexRecord) -> usize {
    let versions: usize = r.attrs.iter().map(|a| a.len() * 12 + 1).sum();
    2 + 4 * r.routes.len() + versions
}

/// Writes one vertex partition. `records` must be sorted by id without
/// duplicates.
pub fn write_vertex_partition(
    backend: &dyn StorageBackend,
    dir: &str,
    attrs: &[ColumnDef],
    records: &[VertexRecord],
    codecs: &CodecConfig,
) -> Result<FileStats, StoreError> {
    for (i, w) in records.windows(2).enumerate() {
        if w[0].id == w[1].id {
            return Err(StoreError::DuplicateId(w[1].id));
        }
        if w[0].id > w[1].id {
            return Err(StoreError::UnsortedInput { index: i + 1 });
        }
    }
    let mut chunks: Vec<&[VertexRecord]> = Vec::new();
    let (mut start, mut est) = (0, 0);
    for (i, r) in records.iter().enumerate() {
        let cost = record_cost(r);
        if est > 0 && est + cost > codecs.block_target_bytes {
            chunks.push(&records[start..i]);
            start = i;
            est = 0;
        }
        est += cost;
    }
    if start < records.len() {
        chunks.push(&records[start..]);
    }
    let key = |c: &[VertexRecord]| BlockKey::Range { min: c[0].id, max: c[c.len() - 1].id };

    let mut ids = FileBuilder::new(FileKind::Id, ColumnCodec::DeltaTs, codecs.general, IndexKind::Range);
    let mut routes = FileBuilder::new(FileKind::Route, ColumnCodec::None, codecs.general, IndexKind::Range);
    let mut attr_files: Vec<FileBuilder> = attrs
        .iter()
        .map(|a| FileBuilder::new(FileKind::Attr, default_codec(a.ty), codecs.general, IndexKind::Range))
        .collect();
    for chunk in &chunks {
        let mut raw = Vec::new();
        encode_column_auto(&mut raw, &ColumnData::U64(chunk.iter().map(|r| r.id).collect()))?;
        ids.add_block(&raw, key(chunk))?;

        let mut raw = Vec::new();
        for r in *chunk {
            write_varint(&mut raw, r.routes.len() as u64);
            r.routes.iter().for_each(|e| raw.extend_from_slice(&e.0.to_le_bytes()));
        }
        routes.add_block(&raw, key(chunk))?;

        for (a, file) in attr_files.iter_mut().enumerate() {
            let mut raw = Vec::new();
            for r in *chunk {
                let h = &r.attrs[a];
                write_varint(&mut raw, h.len() as u64);
                if !h.is_empty() {
                    encode_column_auto(&mut raw, &ColumnData::from_values(attrs[a].ty, &h.values)?)?;
                    delta_ts_write(&mut raw, &h.timestamps)?;
                }
            }
            file.add_block(&raw, key(chunk))?;
        }
    }
    let mut stats = ids.write(backend, &format!("{dir}/id.tgf"))?;
    stats += routes.write(backend, &format!("{dir}/route.tgf"))?;
    for (a, file) in attrs.iter().zip(attr_files) {
        stats += file.write(backend, &paths::attr_file(dir, &a.col))?;
    }
    Ok(stats)
}

/// For each id block that may hold some of `ids` (sorted): the block
/// ordinal and the (id, row) pairs found in it.
fn locate(
    backend: &dyn StorageBackend,
    dir: &str,
    ids: &[VertexId],
    counters: &Arc<BlockCounters>,
) -> Result<Vec<(usize, Vec<(VertexId, usize)>)>, StoreError> {
    let mut file = FileReader::open(backend, &format!("{dir}/id.tgf"), Arc::clone(counters))?;
    let mut out = Vec::new();
    for b in 0..file.block_count() {
        let BlockKey::Range { min, max } = *file.key(b) else {
            return Err(StoreError::corrupt(file.path(), "id file without range index"));
        };
        let lo = ids.partition_point(|&id| id < min);
        let wanted: Vec<VertexId> = ids[lo..].iter().copied().take_while(|&id| id <= max).collect();
        if wanted.is_empty() {
            continue;
        }
        let block = read_ids(&mut file, b)?;
        let found: Vec<(VertexId, usize)> =
            wanted.into_iter().filter_map(|id| block.binary_search(&id).ok().map(|row| (id, row))).collect();
        if !found.is_empty() {
            out.push((b, found));
        }
    }
    Ok(out)
}

fn read_ids(file: &mut FileReader, b: usize) -> Result<Vec<VertexId>, StoreError> {
    match decode_column(&file.read_block(b)?, ColumnType::U64)? {
        ColumnData::U64(v) => Ok(v),
        _ => unreachable!("decoded as U64"),
    }
}

fn parse_routes(path: &str, raw: &[u8]) -> Result<Vec<Vec<RouteEntry>>, StoreError> {
    let mut pos = 0;
    let mut rows = Vec::new();
    while pos < raw.len() {
        let n = read_varint(raw, &mut pos)? as usize;
        let body = raw.get(pos..pos.saturating_add(n.saturating_mul(4))).ok_or_else(|| StoreError::corrupt(path, "truncated route row"))?;
        pos += body.len();
        let row = body
            .chunks_exact(4)
            .map(|c| RouteEntry::from_bits(u32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| StoreError::corrupt(path, "route entry with role 00"))?;
        rows.push(row);
    }
    Ok(rows)
}

fn parse_attr_rows(raw: &[u8], ty: AttrType, rows: usize) -> Result<Vec<AttributeHistory>, StoreError> {
    let mut pos = 0;
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let n = read_varint(raw, &mut pos)? as usize;
        if n == 0 {
            out.push(AttributeHistory::default());
            continue;
        }
        let (_, data) = decode_column_at(raw, &mut pos, ColumnType::from(ty))?;
        let values = data.into_values();
        if values.len() != n {
            return Err(crate::codec::CodecError::LengthMismatch { expected: n, actual: values.len() }.into());
        }
        let timestamps = delta_ts_read(raw, &mut pos, n)?;
        out.push(AttributeHistory { values, timestamps });
    }
    Ok(out)
}

/// Route lists of `ids` (sorted) found in this partition.
pub fn read_routes(
    backend: &dyn StorageBackend,
    dir: &str,
    ids: &[VertexId],
    counters: &Arc<BlockCounters>,
) -> Result<BTreeMap<VertexId, Vec<RouteEntry>>, StoreError> {
    let located = locate(backend, dir, ids, counters)?;
    let mut out = BTreeMap::new();
    if located.is_empty() {
        return Ok(out);
    }
    let path = format!("{dir}/route.tgf");
    let mut file = FileReader::open(backend, &path, Arc::clone(counters))?;
    for (b, found) in located {
        let rows = parse_routes(&path, &file.read_block(b)?)?;
        for (id, row) in found {
            let r = rows.get(row).ok_or_else(|| StoreError::corrupt(&path, "fewer route rows than ids"))?;
            out.insert(id, r.clone());
        }
    }
    Ok(out)
}

/// Histories of attribute `attr` for `ids` (sorted) found in this partition.
pub fn read_attribute(
    backend: &dyn StorageBackend,
    dir: &str,
    attr: &ColumnDef,
    ids: &[VertexId],
    counters: &Arc<BlockCounters>,
) -> Result<BTreeMap<VertexId, AttributeHistory>, StoreError> {
    let located = locate(backend, dir, ids, counters)?;
    let mut out = BTreeMap::new();
    if located.is_empty() {
        return Ok(out);
    }
    let mut file = FileReader::open(backend, &paths::attr_file(dir, &attr.col), Arc::clone(counters))?;
    for (b, found) in located {
        let last = found.iter().map(|&(_, row)| row).max().expect("non-empty");
        let rows = parse_attr_rows(&file.read_block(b)?, attr.ty, last + 1)?;
        for (id, row) in found {
            out.insert(id, rows[row].clone());
        }
    }
    Ok(out)
}

/// Every (id, routes) row of a partition in id order.
pub fn read_all_routes(
    backend: &dyn StorageBackend,
    dir: &str,
    counters: &Arc<BlockCounters>,
) -> Result<Vec<(VertexId, Vec<RouteEntry>)>, StoreError> {
    let mut ids = FileReader::open(backend, &format!("{dir}/id.tgf"), Arc::clone(counters))?;
    let path = format!("{dir}/route.tgf");
    let mut routes = FileReader::open(backend, &path, Arc::clone(counters))?;
    if routes.block_count() != ids.block_count() {
        return Err(StoreError::corrupt(&path, "block count differs from id file"));
    }
    let mut out = Vec::new();
    for b in 0..ids.block_count() {
        let block_ids = read_ids(&mut ids, b)?;
        let rows = parse_routes(&path, &routes.read_block(b)?)?;
        if rows.len() != block_ids.len() {
            return Err(StoreError::corrupt(&path, "route rows do not match ids"));
        }
        out.extend(block_ids.into_iter().zip(rows));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::backend::LocalFs;

    #[test]
    fn route_entry_bit_layout() {
        assert_eq!(RouteEntry::new(RoleFlag::Src, 5).0, 0x4000_0005);
        assert_eq!(RouteEntry::new(RoleFlag::Both, (1 << 30) - 1).0, 0xFFFF_FFFF);
        let e = RouteEntry::new(RoleFlag::Dst, 77);
        assert_eq!((e.role(), e.pid()), (RoleFlag::Dst, 77));
        assert_eq!(RouteEntry::from_bits(5), None);
    }

    #[test]
    fn history_lookup_follows_versions() {
        let h = AttributeHistory::from_updates([
            (100, AttributeValue::Int(16)),
            (200, AttributeValue::Int(17)),
            (300, AttributeValue::Int(28)),
        ]);
        assert_eq!(h.at(250), Some(&AttributeValue::Int(17)));
        assert_eq!(h.at(200), Some(&AttributeValue::Int(17)));
        assert_eq!(h.at(99), None);
        assert_eq!(h.at(300), Some(&AttributeValue::Int(28)));
    }

    #[test]
    fn timestamp_ties_keep_the_last_write() {
        let h = AttributeHistory::from_updates([
            (5, AttributeValue::Int(1)),
            (3, AttributeValue::Int(2)),
            (5, AttributeValue::Int(3)),
        ]);
        assert_eq!(h.timestamps, vec![3, 5]);
        assert_eq!(h.values, vec![AttributeValue::Int(2), AttributeValue::Int(3)]);
    }

    fn records(n: u64) -> Vec<VertexRecord> {
        (1..=n)
            .map(|i| VertexRecord {
                id: i * 7,
                routes: (0..i % 4).map(|k| RouteEntry::new(RoleFlag::Src, k as u32 * 3)).collect(),
                attrs: vec![
                    AttributeHistory::from_updates((0..i % 3).map(|v| (1000 + v * 10, AttributeValue::Int(v as i32)))),
                    AttributeHistory::from_updates([(i, AttributeValue::Str(format!("n{i}")))]),
                ],
            })
            .collect()
    }

    fn attrs() -> Vec<ColumnDef> {
        vec![ColumnDef::new("age", AttrType::Int), ColumnDef::new("name", AttrType::Str)]
    }

    #[test]
    fn vertex_partition_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let fs = LocalFs::new(dir.path());
        let recs = records(500);
        let codecs = CodecConfig { block_target_bytes: 256, ..Default::default() };
        write_vertex_partition(&fs, "v", &attrs(), &recs, &codecs).unwrap();
        let counters: Arc<BlockCounters> = Arc::default();

        let all = read_all_routes(&fs, "v", &counters).unwrap();
        assert_eq!(all, recs.iter().map(|r| (r.id, r.routes.clone())).collect::<Vec<_>>());

        let ids = [7, 700, 3500, 3];
        let mut sorted = ids.to_vec();
        sorted.sort();
        let routes = read_routes(&fs, "v", &sorted, &counters).unwrap();
        assert_eq!(routes.len(), 3);
        assert_eq!(routes[&700], recs[99].routes);
        assert!(!routes.contains_key(&3));

        let age = read_attribute(&fs, "v", &attrs()[0], &sorted, &counters).unwrap();
        assert_eq!(age[&3500], recs[499].attrs[0]);
        let name = read_attribute(&fs, "v", &attrs()[1], &[700], &counters).unwrap();
        assert_eq!(name[&700].at(u64::MAX), Some(&AttributeValue::Str("n100".into())));
    }

    #[test]
    fn point_lookup_reads_one_block_per_file() {
        let dir = tempfile::tempdir().unwrap();
        let fs = LocalFs::new(dir.path());
        write_vertex_partition(&fs, "v", &attrs(), &records(2000), &CodecConfig { block_target_bytes: 512, ..Default::default() })
            .unwrap();
        let counters: Arc<BlockCounters> = Arc::default();
        read_routes(&fs, "v", &[7 * 1234], &counters).unwrap();
        assert_eq!(counters.snapshot().blocks_read, 2);
    }

    #[test]
    fn rejects_duplicates_and_disorder() {
        let dir = tempfile::tempdir().unwrap();
        let fs = LocalFs::new(dir.path());
        let mut recs = records(3);
        recs[1].id = recs[0].id;
        assert!(matches!(
            write_vertex_partition(&fs, "v", &attrs(), &recs, &CodecConfig::default()),
            Err(StoreError::DuplicateId(7))
        ));
        let mut recs = records(3);
        recs.swap(0, 2);
        assert!(matches!(
            write_vertex_partition(&fs, "v", &attrs(), &recs, &CodecConfig::default()),
            Err(StoreError::UnsortedInput { index: 1 })
        ));
    }
}
