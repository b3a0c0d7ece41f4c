//! Header-resident block indexes: byte extents per block plus either an id
//! range or a bloom filter.

use serde::{Deserialize, Serialize};

use super::bloom::BloomFilter;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    /// Extents only; blocks are located by ordinal.
    #[default]
    None,
    Range,
    Bloom,
}

impl IndexKind {
    pub fn id(self) -> u8 {
        match self {
            IndexKind::None => 0,
            IndexKind::Range => 1,
            IndexKind::Bloom => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(IndexKind::None),
            1 => Some(IndexKind::Range),
            2 => Some(IndexKind::Bloom),
            _ => None,
        }
    }
}

impl std::str::FromStr for IndexKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(IndexKind::None),
            "range" => Ok(IndexKind::Range),
            "bloom" => Ok(IndexKind::Bloom),
            other => Err(format!("unknown index kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockKey {
    None,
    Range { min: u64, max: u64 },
    Bloom(BloomFilter),
}

impl BlockKey {
    /// `false` only when the block provably holds none of the ids.
    pub fn may_contain(&self, id: u64) -> bool {
        match self {
            BlockKey::None => true,
            BlockKey::Range { min, max } => (*min..=*max).contains(&id),
            BlockKey::Bloom(f) => f.contains(id),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexEntry {
    /// Offset of the framed block from the start of the block area.
    pub offset: u64,
    /// Length of the framed block (length prefixes and checksum included).
    pub len: u32,
    pub key: BlockKey,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockIndex {
    pub kind: IndexKind,
    pub entries: Vec<IndexEntry>,
}

impl BlockIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Per block: `u64 offset, u32 len`, then `u64 min, u64 max` for range
    /// indexes or a serialized bloom filter for bloom indexes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for e in &self.entries {
            out.extend_from_slice(&e.offset.to_le_bytes());
            out.extend_from_slice(&e.len.to_le_bytes());
            match &e.key {
                BlockKey::None => {}
                BlockKey::Range { min, max } => {
                    out.extend_from_slice(&min.to_le_bytes());
                    out.extend_from_slice(&max.to_le_bytes());
                }
                BlockKey::Bloom(f) => f.write_to(&mut out),
            }
        }
        out
    }

    pub fn from_bytes(kind: IndexKind, blocks: usize, bytes: &[u8]) -> Option<Self> {
        let mut pos = 0;
        let mut entries = Vec::with_capacity(blocks.min(bytes.len() / 12));
        let u64_at = |pos: usize| bytes.get(pos..pos + 8).map(|b| u64::from_le_bytes(b.try_into().unwrap()));
        for _ in 0..blocks {
            let offset = u64_at(pos)?;
            let len = u32::from_le_bytes(bytes.get(pos + 8..pos + 12)?.try_into().ok()?);
            pos += 12;
            let key = match kind {
                IndexKind::None => BlockKey::None,
                IndexKind::Range => {
                    let (min, max) = (u64_at(pos)?, u64_at(pos + 8)?);
                    pos += 16;
                    if min > max {
                        return None;
                    }
                    BlockKey::Range { min, max }
                }
                IndexKind::Bloom => BlockKey::Bloom(BloomFilter::read_from(bytes, &mut pos)?),
            };
            entries.push(IndexEntry { offset, len, key });
        }
        if pos != bytes.len() {
            return None;
        }
        let ascending = entries.windows(2).all(|w| w[0].offset + u64::from(w[0].len) <= w[1].offset);
        ascending.then_some(Self { kind, entries })
    }
}
