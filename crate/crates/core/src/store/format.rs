//! The TGF file container shared by every edge and vertex file.
//!
//! ```text
//! "TGF1"            4 bytes magic
//! version           u16
//! file kind         u8
//! column codec id   u8
//! general codec id  u8
//! block count       u32
//! index kind        u8
//! index length      u32
//! index bytes
//! blocks            u32 raw_len, u32 enc_len, enc bytes, u32 crc32(enc bytes)
//! ```
//!
//! All integers are little-endian. The index sits in the header, so files
//! are assembled in memory and written in one piece.

use std::io::{Read, Seek, SeekFrom};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::codec::{general_compress, general_decompress, ColumnCodec, GeneralCodec};

use super::backend::{ReadSeek, StorageBackend};
use super::index::{BlockIndex, BlockKey, IndexEntry, IndexKind};
use super::StoreError;

pub const MAGIC: &[u8; 4] = b"TGF1";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_FIXED_LEN: usize = 18;
const FRAME_OVERHEAD: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FileKind {
    Struct,
    Attr,
    G2l,
    Id,
    Route,
}

impl FileKind {
    pub fn id(self) -> u8 {
        match self {
            FileKind::Struct => 1,
            FileKind::Attr => 2,
            FileKind::G2l => 3,
            FileKind::Id => 4,
            FileKind::Route => 5,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(FileKind::Struct),
            2 => Some(FileKind::Attr),
            3 => Some(FileKind::G2l),
            4 => Some(FileKind::Id),
            5 => Some(FileKind::Route),
            _ => None,
        }
    }
}

/// Block-level read accounting for one graph handle.
#[derive(Debug, Default)]
pub struct BlockCounters {
    pub blocks_read: AtomicU64,
    /// Star blocks read; a subset of `blocks_read`.
    pub struct_blocks_read: AtomicU64,
    /// Star blocks passed over because their index key excluded the filter.
    pub blocks_skipped: AtomicU64,
    pub bytes_read: AtomicU64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BlockStats {
    pub blocks_read: u64,
    pub struct_blocks_read: u64,
    pub blocks_skipped: u64,
    pub bytes_read: u64,
}

impl BlockCounters {
    pub fn snapshot(&self) -> BlockStats {
        BlockStats {
            blocks_read: self.blocks_read.load(Ordering::Relaxed),
            struct_blocks_read: self.struct_blocks_read.load(Ordering::Relaxed),
            blocks_skipped: self.blocks_skipped.load(Ordering::Relaxed),
            bytes_read: self.bytes_read.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.blocks_read.store(0, Ordering::Relaxed);
        self.struct_blocks_read.store(0, Ordering::Relaxed);
        self.blocks_skipped.store(0, Ordering::Relaxed);
        self.bytes_read.store(0, Ordering::Relaxed);
    }

    pub(crate) fn skipped(&self, n: u64) {
        self.blocks_skipped.fetch_add(n, Ordering::Relaxed);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileHeader {
    pub version: u16,
    pub kind: FileKind,
    pub column_codec: ColumnCodec,
    pub general: GeneralCodec,
    pub index: BlockIndex,
}

impl FileHeader {
    pub fn block_count(&self) -> usize {
        self.index.len()
    }
}

/// Size accounting for a written file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FileStats {
    pub blocks: usize,
    /// Column-encoded bytes before general compression.
    pub raw_bytes: u64,
    /// Bytes after general compression, excluding framing.
    pub encoded_bytes: u64,
    pub file_bytes: u64,
}

impl std::ops::AddAssign for FileStats {
    fn add_assign(&mut self, o: Self) {
        self.blocks += o.blocks;
        self.raw_bytes += o.raw_bytes;
        self.encoded_bytes += o.encoded_bytes;
        self.file_bytes += o.file_bytes;
    }
}

pub struct FileBuilder {
    kind: FileKind,
    column_codec: ColumnCodec,
    general: GeneralCodec,
    index_kind: IndexKind,
    entries: Vec<IndexEntry>,
    blocks: Vec<u8>,
    stats: FileStats,
}

impl FileBuilder {
    pub fn new(kind: FileKind, column_codec: ColumnCodec, general: GeneralCodec, index_kind: IndexKind) -> Self {
        Self {
            kind,
            column_codec,
            general,
            index_kind,
            entries: Vec::new(),
            blocks: Vec::new(),
            stats: FileStats::default(),
        }
    }

    pub fn add_block(&mut self, raw: &[u8], key: BlockKey) -> Result<(), StoreError> {
        debug_assert!(matches!(
            (&key, self.index_kind),
            (BlockKey::None, IndexKind::None) | (BlockKey::Range { .. }, IndexKind::Range) | (BlockKey::Bloom(_), IndexKind::Bloom)
        ));
        let enc = general_compress(raw, self.general)?;
        let offset = self.blocks.len() as u64;
        self.blocks.extend_from_slice(&(raw.len() as u32).to_le_bytes());
        self.blocks.extend_from_slice(&(enc.len() as u32).to_le_bytes());
        self.blocks.extend_from_slice(&enc);
        self.blocks.extend_from_slice(&crc32fast::hash(&enc).to_le_bytes());
        self.entries.push(IndexEntry { offset, len: (enc.len() + FRAME_OVERHEAD) as u32, key });
        self.stats.blocks += 1;
        self.stats.raw_bytes += raw.len() as u64;
        self.stats.encoded_bytes += enc.len() as u64;
        Ok(())
    }

    pub fn finish(self) -> (Vec<u8>, FileStats) {
        let index = BlockIndex { kind: self.index_kind, entries: self.entries }.to_bytes();
        let mut out = Vec::with_capacity(HEADER_FIXED_LEN + index.len() + self.blocks.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.kind.id());
        out.push(self.column_codec.id());
        out.push(self.general.id());
        out.extend_from_slice(&(self.stats.blocks as u32).to_le_bytes());
        out.push(self.index_kind.id());
        out.extend_from_slice(&(index.len() as u32).to_le_bytes());
        out.extend_from_slice(&index);
        out.extend_from_slice(&self.blocks);
        let stats = FileStats { file_bytes: out.len() as u64, ..self.stats };
        (out, stats)
    }

    /// Builds the file and stores it atomically.
    pub fn write(self, backend: &dyn StorageBackend, path: &str) -> Result<FileStats, StoreError> {
        let (bytes, stats) = self.finish();
        backend.create_atomic(path, &bytes)?;
        Ok(stats)
    }
}

/// Random-access reader over one TGF file. Only the header is read on open;
/// blocks are fetched one at a time.
pub struct FileReader {
    path: String,
    reader: Box<dyn ReadSeek>,
    header: FileHeader,
    data_start: u64,
    counters: Arc<BlockCounters>,
}

impl FileReader {
    pub fn open(backend: &dyn StorageBackend, path: &str, counters: Arc<BlockCounters>) -> Result<Self, StoreError> {
        let mut reader = backend.open(path)?;
        let corrupt = |reason: &str| StoreError::corrupt(path, reason);

        let mut fixed = [0u8; HEADER_FIXED_LEN];
        reader.read_exact(&mut fixed).map_err(|_| corrupt("short header"))?;
        if &fixed[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = u16::from_le_bytes([fixed[4], fixed[5]]);
        if version != FORMAT_VERSION {
            return Err(corrupt("unsupported format version"));
        }
        let kind = FileKind::from_id(fixed[6]).ok_or_else(|| corrupt("unknown file kind"))?;
        let column_codec = ColumnCodec::from_id(fixed[7])?;
        let general = GeneralCodec::from_id(fixed[8])?;
        let block_count = u32::from_le_bytes(fixed[9..13].try_into().unwrap()) as usize;
        let index_kind = IndexKind::from_id(fixed[13]).ok_or_else(|| corrupt("unknown index kind"))?;
        let index_len = u32::from_le_bytes(fixed[14..18].try_into().unwrap()) as usize;

        let mut index_bytes = vec![0u8; index_len];
        reader.read_exact(&mut index_bytes).map_err(|_| corrupt("short index"))?;
        let index = BlockIndex::from_bytes(index_kind, block_count, &index_bytes)
            .ok_or_else(|| corrupt("malformed index"))?;
        counters
            .bytes_read
            .fetch_add((HEADER_FIXED_LEN + index_len) as u64, Ordering::Relaxed);

        Ok(Self {
            path: path.to_owned(),
            reader,
            header: FileHeader { version, kind, column_codec, general, index },
            data_start: (HEADER_FIXED_LEN + index_len) as u64,
            counters,
        })
    }

    pub fn header(&self) -> &FileHeader {
        &self.header
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn block_count(&self) -> usize {
        self.header.block_count()
    }

    pub fn key(&self, block: usize) -> &BlockKey {
        &self.header.index.entries[block].key
    }

    /// Reads, verifies and decompresses block `block`.
    pub fn read_block(&mut self, block: usize) -> Result<Vec<u8>, StoreError> {
        let entry = self
            .header
            .index
            .entries
            .get(block)
            .ok_or_else(|| StoreError::corrupt(&self.path, "block ordinal out of range"))?;
        let len = entry.len as usize;
        if len < FRAME_OVERHEAD {
            return Err(StoreError::corrupt(&self.path, "block shorter than its frame"));
        }
        self.reader.seek(SeekFrom::Start(self.data_start + entry.offset))?;
        let mut frame = vec![0u8; len];
        self.reader
            .read_exact(&mut frame)
            .map_err(|_| StoreError::corrupt(&self.path, "truncated block"))?;
        self.counters.blocks_read.fetch_add(1, Ordering::Relaxed);
        if self.header.kind == FileKind::Struct {
            self.counters.struct_blocks_read.fetch_add(1, Ordering::Relaxed);
        }
        self.counters.bytes_read.fetch_add(len as u64, Ordering::Relaxed);

        let raw_len = u32::from_le_bytes(frame[0..4].try_into().unwrap()) as usize;
        let enc_len = u32::from_le_bytes(frame[4..8].try_into().unwrap()) as usize;
        if enc_len + FRAME_OVERHEAD != len {
            return Err(StoreError::corrupt(&self.path, "block length mismatch"));
        }
        let enc = &frame[8..8 + enc_len];
        let crc = u32::from_le_bytes(frame[8 + enc_len..].try_into().unwrap());
        if crc32fast::hash(enc) != crc {
            return Err(StoreError::corrupt(&self.path, "checksum mismatch"));
        }
        Ok(general_decompress(enc, self.header.general, raw_len)?)
    }
}
