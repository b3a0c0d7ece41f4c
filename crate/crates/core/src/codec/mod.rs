//! Block-level encoders: varint, zigzag, timestamp deltas, DFCM, string
//! dictionaries and the general-purpose compressors layered on top.

pub mod bench;
pub mod column;
pub mod delta;
pub mod dfcm;
pub mod dict;
pub mod general;
pub mod varint;

use serde::{Deserialize, Serialize};

pub use column::{decode_column, decode_column_at, encode_column, encode_column_auto, ColumnData, ColumnType};
pub use delta::{delta_ts_decode, delta_ts_encode, DeltaEncoded};
pub use dfcm::{dfcm_decode, dfcm_encode, DfcmDecoder, DfcmEncoder, DfcmState};
pub use dict::{dict_decode, dict_encode, DictEncoded};
pub use general::{general_compress, general_decompress, GeneralCodec};
pub use varint::{unzigzag, varint_decode, varint_encode, zigzag};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("truncated stream")]
    TruncatedStream,
    #[error("varint overflows 64 bits")]
    VarintOverflow,
    #[error("sequence decreases at index {index}")]
    DecreasingSequence { index: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("unsupported codec id 0x{0:02x}")]
    UnsupportedCodec(u8),
    #[error("invalid header byte 0x{0:02x}")]
    InvalidHeader(u8),
    #[error("dictionary code {0} out of range")]
    DictionaryCode(u32),
    #[error("invalid utf-8 in string column")]
    InvalidUtf8,
    #[error("expected {expected} values or bytes, found {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("column expects {expected}, got {actual}")]
    TypeMismatch { expected: &'static str, actual: &'static str },
    #[error("trailing bytes after encoded data")]
    TrailingBytes,
    #[error("compressor failure: {0}")]
    Io(String),
}

impl CodecError {
    pub(crate) fn io(e: std::io::Error) -> Self {
        CodecError::Io(e.to_string())
    }
}

/// Column serialization applied before the general compressor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnCodec {
    None,
    Varint,
    ZigzagVarint,
    DeltaTs,
    Dfcm,
    Dict,
}

impl ColumnCodec {
    pub const ALL: [ColumnCodec; 6] = [
        ColumnCodec::None,
        ColumnCodec::Varint,
        ColumnCodec::ZigzagVarint,
        ColumnCodec::DeltaTs,
        ColumnCodec::Dfcm,
        ColumnCodec::Dict,
    ];

    pub fn id(self) -> u8 {
        match self {
            ColumnCodec::None => 0x00,
            ColumnCodec::Varint => 0x01,
            ColumnCodec::ZigzagVarint => 0x02,
            ColumnCodec::DeltaTs => 0x03,
            ColumnCodec::Dfcm => 0x04,
            ColumnCodec::Dict => 0x05,
        }
    }

    pub fn from_id(id: u8) -> Result<Self, CodecError> {
        ColumnCodec::ALL
            .into_iter()
            .find(|c| c.id() == id)
            .ok_or(CodecError::UnsupportedCodec(id))
    }

    pub fn name(self) -> &'static str {
        match self {
            ColumnCodec::None => "NONE",
            ColumnCodec::Varint => "VARINT",
            ColumnCodec::ZigzagVarint => "ZIGZAG_VARINT",
            ColumnCodec::DeltaTs => "DELTA_TS",
            ColumnCodec::Dfcm => "DFCM",
            ColumnCodec::Dict => "DICT",
        }
    }
}

impl std::str::FromStr for ColumnCodec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_uppercase().replace('-', "_");
        ColumnCodec::ALL
            .into_iter()
            .find(|c| c.name() == norm)
            .ok_or_else(|| format!("unknown column codec {s:?}"))
    }
}

/// A column-encoded, then generally compressed, unit of storage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedBlock {
    pub codec: ColumnCodec,
    pub general: GeneralCodec,
    /// Length of the column-encoded bytes before general compression.
    pub raw_len: usize,
    pub payload: Vec<u8>,
}

impl EncodedBlock {
    pub fn encode(data: &ColumnData, codec: ColumnCodec, general: GeneralCodec) -> Result<Self, CodecError> {
        let raw = encode_column(data, codec)?;
        let payload = general_compress(&raw, general)?;
        Ok(Self { codec, general, raw_len: raw.len(), payload })
    }

    pub fn decode(&self, ty: ColumnType) -> Result<ColumnData, CodecError> {
        let raw = general_decompress(&self.payload, self.general, self.raw_len)?;
        decode_column(&raw, ty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codec_ids_are_fixed() {
        let ids: Vec<u8> = ColumnCodec::ALL.iter().map(|c| c.id()).collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(GeneralCodec::None.id(), 0);
        assert_eq!(GeneralCodec::Deflate.id(), 1);
        assert_eq!(GeneralCodec::Zstd.id(), 2);
        assert_eq!("delta_ts".parse::<ColumnCodec>(), Ok(ColumnCodec::DeltaTs));
        assert_eq!(ColumnCodec::from_id(6), Err(CodecError::UnsupportedCodec(6)));
    }

    #[test]
    fn encoded_block_records_raw_length() {
        let data = ColumnData::Str(vec!["x".into(); 100]);
        let block = EncodedBlock::encode(&data, ColumnCodec::Dict, GeneralCodec::Zstd).unwrap();
        assert_eq!(block.raw_len, encode_column(&data, ColumnCodec::Dict).unwrap().len());
        assert_eq!(block.decode(ColumnType::Str).unwrap(), data);
    }
}
