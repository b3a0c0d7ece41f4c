//! General-purpose block compressors applied after column encoding.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::CodecError;

const ZSTD_LEVEL: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneralCodec {
    #[default]
    None,
    Deflate,
    Zstd,
}

impl GeneralCodec {
    pub const ALL: [GeneralCodec; 3] = [GeneralCodec::None, GeneralCodec::Deflate, GeneralCodec::Zstd];

    pub fn id(self) -> u8 {
        match self {
            GeneralCodec::None => 0x00,
            GeneralCodec::Deflate => 0x01,
            GeneralCodec::Zstd => 0x02,
        }
    }

    pub fn from_id(id: u8) -> Result<Self, CodecError> {
        match id {
            0x00 => Ok(GeneralCodec::None),
            0x01 => Ok(GeneralCodec::Deflate),
            0x02 => Ok(GeneralCodec::Zstd),
            other => Err(CodecError::UnsupportedCodec(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GeneralCodec::None => "none",
            GeneralCodec::Deflate => "deflate",
            GeneralCodec::Zstd => "zstd",
        }
    }
}

impl std::str::FromStr for GeneralCodec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(GeneralCodec::None),
            "deflate" | "zlib" => Ok(GeneralCodec::Deflate),
            "zstd" => Ok(GeneralCodec::Zstd),
            other => Err(format!("unknown general codec {other:?}")),
        }
    }
}

pub fn general_compress(block: &[u8], codec: GeneralCodec) -> Result<Vec<u8>, CodecError> {
    match codec {
        GeneralCodec::None => Ok(block.to_vec()),
        GeneralCodec::Deflate => {
            let mut enc = flate2::write::DeflateEncoder::new(
                Vec::with_capacity(block.len() / 2),
                flate2::Compression::default(),
            );
            enc.write_all(block).map_err(CodecError::io)?;
            enc.finish().map_err(CodecError::io)
        }
        GeneralCodec::Zstd => zstd::bulk::compress(block, ZSTD_LEVEL).map_err(CodecError::io),
    }
}

/// Inverse of [`general_compress`]; `raw_len` is the expected output length.
pub fn general_decompress(
    data: &[u8],
    codec: GeneralCodec,
    raw_len: usize,
) -> Result<Vec<u8>, CodecError> {
    let out = match codec {
        GeneralCodec::None => data.to_vec(),
        GeneralCodec::Deflate => {
            let mut out = Vec::with_capacity(raw_len);
            flate2::read::DeflateDecoder::new(data)
                .read_to_end(&mut out)
                .map_err(CodecError::io)?;
            out
        }
        GeneralCodec::Zstd => zstd::bulk::decompress(data, raw_len).map_err(CodecError::io)?,
    };
    if out.len() != raw_len {
        return Err(CodecError::LengthMismatch { expected: raw_len, actual: out.len() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn none_is_identity() {
        let data = b"hello tgf".to_vec();
        assert_eq!(general_compress(&data, GeneralCodec::None).unwrap(), data);
    }

    #[test]
    fn zeros_shrink() {
        let zeros = vec![0u8; 4096];
        for codec in [GeneralCodec::Deflate, GeneralCodec::Zstd] {
            let c = general_compress(&zeros, codec).unwrap();
            assert!(c.len() < zeros.len(), "{codec:?}");
            assert_eq!(general_decompress(&c, codec, zeros.len()).unwrap(), zeros);
        }
    }

    #[test]
    fn unknown_id_fails_loudly() {
        assert_eq!(GeneralCodec::from_id(0x09), Err(CodecError::UnsupportedCodec(0x09)));
        for c in GeneralCodec::ALL {
            assert_eq!(GeneralCodec::from_id(c.id()), Ok(c));
        }
    }

    #[test]
    fn wrong_raw_length_is_an_error() {
        let c = general_compress(b"abc", GeneralCodec::Deflate).unwrap();
        assert!(general_decompress(&c, GeneralCodec::Deflate, 4).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn round_trip(data in proptest::collection::vec(any::<u8>(), 0..96), which in 0usize..3) {
            let codec = GeneralCodec::ALL[which];
            let c = general_compress(&data, codec).unwrap();
            prop_assert_eq!(general_decompress(&c, codec, data.len()).unwrap(), data);
        }
    }
}
