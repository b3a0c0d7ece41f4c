//! Typed column encoding. Every encoded column is self-describing:
//!
//! ```text
//! u8      column codec id
//! varint  value count
//! ...     codec body
//! ```

use crate::model::{AttrType, AttributeValue};

use super::delta::{delta_ts_read, delta_ts_write};
use super::dfcm::{DfcmDecoder, DfcmEncoder, DEFAULT_TABLE_BITS};
use super::dict::{dict_encode, DictEncoded};
use super::varint::{read_varint, unzigzag, write_varint, zigzag};
use super::{CodecError, ColumnCodec};

/// Physical column type. `U64` carries unsigned words such as vertex ids
/// and timestamps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColumnType {
    Int,
    Long,
    Double,
    Str,
    U64,
}

impl From<AttrType> for ColumnType {
    fn from(t: AttrType) -> Self {
        match t {
            AttrType::Int => ColumnType::Int,
            AttrType::Long => ColumnType::Long,
            AttrType::Double => ColumnType::Double,
            AttrType::Str => ColumnType::Str,
        }
    }
}

impl ColumnType {
    /// Codecs that can encode this type.
    pub fn supported_codecs(self) -> &'static [ColumnCodec] {
        use ColumnCodec::*;
        match self {
            ColumnType::Int => &[None, ZigzagVarint],
            ColumnType::Long => &[None, ZigzagVarint, Dfcm],
            ColumnType::Double => &[None, Dfcm],
            ColumnType::Str => &[None, Dict],
            ColumnType::U64 => &[None, Varint, DeltaTs, Dfcm],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    Int(Vec<i32>),
    Long(Vec<i64>),
    Double(Vec<f64>),
    Str(Vec<String>),
    U64(Vec<u64>),
}

impl ColumnData {
    pub fn empty(ty: ColumnType) -> Self {
        match ty {
            ColumnType::Int => ColumnData::Int(Vec::new()),
            ColumnType::Long => ColumnData::Long(Vec::new()),
            ColumnType::Double => ColumnData::Double(Vec::new()),
            ColumnType::Str => ColumnData::Str(Vec::new()),
            ColumnType::U64 => ColumnData::U64(Vec::new()),
        }
    }

    pub fn column_type(&self) -> ColumnType {
        match self {
            ColumnData::Int(_) => ColumnType::Int,
            ColumnData::Long(_) => ColumnType::Long,
            ColumnData::Double(_) => ColumnType::Double,
            ColumnData::Str(_) => ColumnType::Str,
            ColumnData::U64(_) => ColumnType::U64,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Int(v) => v.len(),
            ColumnData::Long(v) => v.len(),
            ColumnData::Double(v) => v.len(),
            ColumnData::Str(v) => v.len(),
            ColumnData::U64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds a column from attribute cells of a single type.
    pub fn from_values(ty: AttrType, values: &[AttributeValue]) -> Result<Self, CodecError> {
        let mismatch = |v: &AttributeValue| CodecError::TypeMismatch {
            expected: ty.name(),
            actual: v.attr_type().name(),
        };
        Ok(match ty {
            AttrType::Int => ColumnData::Int(
                values
                    .iter()
                    .map(|v| match v {
                        AttributeValue::Int(x) => Ok(*x),
                        other => Err(mismatch(other)),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            AttrType::Long => ColumnData::Long(
                values
                    .iter()
                    .map(|v| match v {
                        AttributeValue::Long(x) => Ok(*x),
                        other => Err(mismatch(other)),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            AttrType::Double => ColumnData::Double(
                values
                    .iter()
                    .map(|v| match v {
                        AttributeValue::Double(x) => Ok(*x),
                        other => Err(mismatch(other)),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            AttrType::Str => ColumnData::Str(
                values
                    .iter()
                    .map(|v| match v {
                        AttributeValue::Str(x) => Ok(x.clone()),
                        other => Err(mismatch(other)),
                    })
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    pub fn into_values(self) -> Vec<AttributeValue> {
        match self {
            ColumnData::Int(v) => v.into_iter().map(AttributeValue::Int).collect(),
            ColumnData::Long(v) => v.into_iter().map(AttributeValue::Long).collect(),
            ColumnData::Double(v) => v.into_iter().map(AttributeValue::Double).collect(),
            ColumnData::Str(v) => v.into_iter().map(AttributeValue::Str).collect(),
            ColumnData::U64(v) => v.into_iter().map(|x| AttributeValue::Long(x as i64)).collect(),
        }
    }

    /// Size of the plain fixed-width representation (strings: u32 length + bytes).
    pub fn raw_size(&self) -> usize {
        match self {
            ColumnData::Int(v) => 4 * v.len(),
            ColumnData::Long(v) => 8 * v.len(),
            ColumnData::Double(v) => 8 * v.len(),
            ColumnData::U64(v) => 8 * v.len(),
            ColumnData::Str(v) => v.iter().map(|s| 4 + s.len()).sum(),
        }
    }

    fn words(&self) -> Option<Vec<u64>> {
        match self {
            ColumnData::Long(v) => Some(v.iter().map(|&x| x as u64).collect()),
            ColumnData::Double(v) => Some(v.iter().map(|x| x.to_bits()).collect()),
            ColumnData::U64(v) => Some(v.clone()),
            _ => None,
        }
    }

    fn from_words(ty: ColumnType, words: Vec<u64>) -> Self {
        match ty {
            ColumnType::Long => ColumnData::Long(words.into_iter().map(|w| w as i64).collect()),
            ColumnType::Double => ColumnData::Double(words.into_iter().map(f64::from_bits).collect()),
            ColumnType::U64 => ColumnData::U64(words),
            _ => unreachable!("only 64-bit columns are word-encoded"),
        }
    }
}

/// Appends the encoding of `data` under `codec` to `out`.
pub fn encode_column_into(
    out: &mut Vec<u8>,
    data: &ColumnData,
    codec: ColumnCodec,
) -> Result<(), CodecError> {
    let ty = data.column_type();
    if !ty.supported_codecs().contains(&codec) {
        return Err(CodecError::UnsupportedCodec(codec.id()));
    }
    out.push(codec.id());
    write_varint(out, data.len() as u64);
    match (codec, data) {
        (ColumnCodec::None, ColumnData::Int(v)) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        (ColumnCodec::None, ColumnData::Str(v)) => {
            for s in v {
                write_varint(out, s.len() as u64);
                out.extend_from_slice(s.as_bytes());
            }
        }
        (ColumnCodec::None, _) => {
            for w in data.words().expect("64-bit column") {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        (ColumnCodec::Varint, ColumnData::U64(v)) => v.iter().for_each(|&x| write_varint(out, x)),
        (ColumnCodec::ZigzagVarint, ColumnData::Int(v)) => {
            v.iter().for_each(|&x| write_varint(out, zigzag(i64::from(x))))
        }
        (ColumnCodec::ZigzagVarint, ColumnData::Long(v)) => v.iter().for_each(|&x| write_varint(out, zigzag(x))),
        (ColumnCodec::DeltaTs, ColumnData::U64(v)) => {
            if !v.is_empty() {
                delta_ts_write(out, v)?;
            }
        }
        (ColumnCodec::Dfcm, _) => {
            let mut enc = DfcmEncoder::new(DEFAULT_TABLE_BITS);
            data.words().expect("64-bit column").into_iter().for_each(|w| enc.push(w));
            out.extend_from_slice(&enc.finish());
        }
        (ColumnCodec::Dict, ColumnData::Str(v)) => dict_encode(v).write_to(out),
        _ => unreachable!("filtered by supported_codecs"),
    }
    Ok(())
}

pub fn encode_column(data: &ColumnData, codec: ColumnCodec) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::new();
    encode_column_into(&mut out, data, codec)?;
    Ok(out)
}

/// Encodes with the type's default codec, picking the smaller of the
/// candidates where more than one applies.
pub fn encode_column_auto(out: &mut Vec<u8>, data: &ColumnData) -> Result<ColumnCodec, CodecError> {
    let candidates: &[ColumnCodec] = match data {
        ColumnData::Int(_) => &[ColumnCodec::ZigzagVarint],
        ColumnData::Long(_) => &[ColumnCodec::ZigzagVarint, ColumnCodec::Dfcm],
        ColumnData::Double(_) => &[ColumnCodec::None, ColumnCodec::Dfcm],
        ColumnData::Str(_) => &[ColumnCodec::Dict],
        ColumnData::U64(v) if v.windows(2).all(|w| w[0] <= w[1]) => &[ColumnCodec::DeltaTs, ColumnCodec::Dfcm],
        ColumnData::U64(_) => &[ColumnCodec::Varint, ColumnCodec::Dfcm],
    };
    if candidates.len() == 1 || data.is_empty() {
        encode_column_into(out, data, candidates[0])?;
        return Ok(candidates[0]);
    }
    let mut best: Option<(ColumnCodec, Vec<u8>)> = None;
    for &codec in candidates {
        let bytes = encode_column(data, codec)?;
        if best.as_ref().is_none_or(|(_, b)| bytes.len() < b.len()) {
            best = Some((codec, bytes));
        }
    }
    let (codec, bytes) = best.expect("at least one candidate");
    out.extend_from_slice(&bytes);
    Ok(codec)
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8], CodecError> {
    let end = pos.checked_add(n).ok_or(CodecError::TruncatedStream)?;
    let s = bytes.get(*pos..end).ok_or(CodecError::TruncatedStream)?;
    *pos = end;
    Ok(s)
}

/// Decodes one column starting at `*pos`, advancing past it.
pub fn decode_column_at(
    bytes: &[u8],
    pos: &mut usize,
    ty: ColumnType,
) -> Result<(ColumnCodec, ColumnData), CodecError> {
    let id = *take(bytes, pos, 1)?.first().expect("one byte");
    let codec = ColumnCodec::from_id(id)?;
    if !ty.supported_codecs().contains(&codec) {
        return Err(CodecError::UnsupportedCodec(id));
    }
    let n = read_varint(bytes, pos)? as usize;
    // Every codec spends at least one byte per value.
    if n > bytes.len().saturating_sub(*pos) {
        return Err(CodecError::TruncatedStream);
    }
    let data = match (codec, ty) {
        (ColumnCodec::None, ColumnType::Int) => ColumnData::Int(
            (0..n)
                .map(|_| Ok(i32::from_le_bytes(take(bytes, pos, 4)?.try_into().expect("4 bytes"))))
                .collect::<Result<_, CodecError>>()?,
        ),
        (ColumnCodec::None, ColumnType::Str) => ColumnData::Str(
            (0..n)
                .map(|_| {
                    let len = read_varint(bytes, pos)? as usize;
                    let raw = take(bytes, pos, len)?;
                    std::str::from_utf8(raw).map(str::to_owned).map_err(|_| CodecError::InvalidUtf8)
                })
                .collect::<Result<_, CodecError>>()?,
        ),
        (ColumnCodec::None, _) => {
            let words = (0..n)
                .map(|_| Ok(u64::from_le_bytes(take(bytes, pos, 8)?.try_into().expect("8 bytes"))))
                .collect::<Result<_, CodecError>>()?;
            ColumnData::from_words(ty, words)
        }
        (ColumnCodec::Varint, ColumnType::U64) => {
            ColumnData::U64((0..n).map(|_| read_varint(bytes, pos)).collect::<Result<_, _>>()?)
        }
        (ColumnCodec::ZigzagVarint, ColumnType::Int) => ColumnData::Int(
            (0..n)
                .map(|_| {
                    let v = unzigzag(read_varint(bytes, pos)?);
                    i32::try_from(v).map_err(|_| CodecError::VarintOverflow)
                })
                .collect::<Result<_, _>>()?,
        ),
        (ColumnCodec::ZigzagVarint, ColumnType::Long) => ColumnData::Long(
            (0..n)
                .map(|_| read_varint(bytes, pos).map(unzigzag))
                .collect::<Result<_, _>>()?,
        ),
        (ColumnCodec::DeltaTs, ColumnType::U64) => ColumnData::U64(delta_ts_read(bytes, pos, n)?),
        (ColumnCodec::Dfcm, _) => {
            let mut dec = DfcmDecoder::new(&bytes[*pos..], DEFAULT_TABLE_BITS);
            let mut words = Vec::with_capacity(n);
            for _ in 0..n {
                words.push(dec.next_value()?.ok_or(CodecError::TruncatedStream)?);
            }
            *pos += dec.position();
            ColumnData::from_words(ty, words)
        }
        (ColumnCodec::Dict, ColumnType::Str) => {
            let enc = DictEncoded::read_from(bytes, pos)?;
            if enc.codes.len() != n {
                return Err(CodecError::LengthMismatch { expected: n, actual: enc.codes.len() });
            }
            ColumnData::Str(enc.values()?)
        }
        _ => unreachable!("filtered by supported_codecs"),
    };
    Ok((codec, data))
}

pub fn decode_column(bytes: &[u8], ty: ColumnType) -> Result<ColumnData, CodecError> {
    let mut pos = 0;
    let (_, data) = decode_column_at(bytes, &mut pos, ty)?;
    if pos != bytes.len() {
        return Err(CodecError::TrailingBytes);
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_column() -> impl Strategy<Value = ColumnData> {
        prop_oneof![
            proptest::collection::vec(any::<i32>(), 0..20).prop_map(ColumnData::Int),
            proptest::collection::vec(any::<i64>(), 0..20).prop_map(ColumnData::Long),
            proptest::collection::vec(any::<f64>(), 0..20).prop_map(ColumnData::Double),
            proptest::collection::vec("[a-d]{0,3}", 0..20).prop_map(ColumnData::Str),
            proptest::collection::vec(any::<u64>(), 0..20).prop_map(|mut v| {
                v.sort_unstable();
                ColumnData::U64(v)
            }),
        ]
    }

    fn bits_eq(a: &ColumnData, b: &ColumnData) -> bool {
        match (a, b) {
            (ColumnData::Double(x), ColumnData::Double(y)) => {
                x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits())
            }
            _ => a == b,
        }
    }

    #[test]
    fn unsupported_pairs_are_rejected() {
        let strings = ColumnData::Str(vec!["a".into()]);
        assert_eq!(
            encode_column(&strings, ColumnCodec::Dfcm),
            Err(CodecError::UnsupportedCodec(ColumnCodec::Dfcm.id()))
        );
        let unsorted = ColumnData::U64(vec![3, 1]);
        assert!(matches!(
            encode_column(&unsorted, ColumnCodec::DeltaTs),
            Err(CodecError::DecreasingSequence { .. })
        ));
    }

    #[test]
    fn auto_prefers_dfcm_for_constant_longs() {
        let data = ColumnData::Long(vec![i64::MAX - 3; 500]);
        let mut out = Vec::new();
        assert_eq!(encode_column_auto(&mut out, &data).unwrap(), ColumnCodec::Dfcm);
        assert_eq!(decode_column(&out, ColumnType::Long).unwrap(), data);

        let small = ColumnData::Long((0..500).map(|i| (i * 7919) % 100).collect());
        let mut out = Vec::new();
        assert_eq!(encode_column_auto(&mut out, &small).unwrap(), ColumnCodec::ZigzagVarint);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2_000))]

        #[test]
        fn every_supported_codec_round_trips(col in arb_column()) {
            let ty = col.column_type();
            for &codec in ty.supported_codecs() {
                let bytes = encode_column(&col, codec).unwrap();
                let back = decode_column(&bytes, ty).unwrap();
                prop_assert!(bits_eq(&back, &col), "{:?}", codec);
            }
            let mut out = Vec::new();
            encode_column_auto(&mut out, &col).unwrap();
            out.extend_from_slice(&[9, 9]);
            let mut pos = 0;
            let (_, back) = decode_column_at(&out, &mut pos, ty).unwrap();
            prop_assert!(bits_eq(&back, &col));
            prop_assert_eq!(pos, out.len() - 2);
        }
    }
}
