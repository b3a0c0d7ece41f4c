//! Timestamp offset compression: the first value is stored as a full
//! little-endian `u64`, every following value as a varint delta from its
//! predecessor.

use super::varint::{read_varint, write_varint};
use super::CodecError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaEncoded {
    pub base: u64,
    pub deltas: Vec<u8>,
}

impl DeltaEncoded {
    pub fn encoded_len(&self) -> usize {
        8 + self.deltas.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.write_to(&mut out);
        out
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.base.to_le_bytes());
        out.extend_from_slice(&self.deltas);
    }
}

pub fn delta_ts_encode(timestamps: &[u64]) -> Result<DeltaEncoded, CodecError> {
    let (&base, rest) = timestamps.split_first().ok_or(CodecError::EmptyInput)?;
    let mut deltas = Vec::with_capacity(rest.len());
    let mut prev = base;
    for (i, &t) in rest.iter().enumerate() {
        if t < prev {
            return Err(CodecError::DecreasingSequence { index: i + 1 });
        }
        write_varint(&mut deltas, t - prev);
        prev = t;
    }
    Ok(DeltaEncoded { base, deltas })
}

/// Appends the encoding of `timestamps` to `out`.
pub fn delta_ts_write(out: &mut Vec<u8>, timestamps: &[u64]) -> Result<(), CodecError> {
    delta_ts_encode(timestamps)?.write_to(out);
    Ok(())
}

/// Reads exactly `count` timestamps starting at `*pos`.
pub fn delta_ts_read(bytes: &[u8], pos: &mut usize, count: usize) -> Result<Vec<u64>, CodecError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let base_bytes = bytes.get(*pos..*pos + 8).ok_or(CodecError::TruncatedStream)?;
    let mut prev = u64::from_le_bytes(base_bytes.try_into().expect("8 bytes"));
    *pos += 8;
    let mut out = Vec::with_capacity(count);
    out.push(prev);
    for _ in 1..count {
        let delta = read_varint(bytes, pos)?;
        prev = prev.checked_add(delta).ok_or(CodecError::VarintOverflow)?;
        out.push(prev);
    }
    Ok(out)
}

/// Decodes a complete buffer produced by [`DeltaEncoded::to_bytes`].
pub fn delta_ts_decode(bytes: &[u8]) -> Result<Vec<u64>, CodecError> {
    if bytes.len() < 8 {
        return Err(CodecError::TruncatedStream);
    }
    let mut prev = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"));
    let mut out = vec![prev];
    let mut pos = 8;
    while pos < bytes.len() {
        let delta = read_varint(bytes, &mut pos)?;
        prev = prev.checked_add(delta).ok_or(CodecError::VarintOverflow)?;
        out.push(prev);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn forced_by_definition() {
        let e = delta_ts_encode(&[1000, 1005, 1012]).unwrap();
        assert_eq!(e.base, 1000);
        assert_eq!(e.deltas, vec![5, 7]);

        let e = delta_ts_encode(&[42]).unwrap();
        assert_eq!(e.base, 42);
        assert!(e.deltas.is_empty());
    }

    #[test]
    fn rejects_unsorted_and_empty() {
        assert_eq!(
            delta_ts_encode(&[5, 4]),
            Err(CodecError::DecreasingSequence { index: 1 })
        );
        assert_eq!(delta_ts_encode(&[]), Err(CodecError::EmptyInput));
    }

    #[test]
    fn evenly_spaced_timestamps_halve_the_size() {
        let ts: Vec<u64> = (0..10_000u64).map(|i| 1_600_000_000_000 + i * 100).collect();
        let e = delta_ts_encode(&ts).unwrap();
        assert!(e.encoded_len() * 2 <= ts.len() * 8, "{} bytes", e.encoded_len());
        assert_eq!(delta_ts_decode(&e.to_bytes()).unwrap(), ts);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn round_trip_and_size_bound(
            base in 1u64..(1u64 << 50),
            gaps in proptest::collection::vec(0u64..(1u64 << 28), 0..64),
        ) {
            let mut ts = vec![base];
            for g in gaps {
                let next = *ts.last().unwrap() + g;
                ts.push(next);
            }
            let e = delta_ts_encode(&ts).unwrap();
            prop_assert!(e.encoded_len() <= 8 + 4 * (ts.len() - 1));
            let bytes = e.to_bytes();
            prop_assert_eq!(delta_ts_decode(&bytes).unwrap(), ts.clone());
            let mut pos = 0;
            prop_assert_eq!(delta_ts_read(&bytes, &mut pos, ts.len()).unwrap(), ts);
            prop_assert_eq!(pos, bytes.len());
        }
    }
}
