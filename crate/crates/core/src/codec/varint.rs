//! LEB128 variable-length integers and zigzag mapping for signed values.

use super::CodecError;

/// Maximum encoded length of a `u64`.
pub const MAX_VARINT_LEN: usize = 10;

#[inline]
pub fn write_varint(out: &mut Vec<u8>, mut value: u64) {
    while value >= 0x80 {
        out.push((value as u8) | 0x80);
        value >>= 7;
    }
    out.push(value as u8);
}

#[inline]
pub fn varint_len(value: u64) -> usize {
    let bits = 64 - value.leading_zeros() as usize;
    bits.max(1).div_ceil(7)
}

/// Reads one varint starting at `*pos`, advancing it.
#[inline]
pub fn read_varint(bytes: &[u8], pos: &mut usize) -> Result<u64, CodecError> {
    let mut result = 0u64;
    let mut shift = 0u32;
    loop {
        let Some(&byte) = bytes.get(*pos) else {
            return Err(CodecError::TruncatedStream);
        };
        *pos += 1;
        if shift == 63 && byte > 1 {
            return Err(CodecError::VarintOverflow);
        }
        result |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return Ok(result);
        }
        shift += 7;
        if shift > 63 {
            return Err(CodecError::VarintOverflow);
        }
    }
}

pub fn varint_encode(values: &[u64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        write_varint(&mut out, v);
    }
    out
}

/// Decodes varints until the input is exhausted.
pub fn varint_decode(bytes: &[u8]) -> Result<Vec<u64>, CodecError> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        out.push(read_varint(bytes, &mut pos)?);
    }
    Ok(out)
}

#[inline]
pub fn zigzag(value: i64) -> u64 {
    ((value << 1) ^ (value >> 63)) as u64
}

#[inline]
pub fn unzigzag(value: u64) -> i64 {
    ((value >> 1) as i64) ^ -((value & 1) as i64)
}

pub fn zigzag_varint_encode(values: &[i64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        write_varint(&mut out, zigzag(v));
    }
    out
}

pub fn zigzag_varint_decode(bytes: &[u8]) -> Result<Vec<i64>, CodecError> {
    Ok(varint_decode(bytes)?.into_iter().map(unzigzag).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_byte_boundaries() {
        assert_eq!(varint_encode(&[127]), vec![0x7f]);
        assert_eq!(varint_encode(&[128]), vec![0x80, 0x01]);
        assert_eq!(varint_encode(&[0]), vec![0x00]);
        assert_eq!(varint_encode(&[u64::MAX]).len(), MAX_VARINT_LEN);
    }

    #[test]
    fn zigzag_small_values() {
        assert_eq!(zigzag(0), 0);
        assert_eq!(zigzag(-1), 1);
        assert_eq!(zigzag(1), 2);
        assert_eq!(zigzag(i64::MIN), u64::MAX);
        assert_eq!(unzigzag(u64::MAX), i64::MIN);
    }

    #[test]
    fn truncated_and_overflowing_input() {
        assert_eq!(varint_decode(&[0x80]), Err(CodecError::TruncatedStream));
        let mut too_long = vec![0xff; 10];
        too_long.push(0x01);
        assert_eq!(varint_decode(&too_long), Err(CodecError::VarintOverflow));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn varint_round_trip(values in proptest::collection::vec(any::<u64>(), 0..16)) {
            let bytes = varint_encode(&values);
            prop_assert_eq!(bytes.len(), values.iter().map(|&v| varint_len(v)).sum::<usize>());
            prop_assert_eq!(varint_decode(&bytes).unwrap(), values);
        }

        #[test]
        fn zigzag_round_trip(values in proptest::collection::vec(any::<i64>(), 0..16)) {
            for &v in &values {
                prop_assert_eq!(unzigzag(zigzag(v)), v);
            }
            prop_assert_eq!(zigzag_varint_decode(&zigzag_varint_encode(&values)).unwrap(), values);
        }
    }
}
