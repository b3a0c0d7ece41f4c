//! Predictive compression for streams of 64-bit words (raw bit patterns of
//! `Long` and `Double` columns).
//!
//! Two hash-indexed predictors run side by side: a finite context method
//! (FCM) table that remembers the value which followed a context, and a
//! differential FCM (DCM) table that remembers the stride which followed a
//! stride context. Each value is XORed with whichever prediction leaves more
//! leading zero bytes, and only the non-zero tail of the residual is stored.
//!
//! Per-value layout:
//!
//! ```text
//! header  bit 7     predictor (0 = FCM, 1 = DCM)
//!         bits 6..4 leading zero byte count, clamped to 7
//!         bits 3..0 reserved, always 0
//! residual  (8 - count) bytes, little-endian low bytes of the XOR
//! ```
//!
//! A perfect prediction is written as count 7 followed by a single `0x00`.

use super::CodecError;

pub const DEFAULT_TABLE_BITS: u32 = 16;
pub const MAX_TABLE_BITS: u32 = 24;

const SELECT_DCM: u8 = 0x80;
const COUNT_SHIFT: u32 = 4;
const RESERVED_MASK: u8 = 0x0f;

/// Predictor tables and history registers shared by encoder and decoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DfcmState {
    mask: u64,
    fcm: Vec<u64>,
    dcm: Vec<u64>,
    fcm_hash: u64,
    dcm_hash: u64,
    last: u64,
}

impl DfcmState {
    pub fn new(table_bits: u32) -> Self {
        assert!(
            (1..=MAX_TABLE_BITS).contains(&table_bits),
            "table_bits must be in 1..={MAX_TABLE_BITS}"
        );
        let size = 1usize << table_bits;
        Self {
            mask: size as u64 - 1,
            fcm: vec![0; size],
            dcm: vec![0; size],
            fcm_hash: 0,
            dcm_hash: 0,
            last: 0,
        }
    }

    /// `(fcm prediction, dcm prediction)` for the next value.
    #[inline]
    fn predict(&self) -> (u64, u64) {
        let fcm = self.fcm[self.fcm_hash as usize];
        let dcm = self.last.wrapping_add(self.dcm[self.dcm_hash as usize]);
        (fcm, dcm)
    }

    #[inline]
    fn update(&mut self, value: u64) {
        self.fcm[self.fcm_hash as usize] = value;
        self.fcm_hash = ((self.fcm_hash << 6) ^ (value >> 48)) & self.mask;

        let stride = value.wrapping_sub(self.last);
        self.dcm[self.dcm_hash as usize] = stride;
        self.dcm_hash = ((self.dcm_hash << 6) ^ (stride >> 48)) & self.mask;
        self.last = value;
    }

    /// Order-sensitive digest of the full state, for cheap comparisons.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |w: u64| {
            h ^= w;
            h = h.wrapping_mul(0x0100_0000_01b3);
        };
        self.fcm.iter().chain(&self.dcm).copied().for_each(&mut mix);
        mix(self.fcm_hash);
        mix(self.dcm_hash);
        mix(self.last);
        h
    }
}

#[inline]
fn leading_zero_bytes(x: u64) -> u32 {
    x.leading_zeros() / 8
}

pub struct DfcmEncoder {
    state: DfcmState,
    out: Vec<u8>,
}

impl DfcmEncoder {
    pub fn new(table_bits: u32) -> Self {
        Self { state: DfcmState::new(table_bits), out: Vec::new() }
    }

    pub fn push(&mut self, value: u64) {
        let (fcm, dcm) = self.state.predict();
        let (x_fcm, x_dcm) = (value ^ fcm, value ^ dcm);
        let (lz_fcm, lz_dcm) = (leading_zero_bytes(x_fcm), leading_zero_bytes(x_dcm));
        let (select, residual, lz) = if lz_fcm >= lz_dcm {
            (0, x_fcm, lz_fcm)
        } else {
            (SELECT_DCM, x_dcm, lz_dcm)
        };
        let count = lz.min(7);
        self.out.push(select | ((count as u8) << COUNT_SHIFT));
        self.out.extend_from_slice(&residual.to_le_bytes()[..(8 - count) as usize]);
        self.state.update(value);
    }

    pub fn state(&self) -> &DfcmState {
        &self.state
    }

    pub fn bytes(&self) -> &[u8] {
        &self.out
    }

    pub fn finish(self) -> Vec<u8> {
        self.out
    }
}

pub struct DfcmDecoder<'a> {
    state: DfcmState,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> DfcmDecoder<'a> {
    pub fn new(bytes: &'a [u8], table_bits: u32) -> Self {
        Self { state: DfcmState::new(table_bits), bytes, pos: 0 }
    }

    pub fn state(&self) -> &DfcmState {
        &self.state
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn next_value(&mut self) -> Result<Option<u64>, CodecError> {
        let Some(&header) = self.bytes.get(self.pos) else {
            return Ok(None);
        };
        if header & RESERVED_MASK != 0 {
            return Err(CodecError::InvalidHeader(header));
        }
        let count = ((header >> COUNT_SHIFT) & 0x07) as usize;
        let len = 8 - count;
        let tail = self
            .bytes
            .get(self.pos + 1..self.pos + 1 + len)
            .ok_or(CodecError::TruncatedStream)?;
        let mut word = [0u8; 8];
        word[..len].copy_from_slice(tail);
        let residual = u64::from_le_bytes(word);

        let (fcm, dcm) = self.state.predict();
        let prediction = if header & SELECT_DCM != 0 { dcm } else { fcm };
        let value = residual ^ prediction;
        self.state.update(value);
        self.pos += 1 + len;
        Ok(Some(value))
    }
}

pub fn dfcm_encode(values: &[u64]) -> Vec<u8> {
    dfcm_encode_with(values, DEFAULT_TABLE_BITS)
}

pub fn dfcm_encode_with(values: &[u64], table_bits: u32) -> Vec<u8> {
    let mut enc = DfcmEncoder::new(table_bits);
    values.iter().for_each(|&v| enc.push(v));
    enc.finish()
}

pub fn dfcm_decode(bytes: &[u8]) -> Result<Vec<u64>, CodecError> {
    dfcm_decode_with(bytes, DEFAULT_TABLE_BITS)
}

pub fn dfcm_decode_with(bytes: &[u8], table_bits: u32) -> Result<Vec<u64>, CodecError> {
    let mut dec = DfcmDecoder::new(bytes, table_bits);
    let mut out = Vec::with_capacity(bytes.len() / 2);
    while let Some(v) = dec.next_value()? {
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_sequence_settles_to_sentinel_bytes() {
        let x = 0x4059_0000_0000_0000u64; // 100.0
        let values = vec![x; 64];
        let bytes = dfcm_encode(&values);
        // Each value after warm-up costs a header plus the 0x00 sentinel.
        let tail = &bytes[bytes.len() - 2 * 32..];
        for pair in tail.chunks(2) {
            assert_eq!(pair[0] & 0x70, 0x70);
            assert_eq!(pair[1], 0x00);
        }
        assert_eq!(dfcm_decode(&bytes).unwrap(), values);
    }

    #[test]
    fn arithmetic_sequence_is_predicted_by_dcm() {
        let values: Vec<u64> = (0..256u64).map(|i| 1_000_000 + 37 * i).collect();
        let bytes = dfcm_encode(&values);
        let mut dec = DfcmDecoder::new(&bytes, DEFAULT_TABLE_BITS);
        for _ in 0..8 {
            dec.next_value().unwrap();
        }
        let rest = &bytes[dec.position()..];
        assert_eq!(rest.len(), 2 * (256 - 8));
        for pair in rest.chunks(2) {
            assert_eq!(pair, [SELECT_DCM | 0x70, 0x00]);
        }
    }

    #[test]
    fn random_doubles_round_trip_bit_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let values: Vec<u64> = (0..10_000).map(|_| rng.gen::<f64>().to_bits()).collect();
        assert_eq!(dfcm_decode(&dfcm_encode(&values)).unwrap(), values);
    }

    #[test]
    fn malformed_input_is_reported() {
        assert_eq!(dfcm_decode(&[0x00, 1, 2]), Err(CodecError::TruncatedStream));
        assert_eq!(dfcm_decode(&[0x01]), Err(CodecError::InvalidHeader(0x01)));
        assert_eq!(dfcm_decode(&[]).unwrap(), Vec::<u64>::new());
    }

    #[test]
    fn encoder_and_decoder_states_track_each_other() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let values: Vec<u64> = (0..500)
            .map(|i| if i % 3 == 0 { rng.gen() } else { (i as f64 * 0.5).to_bits() })
            .collect();
        let mut enc = DfcmEncoder::new(10);
        let mut consumed = 0;
        for &v in &values {
            enc.push(v);
            let mut dec = DfcmDecoder::new(enc.bytes(), 10);
            while dec.next_value().unwrap().is_some() {}
            consumed += 1;
            assert_eq!(dec.state().checksum(), enc.state().checksum(), "after {consumed} values");
        }
        assert_eq!(consumed, values.len());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn round_trip(values in proptest::collection::vec(any::<u64>(), 0..32), bits in 1u32..12) {
            let bytes = dfcm_encode_with(&values, bits);
            prop_assert_eq!(dfcm_decode_with(&bytes, bits).unwrap(), values);
        }
    }
}
