//! Per-block bloom filters over 64-bit ids, probed with double hashing.

use crate::partition::mix64;

const SEED_A: u64 = 0x6a09_e667_f3bc_c908;
const SEED_B: u64 = 0xbb67_ae85_84ca_a73b;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BloomFilter {
    bits: Vec<u8>,
    m: u32,
    k: u8,
}

impl BloomFilter {
    /// Sizes a filter for `n` items at false-positive rate `fp`:
    /// `m = ceil(-n ln fp / ln² 2)`, `k = round(m / n · ln 2)`.
    pub fn with_rate(n: usize, fp: f64) -> Self {
        assert!(fp > 0.0 && fp < 1.0, "false-positive rate must be in (0, 1)");
        let ln2 = std::f64::consts::LN_2;
        let m = if n == 0 { 8.0 } else { (-(n as f64) * fp.ln() / (ln2 * ln2)).ceil().max(8.0) };
        let m = m.min(u32::MAX as f64) as u32;
        let k = if n == 0 { 1.0 } else { (f64::from(m) / n as f64 * ln2).round().clamp(1.0, 30.0) };
        Self { bits: vec![0; (m as usize).div_ceil(8)], m, k: k as u8 }
    }

    pub fn build(ids: impl IntoIterator<Item = u64>, count: usize, fp: f64) -> Self {
        let mut f = Self::with_rate(count, fp);
        ids.into_iter().for_each(|id| f.insert(id));
        f
    }

    pub fn num_bits(&self) -> u32 {
        self.m
    }

    pub fn num_hashes(&self) -> u8 {
        self.k
    }

    #[inline]
    fn positions(m: u32, k: u8, id: u64) -> impl Iterator<Item = usize> {
        let h1 = mix64(id ^ SEED_A);
        let h2 = mix64(id ^ SEED_B) | 1;
        let m = u64::from(m);
        (0..u64::from(k)).map(move |i| (h1.wrapping_add(i.wrapping_mul(h2)) % m) as usize)
    }

    pub fn insert(&mut self, id: u64) {
        for p in Self::positions(self.m, self.k, id) {
            self.bits[p / 8] |= 1 << (p % 8);
        }
    }

    pub fn contains(&self, id: u64) -> bool {
        Self::positions(self.m, self.k, id).all(|p| self.bits[p / 8] & (1 << (p % 8)) != 0)
    }

    /// `u32 m, u8 k, u32 byte_len, bits`
    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.m.to_le_bytes());
        out.push(self.k);
        out.extend_from_slice(&(self.bits.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.bits);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 + self.bits.len());
        self.write_to(&mut out);
        out
    }

    pub fn read_from(bytes: &[u8], pos: &mut usize) -> Option<Self> {
        let m = u32::from_le_bytes(bytes.get(*pos..*pos + 4)?.try_into().ok()?);
        let k = *bytes.get(*pos + 4)?;
        let len = u32::from_le_bytes(bytes.get(*pos + 5..*pos + 9)?.try_into().ok()?) as usize;
        let bits = bytes.get(*pos + 9..*pos + 9 + len)?.to_vec();
        if m == 0 || k == 0 || len != (m as usize).div_ceil(8) {
            return None;
        }
        *pos += 9 + len;
        Some(Self { bits, m, k })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn sizing_formula() {
        let f = BloomFilter::with_rate(10_000, 0.01);
        // -1e4 * ln(0.01) / ln(2)^2 = 95850.58...
        assert_eq!(f.num_bits(), 95_851);
        assert_eq!(f.num_hashes(), 7);
    }

    #[test]
    fn empty_filter_rejects_everything() {
        let f = BloomFilter::with_rate(0, 0.01);
        assert!((1..1000).all(|id| !f.contains(id)));
    }

    #[test]
    fn no_false_negatives_and_bounded_false_positives() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let ids: Vec<u64> = (0..10_000).map(|_| rng.gen()).collect();
        let f = BloomFilter::build(ids.iter().copied(), ids.len(), 0.01);
        assert!(ids.iter().all(|&id| f.contains(id)));
        let inserted: std::collections::HashSet<u64> = ids.into_iter().collect();
        let mut fp = 0;
        let mut probes = 0;
        while probes < 100_000 {
            let id: u64 = rng.gen();
            if inserted.contains(&id) {
                continue;
            }
            probes += 1;
            fp += usize::from(f.contains(id));
        }
        assert!((fp as f64 / probes as f64) <= 0.02, "fp rate {}", fp as f64 / probes as f64);
    }

    #[test]
    fn serialization_round_trip() {
        let f = BloomFilter::build([3u64, 5, 8], 3, 0.05);
        let bytes = f.to_bytes();
        let mut pos = 0;
        assert_eq!(BloomFilter::read_from(&bytes, &mut pos), Some(f));
        assert_eq!(pos, bytes.len());
        assert_eq!(BloomFilter::read_from(&bytes[..bytes.len() - 1], &mut 0), None);
    }
}
