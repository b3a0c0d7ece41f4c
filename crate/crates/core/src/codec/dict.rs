//! Dictionary encoding for string columns.

use std::collections::HashMap;

use super::varint::{read_varint, write_varint};
use super::CodecError;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DictEncoded {
    /// Distinct values in first-occurrence order.
    pub dictionary: Vec<String>,
    pub codes: Vec<u32>,
}

pub fn dict_encode<S: AsRef<str>>(values: &[S]) -> DictEncoded {
    let mut lookup: HashMap<&str, u32> = HashMap::new();
    let mut dictionary = Vec::new();
    let mut codes = Vec::with_capacity(values.len());
    for v in values {
        let v = v.as_ref();
        let code = *lookup.entry(v).or_insert_with(|| {
            dictionary.push(v.to_owned());
            (dictionary.len() - 1) as u32
        });
        codes.push(code);
    }
    DictEncoded { dictionary, codes }
}

impl DictEncoded {
    pub fn values(&self) -> Result<Vec<String>, CodecError> {
        self.codes
            .iter()
            .map(|&c| {
                self.dictionary
                    .get(c as usize)
                    .cloned()
                    .ok_or(CodecError::DictionaryCode(c))
            })
            .collect()
    }

    /// `varint dict_len, (varint len, bytes)*, varint n, varint code*`
    pub fn write_to(&self, out: &mut Vec<u8>) {
        write_varint(out, self.dictionary.len() as u64);
        for s in &self.dictionary {
            write_varint(out, s.len() as u64);
            out.extend_from_slice(s.as_bytes());
        }
        write_varint(out, self.codes.len() as u64);
        for &c in &self.codes {
            write_varint(out, u64::from(c));
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out);
        out
    }

    pub fn read_from(bytes: &[u8], pos: &mut usize) -> Result<Self, CodecError> {
        let dict_len = read_varint(bytes, pos)? as usize;
        let mut dictionary = Vec::with_capacity(dict_len.min(bytes.len()));
        for _ in 0..dict_len {
            let len = read_varint(bytes, pos)? as usize;
            let end = pos.checked_add(len).ok_or(CodecError::TruncatedStream)?;
            let raw = bytes.get(*pos..end).ok_or(CodecError::TruncatedStream)?;
            let s = std::str::from_utf8(raw).map_err(|_| CodecError::InvalidUtf8)?;
            dictionary.push(s.to_owned());
            *pos = end;
        }
        let n = read_varint(bytes, pos)? as usize;
        let mut codes = Vec::with_capacity(n.min(bytes.len()));
        for _ in 0..n {
            let c = read_varint(bytes, pos)?;
            if c >= dict_len as u64 {
                return Err(CodecError::DictionaryCode(c as u32));
            }
            codes.push(c as u32);
        }
        Ok(Self { dictionary, codes })
    }
}

pub fn dict_decode(bytes: &[u8]) -> Result<Vec<String>, CodecError> {
    let mut pos = 0;
    let enc = DictEncoded::read_from(bytes, &mut pos)?;
    if pos != bytes.len() {
        return Err(CodecError::TrailingBytes);
    }
    enc.values()
}
