//! Codec comparison harness: encodes a column block by block under each
//! requested (column codec, general compressor) pair and reports encode
//! time, decode time and size ratio.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::column::{ColumnData, ColumnType};
use super::{CodecError, ColumnCodec, EncodedBlock, GeneralCodec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchSpec {
    pub column: ColumnCodec,
    pub general: GeneralCodec,
}

impl BenchSpec {
    pub fn new(column: ColumnCodec, general: GeneralCodec) -> Self {
        Self { column, general }
    }

    pub fn label(&self) -> String {
        format!("{}+{}", self.column.name(), self.general.name().to_ascii_uppercase())
    }
}

impl std::str::FromStr for BenchSpec {
    type Err = String;

    /// `COLUMN` or `COLUMN+GENERAL`, e.g. `delta_ts+zstd`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (col, gen) = s.split_once('+').unwrap_or((s, "none"));
        Ok(Self { column: col.parse()?, general: gen.parse()? })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub codec: String,
    pub encode_ms: f64,
    pub decode_ms: f64,
    pub raw_bytes: usize,
    pub encoded_bytes: usize,
    pub ratio: f64,
}

/// Every supported column codec crossed with every general compressor.
pub fn default_specs(ty: ColumnType) -> Vec<BenchSpec> {
    ty.supported_codecs()
        .iter()
        .flat_map(|&c| GeneralCodec::ALL.into_iter().map(move |g| BenchSpec::new(c, g)))
        .collect()
}

fn slice(data: &ColumnData, start: usize, end: usize) -> ColumnData {
    match data {
        ColumnData::Int(v) => ColumnData::Int(v[start..end].to_vec()),
        ColumnData::Long(v) => ColumnData::Long(v[start..end].to_vec()),
        ColumnData::Double(v) => ColumnData::Double(v[start..end].to_vec()),
        ColumnData::Str(v) => ColumnData::Str(v[start..end].to_vec()),
        ColumnData::U64(v) => ColumnData::U64(v[start..end].to_vec()),
    }
}

fn same_bits(a: &ColumnData, b: &ColumnData) -> bool {
    match (a, b) {
        (ColumnData::Double(x), ColumnData::Double(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits())
        }
        _ => a == b,
    }
}

pub fn bench_codecs(
    input: &ColumnData,
    specs: &[BenchSpec],
    block_values: usize,
) -> Result<Vec<BenchRow>, CodecError> {
    if input.is_empty() {
        return Err(CodecError::EmptyInput);
    }
    let ty = input.column_type();
    for spec in specs {
        if !ty.supported_codecs().contains(&spec.column) {
            return Err(CodecError::UnsupportedCodec(spec.column.id()));
        }
    }
    let block_values = block_values.max(1);
    let blocks: Vec<ColumnData> = (0..input.len())
        .step_by(block_values)
        .map(|start| slice(input, start, (start + block_values).min(input.len())))
        .collect();
    let raw_bytes = input.raw_size();

    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let started = Instant::now();
        let encoded = blocks
            .iter()
            .map(|b| EncodedBlock::encode(b, spec.column, spec.general))
            .collect::<Result<Vec<_>, _>>()?;
        let encode_ms = started.elapsed().as_secs_f64() * 1e3;

        let started = Instant::now();
        let decoded = encoded
            .iter()
            .map(|b| b.decode(ty))
            .collect::<Result<Vec<_>, _>>()?;
        let decode_ms = started.elapsed().as_secs_f64() * 1e3;

        for (orig, back) in blocks.iter().zip(&decoded) {
            if !same_bits(orig, back) {
                return Err(CodecError::LengthMismatch { expected: orig.len(), actual: back.len() });
            }
        }
        let encoded_bytes: usize = encoded.iter().map(|b| b.payload.len()).sum();
        rows.push(BenchRow {
            codec: spec.label(),
            encode_ms,
            decode_ms,
            raw_bytes,
            encoded_bytes,
            ratio: encoded_bytes as f64 / raw_bytes as f64,
        });
    }
    Ok(rows)
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<22} {:>12} {:>12} {:>14} {:>14} {:>8}\n",
        "codec", "encode_ms", "decode_ms", "raw_bytes", "encoded_bytes", "ratio"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<22} {:>12.3} {:>12.3} {:>14} {:>14} {:>8.4}\n",
            r.codec, r.encode_ms, r.decode_ms, r.raw_bytes, r.encoded_bytes, r.ratio
        ));
    }
    out
}

/// Parses one value per line (blank lines skipped).
pub fn parse_column(text: &str, ty: ColumnType) -> Result<ColumnData, String> {
    let mut col = ColumnData::empty(ty);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let bad = |e: &dyn std::fmt::Display| format!("line {}: {e}", i + 1);
        match &mut col {
            ColumnData::Int(v) => v.push(line.trim().parse().map_err(|e| bad(&e))?),
            ColumnData::Long(v) => v.push(line.trim().parse().map_err(|e| bad(&e))?),
            ColumnData::Double(v) => v.push(line.trim().parse().map_err(|e| bad(&e))?),
            ColumnData::U64(v) => v.push(line.trim().parse().map_err(|e| bad(&e))?),
            ColumnData::Str(v) => v.push(line.to_owned()),
        }
    }
    Ok(col)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Ascending millisecond timestamps with gaps below one second.
    Timestamps,
    /// A noisy sine wave sampled at a fixed step.
    SmoothDoubles,
    /// A small-step random walk.
    Longs,
    /// Three distinct category strings.
    Categories,
}

impl std::str::FromStr for SyntheticKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "timestamps" => Ok(SyntheticKind::Timestamps),
            "doubles" => Ok(SyntheticKind::SmoothDoubles),
            "longs" => Ok(SyntheticKind::Longs),
            "categories" => Ok(SyntheticKind::Categories),
            other => Err(format!("unknown synthetic column {other:?}")),
        }
    }
}

pub fn synthetic_column(kind: SyntheticKind, n: usize, seed: u64) -> ColumnData {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    match kind {
        SyntheticKind::Timestamps => {
            let mut t = 1_600_000_000_000u64;
            ColumnData::U64(
                (0..n)
                    .map(|_| {
                        t += rng.gen_range(0..1000);
                        t
                    })
                    .collect(),
            )
        }
        SyntheticKind::SmoothDoubles => ColumnData::Double(
            (0..n)
                .map(|i| {
                    let x = i as f64 * 1e-3;
                    (100.0 * x.sin() * 16.0).round() / 16.0 + 250.0
                })
                .collect(),
        ),
        SyntheticKind::Longs => {
            let mut v = 0i64;
            ColumnData::Long(
                (0..n)
                    .map(|_| {
                        v += rng.gen_range(-50..=50);
                        v
                    })
                    .collect(),
            )
        }
        SyntheticKind::Categories => {
            const CATS: [&str; 3] = ["follow", "comment", "transfer"];
            ColumnData::Str((0..n).map(|_| CATS[rng.gen_range(0..3)].to_owned()).collect())
        }
    }
}
