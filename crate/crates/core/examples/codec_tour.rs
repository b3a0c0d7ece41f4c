//! Encodes a few columns with each codec and prints the sizes.

use tsgraph::codec::{
    delta_ts_decode, delta_ts_encode, dfcm_decode, dfcm_encode, dict_decode, dict_encode, encode_column_auto,
    general_compress, general_decompress, varint_decode, varint_encode, zigzag, ColumnData, GeneralCodec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let buf = varint_encode(&[300]);
    println!("varint(300) = {buf:02x?} -> {:?}", varint_decode(&buf)?);
    println!("zigzag(-3) = {}", zigzag(-3));

    let ts: Vec<u64> = (0..10_000u64).map(|i| 1_700_000_000_000 + i * 250 + i % 7).collect();
    let delta = delta_ts_encode(&ts)?.to_bytes();
    assert_eq!(delta_ts_decode(&delta)?, ts);
    println!("DELTA_TS: {} timestamps, {} bytes raw, {} encoded", ts.len(), ts.len() * 8, delta.len());

    let temps: Vec<u64> = (0..10_000).map(|i| (20.0 + (i as f64 / 50.0).sin()).to_bits()).collect();
    let dfcm = dfcm_encode(&temps);
    assert_eq!(dfcm_decode(&dfcm)?, temps);
    println!("DFCM: {} doubles, {} bytes raw, {} encoded", temps.len(), temps.len() * 8, dfcm.len());

    let cities: Vec<&str> = (0..10_000).map(|i| ["Oslo", "Lima", "Pune", "Kyiv"][i % 4]).collect();
    let dict = dict_encode(&cities).to_bytes();
    assert_eq!(dict_decode(&dict)?, cities);
    println!("DICT: {} strings, {} bytes raw, {} encoded", cities.len(), cities.iter().map(|c| c.len()).sum::<usize>(), dict.len());

    for g in GeneralCodec::ALL {
        let packed = general_compress(&delta, g)?;
        assert_eq!(general_decompress(&packed, g, delta.len())?, delta);
        println!("DELTA_TS + {}: {} bytes", g.name(), packed.len());
    }

    let mut out = Vec::new();
    let picked = encode_column_auto(&mut out, &ColumnData::U64(ts))?;
    println!("automatic choice for the timestamps: {picked:?} ({} bytes)", out.len());
    Ok(())
}
