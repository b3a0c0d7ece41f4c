//! Benchmarks every codec pairing on synthetic columns.

use tsgraph::codec::bench::{bench_codecs, default_specs, render_table, synthetic_column, SyntheticKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count = std::env::args().nth(1).map_or(Ok(100_000), |a| a.parse())?;
    for kind in [SyntheticKind::Timestamps, SyntheticKind::SmoothDoubles, SyntheticKind::Longs, SyntheticKind::Categories] {
        let data = synthetic_column(kind, count, 7);
        let rows = bench_codecs(&data, &default_specs(data.column_type()), 8192)?;
        println!("{kind:?} ({count} values)");
        print!("{}", render_table(&rows));
        println!();
    }
    Ok(())
}
