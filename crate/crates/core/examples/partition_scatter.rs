//! Shows how the n x n grid spreads each vertex over few edge partitions.
//! The column depends on the destination and the hour, so the 2n - 1 bound
//! on a vertex's union scatter holds within one hour bucket only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsgraph::model::Edge;
use tsgraph::partition::{scatter_report, PartitionLayout};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let hour = 1_699_999_200_000;
    let mut edges_within = |span: u64| -> Vec<Edge> {
        (0..200_000)
            .map(|_| {
                // A few heavy hitters.
                let src = if rng.gen_bool(0.1) { rng.gen_range(1..10) } else { rng.gen_range(1..50_000) };
                Edge::new(src, rng.gen_range(1..50_000), "e", hour + rng.gen_range(0..span), vec![])
            })
            .collect()
    };
    let one_hour = edges_within(3_600_000);
    let one_day = edges_within(86_400_000);

    for n in [2, 4, 8] {
        let layout = PartitionLayout::new(n, 16)?;
        let r = scatter_report(&one_hour, &layout);
        let day = scatter_report(&one_day, &layout);
        println!(
            "n={n}: {} partitions, max src scatter {} (<= {n}), max union {} in one hour (<= {}), {} over a day, max/mean load {:.2}",
            layout.edge_partition_count(),
            r.max_src_scatter(),
            r.max_union_scatter(),
            2 * n - 1,
            day.max_union_scatter(),
            r.max_over_mean_load()
        );
    }

    let layout = PartitionLayout::new(4, 16)?;
    let e = &one_day[0];
    let pid = layout.edge_partition(e.src, e.dst, e.timestamp);
    println!("edge {} -> {} lives in partition {} (row {}, col {})", e.src, e.dst, pid.0, pid.row(4), pid.col(4));
    println!("vertex {} is stored in vertex partition {}", e.src, layout.vertex_partition(e.src));
    Ok(())
}
