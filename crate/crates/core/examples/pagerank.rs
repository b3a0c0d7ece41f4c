//! PageRank over a random graph, with one and with several workers.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsgraph::algorithms::{pagerank, PageRankConfig};
use tsgraph::model::{Edge, GraphSchema};
use tsgraph::partition::PartitionLayout;
use tsgraph::store::{CodecConfig, Graph, GraphWriter, LocalFs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut w = GraphWriter::create(Arc::new(LocalFs::new(dir.path())), GraphSchema::new("web").with_edge_type("link", vec![]), PartitionLayout::new(3, 8)?, CodecConfig::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..20_000u64 {
        // Skewed towards low ids so a few pages dominate.
        let dst = rng.gen_range(1..2_000u64).min(rng.gen_range(1..2_000));
        w.add_edge(Edge::new(rng.gen_range(1..2_000), dst, "link", 1_700_000_000_000 + i, vec![]))?;
    }
    w.finish()?;
    let g = Graph::open_local(dir.path(), "web")?;

    let one = pagerank(g.full(), PageRankConfig::default())?;
    let four = pagerank(g.full(), PageRankConfig { workers: 4, ..Default::default() })?;
    assert_eq!(one.ranks, four.ranks);

    let mut top: Vec<_> = one.ranks.iter().collect();
    top.sort_by(|a, b| b.1.total_cmp(a.1));
    for (v, r) in top.iter().take(5) {
        println!("{v}\t{r:.6}");
    }
    println!(
        "{} supersteps, {} messages, rank sum {:.12}",
        one.stats.supersteps,
        one.stats.messages_sent,
        one.rank_sums.last().copied().unwrap_or_default()
    );
    Ok(())
}
