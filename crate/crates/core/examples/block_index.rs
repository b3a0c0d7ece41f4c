//! Compares the range and bloom block indexes on a selective lookup.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsgraph::model::{Edge, GraphSchema};
use tsgraph::partition::PartitionLayout;
use tsgraph::store::{CodecConfig, EdgeFilter, Graph, GraphWriter, IndexKind, LocalFs, ScanOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let edges: Vec<Edge> = (0..100_000u64)
        .map(|i| Edge::new(rng.gen_range(1..50_000), rng.gen_range(1..50_000), "e", 1_700_000_000_000 + i, vec![]))
        .collect();

    for kind in [IndexKind::None, IndexKind::Range, IndexKind::Bloom] {
        let dir = tempfile::tempdir()?;
        let codecs = CodecConfig { struct_index: kind, block_target_bytes: 4096, ..Default::default() };
        let mut w = GraphWriter::create(Arc::new(LocalFs::new(dir.path())), GraphSchema::new("g").with_edge_type("e", vec![]), PartitionLayout::new(1, 4)?, codecs)?;
        for e in &edges {
            w.add_edge(e.clone())?;
        }
        w.finish()?;

        let g = Graph::open_local(dir.path(), "g")?;
        let probe = edges[17].src;
        let before = g.counters().snapshot();
        let found = g.full().read_edges(0, &EdgeFilter::Src([probe].into()), &ScanOptions::default())?;
        let after = g.counters().snapshot();
        println!(
            "{kind:?}: {} out-edges of {probe}, {} blocks read, {} skipped",
            found.len(),
            after.struct_blocks_read - before.struct_blocks_read,
            after.blocks_skipped - before.blocks_skipped
        );
    }
    Ok(())
}
