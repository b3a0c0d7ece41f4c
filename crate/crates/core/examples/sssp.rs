//! Weighted and unweighted shortest paths from one source.

use std::sync::Arc;

use tsgraph::algorithms::{sssp, SsspConfig};
use tsgraph::model::{AttrType, AttributeValue, ColumnDef, Edge, GraphSchema};
use tsgraph::partition::PartitionLayout;
use tsgraph::store::{CodecConfig, Graph, GraphWriter, LocalFs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let schema = GraphSchema::new("roads").with_edge_type("road", vec![ColumnDef::new("km", AttrType::Double)]);
    let mut w = GraphWriter::create(Arc::new(LocalFs::new(dir.path())), schema, PartitionLayout::new(2, 4)?, CodecConfig::default())?;
    let roads = [(1, 2, 7.0), (1, 3, 9.0), (1, 6, 14.0), (2, 3, 10.0), (2, 4, 15.0), (3, 4, 11.0), (3, 6, 2.0), (4, 5, 6.0), (6, 5, 9.0), (7, 1, 1.0)];
    for (i, (s, d, km)) in roads.into_iter().enumerate() {
        w.add_edge(Edge::new(s, d, "road", 1_700_000_000_000 + i as u64, vec![AttributeValue::Double(km)]))?;
    }
    w.finish()?;
    let g = Graph::open_local(dir.path(), "roads")?;

    let hops = sssp(g.full(), 1, &SsspConfig::default())?;
    let km = sssp(g.full(), 1, &SsspConfig { weight: Some("km".into()), ..Default::default() })?;
    println!("vertex\thops\tkm");
    for (v, d) in &km.distances {
        println!("{v}\t{}\t{d}", hops.distances[v]);
    }
    println!("{} supersteps for the weighted run", km.stats.supersteps);
    Ok(())
}
