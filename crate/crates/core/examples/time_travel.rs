//! Reads the same graph as of different moments.

use std::sync::Arc;

use tsgraph::model::{AttrType, AttributeValue, Edge, GraphSchema, TimeRange, VertexUpdate};
use tsgraph::partition::PartitionLayout;
use tsgraph::store::{CodecConfig, Graph, GraphWriter, LocalFs, ScanOptions};

const HOUR: u64 = 3_600_000;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let schema = GraphSchema::new("social").with_edge_type("follow", vec![]).with_vertex_attr("city", AttrType::Str);
    let backend = Arc::new(LocalFs::new(dir.path()));
    let mut w = GraphWriter::create(backend, schema, PartitionLayout::new(2, 2)?, CodecConfig::default())?;
    let t0 = 1_700_000_000_000;
    for (src, dst, h) in [(1, 2, 0), (2, 3, 1), (3, 1, 2), (1, 3, 5), (4, 1, 30)] {
        w.add_edge(Edge::new(src, dst, "follow", t0 + h * HOUR, vec![]))?;
    }
    for (city, h) in [("Oslo", 0), ("Lima", 3), ("Pune", 26)] {
        w.add_vertex_update(VertexUpdate { vertex: 1, attr: "city".into(), timestamp: t0 + h * HOUR, value: AttributeValue::Str(city.into()) })?;
    }
    w.finish()?;

    let g = Graph::open_local(dir.path(), "social")?;
    for h in [0, 2, 4, 30] {
        let view = g.at(t0 + h * HOUR);
        let edges = view.read_all_edges(&ScanOptions::default())?;
        let city = view.attribute_at(1, "city")?.map_or("absent".to_string(), |v| v.to_string());
        println!("after {h:>2}h: {} edges, vertex 1 lives in {city}", edges.len());
    }

    let window = g.view(TimeRange::new(t0 + HOUR, t0 + 5 * HOUR).expect("ordered range"));
    for e in window.read_all_edges(&ScanOptions::default())? {
        println!("between 1h and 5h: {} -> {}", e.src, e.dst);
    }
    Ok(())
}
