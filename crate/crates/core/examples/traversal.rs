//! k-hop neighborhoods and filtered neighbor counts on a snapshot.

use std::sync::Arc;

use tsgraph::algorithms::{filtered_neighbor_count, k_degree_query, VertexPredicate};
use tsgraph::engine::{traverse, Direction, TraverseOptions};
use tsgraph::model::{AttrType, AttributeValue, Edge, GraphSchema, VertexUpdate};
use tsgraph::partition::PartitionLayout;
use tsgraph::store::{CodecConfig, Graph, GraphWriter, LocalFs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let schema = GraphSchema::new("g").with_edge_type("knows", vec![]).with_vertex_attr("age", AttrType::Int);
    let mut w = GraphWriter::create(Arc::new(LocalFs::new(dir.path())), schema, PartitionLayout::new(2, 2)?, CodecConfig::default())?;
    let t0 = 1_700_000_000_000;
    let links = [(1, 2), (1, 3), (2, 4), (3, 4), (4, 5), (5, 6), (6, 1)];
    for (i, (s, d)) in links.into_iter().enumerate() {
        w.add_edge(Edge::new(s, d, "knows", t0 + i as u64 * 1000, vec![]))?;
    }
    for (v, age) in [(1, 15), (2, 34), (3, 19), (4, 61), (5, 17), (6, 42)] {
        w.add_vertex_update(VertexUpdate { vertex: v, attr: "age".into(), timestamp: t0, value: AttributeValue::Int(age) })?;
    }
    w.finish()?;

    let g = Graph::open_local(dir.path(), "g")?;
    let view = g.full();
    for k in 0..4 {
        let exact = traverse(view, &[1], k, TraverseOptions::default())?;
        let within = k_degree_query(view, &[1], k, TraverseOptions::default())?;
        println!("k={k}: exactly {exact:?}, within {within:?}");
    }

    let back = TraverseOptions { direction: Direction::In, ..Default::default() };
    println!("who reaches 4 in one hop: {:?}", traverse(view, &[4], 1, back)?);

    // Only edges that existed after the first three links.
    let early = g.at(t0 + 2_000);
    println!("2 hops from 1 early on: {:?}", traverse(early, &[1], 2, TraverseOptions::default())?);

    let adults: VertexPredicate = "age>=18".parse()?;
    let counts = filtered_neighbor_count(view, &[1, 2, 3, 4, 5, 6], &adults, TraverseOptions::default())?;
    for (v, n) in counts {
        println!("vertex {v} ({adults}) has {n} out-neighbors");
    }
    Ok(())
}
