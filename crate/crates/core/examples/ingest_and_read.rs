//! Builds a small call graph, writes it to disk and reads it back.

use tsgraph::model::{AttrType, AttributeValue, ColumnDef, Edge, GraphSchema};
use tsgraph::partition::PartitionLayout;
use tsgraph::store::{CodecConfig, Graph, GraphWriter, LocalFs, ScanOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let schema = GraphSchema::new("calls")
        .with_edge_type("call", vec![ColumnDef::new("secs", AttrType::Int), ColumnDef::new("cost", AttrType::Double)])
        .with_edge_type("sms", vec![ColumnDef::new("text", AttrType::Str)]);

    let backend = std::sync::Arc::new(LocalFs::new(dir.path()));
    let mut writer = GraphWriter::create(backend, schema, PartitionLayout::new(2, 4)?, CodecConfig::default())?;
    let day = 86_400_000;
    let t0 = 1_700_000_000_000;
    for i in 0..1_000u64 {
        let (src, dst) = (i % 37 + 1, (i * 7) % 53 + 1);
        let edge = if i % 3 == 0 {
            Edge::new(src, dst, "sms", t0 + i * day / 100, vec![AttributeValue::Str(format!("msg {}", i % 4))])
        } else {
            let secs = (i % 600) as i32;
            Edge::new(src, dst, "call", t0 + i * day / 100, vec![AttributeValue::Int(secs), AttributeValue::Double(f64::from(secs) * 0.02)])
        };
        writer.add_edge(edge)?;
    }
    let summary = writer.finish()?;
    println!("edges={} vertices={} stored_bytes={}", summary.edges, summary.vertices, summary.file_bytes());
    for p in &summary.edge_partitions {
        println!("  dt={} type={} part-{}: {} edges, {} bytes", p.date, p.edge_type, p.pid, p.edges, p.file_bytes);
    }

    let graph = Graph::open_local(dir.path(), "calls")?;
    let all = graph.full().read_all_edges(&ScanOptions::default())?;
    println!("read back {} edges", all.len());

    // Only the cost column of call edges.
    let opts = ScanOptions { edge_types: Some(vec!["call".into()]), columns: Some(vec!["cost".into()]) };
    let calls = graph.full().read_all_edges(&opts)?;
    let total: f64 = calls.iter().filter_map(|e| e.attributes[0].as_f64()).sum();
    println!("{} calls costing {total:.2} in total", calls.len());
    Ok(())
}
