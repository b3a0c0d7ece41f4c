use crate::model::VertexId;
use crate::partition::PartitionLayout;

/// Messages bound for the vertices of one vertex partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageBatch<M> {
    pub partition: u32,
    /// Sorted by (vertex id, payload).
    pub messages: Vec<(VertexId, M)>,
}

/// Groups messages by the vertex partition of their destination. Batches
/// come back in partition order; empty partitions get no batch.
pub fn shuffle<M: Ord>(messages: Vec<(VertexId, M)>, layout: &PartitionLayout) -> Vec<MessageBatch<M>> {
    let mut buckets: Vec<Vec<(VertexId, M)>> = (0..layout.vertex_partitions).map(|_| Vec::new()).collect();
    for (id, m) in messages {
        buckets[layout.vertex_partition(id) as usize].push((id, m));
    }
    buckets
        .into_iter()
        .enumerate()
        .filter(|(_, b)| !b.is_empty())
        .map(|(p, mut messages)| {
            messages.sort();
            MessageBatch { partition: p as u32, messages }
        })
        .collect()
}
