//! The superstep loop.
//!
//! Each superstep runs `compute` on every active vertex (workers own
//! disjoint vertex partitions), folds the aggregates, streams the edge
//! partitions named by the routes of broadcasting vertices, and delivers
//! the resulting messages to their owners for the next superstep.
//! Messages to one vertex are ordered by (sender, origin partition,
//! sequence) before combining, so results do not depend on the number of
//! workers.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use crate::model::{Edge, VertexId};
use crate::store::{BlockStats, EdgeFilter, GraphView, RouteEntry, ScanOptions};

use super::program::{Context, VertexInfo, VertexProgram};
use super::shuffle::shuffle;
use super::traverse::scan_partitions;
use super::{Direction, EngineError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub workers: usize,
    pub max_supersteps: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { workers: 1, max_supersteps: 30 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuperstepStats {
    pub superstep: u64,
    /// Vertices that ran `compute`.
    pub active: u64,
    /// Messages produced, before combining.
    pub messages_sent: u64,
    /// Messages handed to `compute` in the next superstep, after combining.
    pub messages_delivered: u64,
    pub aggregates: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    pub supersteps: u64,
    pub messages_sent: u64,
    pub vertices: u64,
    pub per_superstep: Vec<SuperstepStats>,
    /// Block reads during the run (setup included).
    pub blocks: BlockStats,
}

pub struct RunResult<S> {
    /// Final state of every vertex in the view, by id.
    pub states: BTreeMap<VertexId, S>,
    pub stats: RunStats,
}

/// A message in flight. Ordered by (dst, sender, origin, seq), which is
/// unique per message.
struct Envelope<M> {
    sender: VertexId,
    /// 0 for direct sends, 1 + pid for messages produced by an edge scan.
    origin: u64,
    seq: u64,
    msg: M,
}

impl<M> Envelope<M> {
    fn key(&self) -> (VertexId, u64, u64) {
        (self.sender, self.origin, self.seq)
    }
}

impl<M> PartialEq for Envelope<M> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl<M> Eq for Envelope<M> {}

impl<M> PartialOrd for Envelope<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<M> Ord for Envelope<M> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

struct Partition<S, M> {
    ids: Vec<VertexId>,
    infos: Vec<VertexInfo>,
    states: Vec<S>,
    halted: Vec<bool>,
    inbox: Vec<Vec<M>>,
}

struct ComputeOutput<M> {
    direct: Vec<(VertexId, Envelope<M>)>,
    broadcasts: Vec<(VertexId, M)>,
    contributions: Vec<(VertexId, usize, f64)>,
    active: u64,
}

impl<M> Default for ComputeOutput<M> {
    fn default() -> Self {
        Self { direct: Vec::new(), broadcasts: Vec::new(), contributions: Vec::new(), active: 0 }
    }
}

fn compute_partition<P: VertexProgram>(
    program: &P,
    part: &mut Partition<P::State, P::Message>,
    superstep: u64,
    num_vertices: u64,
    previous: &[f64],
) -> Result<ComputeOutput<P::Message>, EngineError> {
    let mut out = ComputeOutput::default();
    let mut outbox = Vec::new();
    let mut contributions = Vec::new();
    for i in 0..part.ids.len() {
        let messages = std::mem::take(&mut part.inbox[i]);
        if superstep > 0 && part.halted[i] && messages.is_empty() {
            continue;
        }
        out.active += 1;
        let mut ctx = Context {
            superstep,
            info: &part.infos[i],
            num_vertices,
            previous,
            outbox: &mut outbox,
            broadcast: None,
            contributions: &mut contributions,
            halted: false,
        };
        program
            .compute(&mut ctx, &mut part.states[i], &messages)
            .map_err(|source| EngineError::Program { superstep, source })?;
        let (halted, broadcast) = (ctx.halted, ctx.broadcast);
        part.halted[i] = halted;
        let id = part.ids[i];
        out.direct.extend(
            outbox.drain(..).enumerate().map(|(seq, (to, msg))| (to, Envelope { sender: id, origin: 0, seq: seq as u64, msg })),
        );
        if let Some(m) = broadcast {
            out.broadcasts.push((id, m));
        }
        out.contributions.extend(contributions.drain(..).map(|(slot, v)| (id, slot, v)));
    }
    Ok(out)
}

/// Runs `f` over every partition, partition `p` on worker `p % workers`,
/// and returns the results in partition order.
fn for_each_partition<T: Send, X: Send>(
    parts: &mut [T],
    workers: usize,
    f: impl Fn(&mut T) -> X + Sync,
) -> Vec<X> {
    if workers <= 1 || parts.len() <= 1 {
        return parts.iter_mut().map(f).collect();
    }
    let mut buckets: Vec<Vec<(usize, &mut T)>> = (0..workers).map(|_| Vec::new()).collect();
    for (i, p) in parts.iter_mut().enumerate() {
        buckets[i % workers].push((i, p));
    }
    let n = parts_len(&buckets);
    let mut slots: Vec<Option<X>> = (0..n).map(|_| None).collect();
    std::thread::scope(|s| {
        let f = &f;
        let handles: Vec<_> = buckets
            .into_iter()
            .map(|bucket| s.spawn(move || bucket.into_iter().map(|(i, p)| (i, f(p))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (i, x) in h.join().expect("worker panicked") {
                slots[i] = Some(x);
            }
        }
    });
    slots.into_iter().map(|x| x.expect("every partition visited")).collect()
}

fn parts_len<T>(buckets: &[Vec<(usize, T)>]) -> usize {
    buckets.iter().map(Vec::len).sum()
}

/// Distinct-neighbor degrees and edge counts of every vertex in the view.
fn vertex_infos(view: &GraphView<'_>, pids: &[u32], workers: usize) -> Result<BTreeMap<VertexId, VertexInfo>, EngineError> {
    let jobs = pids.iter().map(|&p| (p, EdgeFilter::All)).collect();
    let parts: Vec<Vec<(VertexId, VertexId)>> =
        scan_partitions(view, jobs, workers, &ScanOptions::structure_only(), |_, e, out: &mut Vec<_>| {
            out.push((e.src, e.dst));
            Ok(())
        })?;
    let mut infos: BTreeMap<VertexId, VertexInfo> = BTreeMap::new();
    let mut links: HashSet<(VertexId, VertexId)> = HashSet::new();
    for (src, dst) in parts.into_iter().flatten() {
        infos.entry(src).or_insert(VertexInfo { id: src, ..Default::default() }).out_edges += 1;
        infos.entry(dst).or_insert(VertexInfo { id: dst, ..Default::default() });
        if links.insert((src, dst)) {
            infos.get_mut(&src).expect("inserted").out_degree += 1;
            infos.get_mut(&dst).expect("inserted").in_degree += 1;
        }
    }
    Ok(infos)
}

/// Runs `program` over the vertices of `view` until every vertex has voted
/// to halt with no messages in flight, the program's `halt` hook fires, or
/// `max_supersteps` supersteps have run.
pub fn run<P: VertexProgram>(
    program: &P,
    view: GraphView<'_>,
    config: EngineConfig,
) -> Result<RunResult<P::State>, EngineError> {
    if config.max_supersteps == 0 {
        return Err(EngineError::Config("max supersteps must be at least 1".into()));
    }
    let workers = config.workers.max(1);
    let graph = view.graph();
    let layout = *graph.layout();
    let counters = graph.counters();
    let before = counters.snapshot();

    let routes: HashMap<VertexId, Vec<RouteEntry>> = graph.load_all_routes()?;
    let pids = graph.edge_partitions();
    let infos = vertex_infos(&view, &pids, workers)?;
    let num_vertices = infos.len() as u64;

    let mut parts: Vec<Partition<P::State, P::Message>> = (0..layout.vertex_partitions)
        .map(|_| Partition { ids: Vec::new(), infos: Vec::new(), states: Vec::new(), halted: Vec::new(), inbox: Vec::new() })
        .collect();
    for (id, info) in infos {
        let p = &mut parts[layout.vertex_partition(id) as usize];
        p.ids.push(id);
        p.states.push(program.init(&info));
        p.infos.push(info);
        p.halted.push(false);
        p.inbox.push(Vec::new());
    }

    let aggregators = program.aggregators();
    let direction = program.direction();
    let scan = program.edge_scan();
    let distinct = program.distinct_links();
    let mut stats = RunStats { vertices: num_vertices, ..Default::default() };
    let mut previous: Vec<f64> = Vec::new();

    for superstep in 0..config.max_supersteps {
        // Compute.
        let outputs = for_each_partition(&mut parts, workers, |p| {
            compute_partition(program, p, superstep, num_vertices, &previous)
        });
        let mut direct = Vec::new();
        let mut broadcasts: HashMap<VertexId, P::Message> = HashMap::new();
        let mut contributions = Vec::new();
        let mut active = 0;
        for o in outputs {
            let o = o?;
            active += o.active;
            direct.extend(o.direct);
            broadcasts.extend(o.broadcasts);
            contributions.extend(o.contributions);
        }

        // Aggregate in vertex order.
        contributions.sort_by_key(|&(v, _, _)| v);
        let mut aggregates: Vec<f64> = aggregators.iter().map(|a| a.identity()).collect();
        for (_, slot, v) in contributions {
            if let Some(agg) = aggregators.get(slot) {
                aggregates[slot] = agg.fold(aggregates[slot], v);
            }
        }

        // Send along edges.
        let mut jobs: BTreeMap<u32, HashSet<VertexId>> = BTreeMap::new();
        for &v in broadcasts.keys() {
            for r in routes.get(&v).into_iter().flatten() {
                if direction.follows(r.role()) {
                    jobs.entry(r.pid()).or_default().insert(v);
                }
            }
        }
        let jobs: Vec<(u32, EdgeFilter)> = jobs
            .into_iter()
            .map(|(pid, ids)| {
                let f = match direction {
                    Direction::Out => EdgeFilter::Src(ids),
                    Direction::In => EdgeFilter::Dst(ids),
                    Direction::Both => EdgeFilter::Either(ids),
                };
                (pid, f)
            })
            .collect();
        let emit = |pid: u32, e: &Edge, out: &mut Vec<(VertexId, Envelope<P::Message>)>| -> Result<(), EngineError> {
            let mut send = |from: VertexId, to: VertexId| -> Result<(), EngineError> {
                if let Some(m) = broadcasts.get(&from) {
                    let along = program.along_edge(m, e).map_err(|source| EngineError::Program { superstep, source })?;
                    if let Some(msg) = along {
                        let seq = out.len() as u64;
                        out.push((to, Envelope { sender: from, origin: 1 + u64::from(pid), seq, msg }));
                    }
                }
                Ok(())
            };
            if direction != Direction::In {
                send(e.src, e.dst)?;
            }
            if direction != Direction::Out {
                send(e.dst, e.src)?;
            }
            Ok(())
        };
        let scanned: Vec<Vec<(VertexId, Envelope<P::Message>)>> = if jobs.is_empty() {
            Vec::new()
        } else {
            scan_partitions(&view, jobs, workers, &scan, emit)?
        };

        let mut messages = direct;
        messages.extend(scanned.into_iter().flatten());
        let sent = messages.len() as u64;
        stats.messages_sent += sent;
        let halt_now = program.halt(superstep, &aggregates);
        stats.per_superstep.push(SuperstepStats {
            superstep,
            active,
            messages_sent: sent,
            messages_delivered: 0,
            aggregates: aggregates.clone(),
        });
        stats.supersteps = superstep + 1;
        if halt_now {
            break;
        }

        // Deliver.
        let mut delivered = 0;
        for batch in shuffle(messages, &layout) {
            let part = &mut parts[batch.partition as usize];
            let mut iter = batch.messages.into_iter().peekable();
            while let Some((dst, first)) = iter.next() {
                let Ok(row) = part.ids.binary_search(&dst) else {
                    return Err(EngineError::UnknownVertex { superstep, vertex: dst });
                };
                let mut group = vec![first];
                while let Some((_, env)) = iter.next_if(|(d, _)| *d == dst) {
                    group.push(env);
                }
                if distinct {
                    let mut seen = HashSet::new();
                    group.retain(|env| env.origin == 0 || seen.insert(env.sender));
                }
                let inbox = &mut part.inbox[row];
                for env in group {
                    match inbox.last_mut().and_then(|acc| program.combine(acc, &env.msg).map(|c| (acc, c))) {
                        Some((acc, combined)) => *acc = combined,
                        None => inbox.push(env.msg),
                    }
                }
                delivered += inbox.len() as u64;
            }
        }
        stats.per_superstep.last_mut().expect("pushed above").messages_delivered = delivered;
        previous = aggregates;

        let all_halted = parts.iter().all(|p| p.halted.iter().all(|&h| h));
        if all_halted && delivered == 0 {
            break;
        }
    }

    let after = counters.snapshot();
    stats.blocks = BlockStats {
        blocks_read: after.blocks_read - before.blocks_read,
        struct_blocks_read: after.struct_blocks_read - before.struct_blocks_read,
        blocks_skipped: after.blocks_skipped - before.blocks_skipped,
        bytes_read: after.bytes_read - before.bytes_read,
    };
    let mut states = BTreeMap::new();
    for p in parts {
        states.extend(p.ids.into_iter().zip(p.states));
    }
    Ok(RunResult { states, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::program::{Aggregator, ProgramFailure};
    use crate::engine::testing::graph;

    struct HaltAtOnce;

    impl VertexProgram for HaltAtOnce {
        type State = u64;
        type Message = u64;

        fn init(&self, info: &VertexInfo) -> u64 {
            info.id * 10
        }

        fn compute(&self, ctx: &mut Context<'_, u64>, _: &mut u64, _: &[u64]) -> Result<(), ProgramFailure> {
            ctx.vote_to_halt();
            Ok(())
        }
    }

    /// Every vertex sends its id along out-edges at superstep 0 and records
    /// (superstep, messages) it receives afterwards.
    struct Echo;

    impl VertexProgram for Echo {
        type State = Vec<(u64, Vec<u64>)>;
        type Message = u64;

        fn init(&self, _: &VertexInfo) -> Self::State {
            Vec::new()
        }

        fn compute(&self, ctx: &mut Context<'_, u64>, state: &mut Self::State, msgs: &[u64]) -> Result<(), ProgramFailure> {
            if ctx.superstep() == 0 {
                ctx.send_along_edges(ctx.vertex());
            } else {
                state.push((ctx.superstep(), msgs.to_vec()));
            }
            ctx.vote_to_halt();
            Ok(())
        }
    }

    #[test]
    fn immediate_halt_takes_one_superstep() {
        let dir = tempfile::tempdir().unwrap();
        let g = graph(dir.path(), &[(1, 2, 10, 1.0), (2, 3, 10, 1.0)]);
        let r = run(&HaltAtOnce, g.full(), EngineConfig::default()).unwrap();
        assert_eq!(r.stats.supersteps, 1);
        assert_eq!(r.states, [(1, 10), (2, 20), (3, 30)].into());
    }

    #[test]
    fn echo_on_two_cycle_arrives_next_superstep() {
        let dir = tempfile::tempdir().unwrap();
        let g = graph(dir.path(), &[(1, 2, 10, 1.0), (2, 1, 10, 1.0)]);
        let r = run(&Echo, g.full(), EngineConfig { workers: 2, max_supersteps: 3 }).unwrap();
        assert_eq!(r.states[&1], vec![(1, vec![2])]);
        assert_eq!(r.states[&2], vec![(1, vec![1])]);
        assert_eq!(r.stats.supersteps, 2);
        assert_eq!(r.stats.per_superstep[0].messages_sent, 2);
    }

    /// Sums ids of in-neighbors with a combiner and counts vertices.
    struct SumIn;

    impl VertexProgram for SumIn {
        type State = f64;
        type Message = f64;

        fn init(&self, _: &VertexInfo) -> f64 {
            0.0
        }

        fn compute(&self, ctx: &mut Context<'_, f64>, state: &mut f64, msgs: &[f64]) -> Result<(), ProgramFailure> {
            ctx.aggregate(0, 1.0);
            if ctx.superstep() == 0 {
                ctx.send_along_edges(ctx.vertex() as f64 / 7.0);
            } else {
                assert!(msgs.len() <= 1);
                *state = msgs.iter().sum();
            }
            ctx.vote_to_halt();
            Ok(())
        }

        fn combine(&self, a: &f64, b: &f64) -> Option<f64> {
            Some(a + b)
        }

        fn distinct_links(&self) -> bool {
            true
        }

        fn aggregators(&self) -> Vec<Aggregator> {
            vec![Aggregator::Sum]
        }
    }

    #[test]
    fn results_do_not_depend_on_workers() {
        let dir = tempfile::tempdir().unwrap();
        let edges: Vec<(u64, u64, u64, f64)> =
            (0..400u64).map(|i| (1 + i * 7 % 53, 1 + i * 11 % 47, 1 + i * 3_600_000, 1.0)).collect();
        let g = graph(dir.path(), &edges);
        let base = run(&SumIn, g.full(), EngineConfig { workers: 1, max_supersteps: 5 }).unwrap();
        assert_eq!(base.stats.per_superstep[0].aggregates, vec![base.stats.vertices as f64]);
        for w in [2, 4, 8] {
            let r = run(&SumIn, g.full(), EngineConfig { workers: w, max_supersteps: 5 }).unwrap();
            let a: Vec<u64> = r.states.values().map(|x| x.to_bits()).collect();
            let b: Vec<u64> = base.states.values().map(|x| x.to_bits()).collect();
            assert_eq!(a, b);
        }
    }

    struct Fails;

    impl VertexProgram for Fails {
        type State = ();
        type Message = ();

        fn init(&self, _: &VertexInfo) {}

        fn compute(&self, ctx: &mut Context<'_, ()>, _: &mut (), _: &[()]) -> Result<(), ProgramFailure> {
            if ctx.superstep() == 1 {
                return Err("boom".into());
            }
            ctx.send(ctx.vertex(), ());
            Ok(())
        }
    }

    #[test]
    fn program_errors_carry_the_superstep() {
        let dir = tempfile::tempdir().unwrap();
        let g = graph(dir.path(), &[(1, 2, 10, 1.0)]);
        match run(&Fails, g.full(), EngineConfig::default()) {
            Err(EngineError::Program { superstep: 1, .. }) => {}
            other => panic!("unexpected {:?}", other.map(|r| r.stats)),
        }
    }
}
