//! Hop-by-hop traversal over streamed edge partitions: routes are loaded
//! once, then each hop sends the frontier to the partitions its routes
//! name, filters those partitions' edges by the frontier and collects the
//! opposite endpoints.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::model::{Edge, VertexId};
use crate::store::{EdgeFilter, GraphView, RouteEntry, ScanOptions};

use super::{Direction, EngineError};

pub type EdgePredicate = Arc<dyn Fn(&Edge) -> bool + Send + Sync>;

#[derive(Clone, Default)]
pub struct TraverseOptions {
    pub direction: Direction,
    /// Worker threads; 0 is treated as 1.
    pub workers: usize,
    /// Edge types and columns read; columns matter only to the predicate.
    pub scan: ScanOptions,
    pub predicate: Option<EdgePredicate>,
}

/// Scans each `(pid, filter)` job on one of `workers` threads. Results come
/// back in job order whatever the worker count.
pub(crate) fn scan_partitions<T, F>(
    view: &GraphView<'_>,
    jobs: Vec<(u32, EdgeFilter)>,
    workers: usize,
    scan: &ScanOptions,
    visit: F,
) -> Result<Vec<T>, EngineError>
where
    T: Default + Send,
    F: Fn(u32, &Edge, &mut T) -> Result<(), EngineError> + Sync,
{
    let workers = workers.max(1).min(jobs.len().max(1));
    let run_job = |(pid, filter): &(u32, EdgeFilter)| -> Result<T, EngineError> {
        let mut out = T::default();
        let mut failure = None;
        view.scan_partition(*pid, filter, scan, |block| {
            for e in block {
                if failure.is_some() {
                    return;
                }
                if let Err(err) = visit(*pid, e, &mut out) {
                    failure = Some(err);
                }
            }
        })?;
        failure.map_or(Ok(out), Err)
    };
    if workers == 1 {
        return jobs.iter().map(run_job).collect();
    }
    let mut slots: Vec<Option<Result<T, EngineError>>> = (0..jobs.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let jobs = &jobs;
                let run_job = &run_job;
                s.spawn(move || {
                    (w..jobs.len()).step_by(workers).map(|i| (i, run_job(&jobs[i]))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("scan worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every job ran")).collect()
}

/// Traversal state for one view: the route table, loaded once.
pub struct Traverser<'g> {
    view: GraphView<'g>,
    routes: HashMap<VertexId, Vec<RouteEntry>>,
    opts: TraverseOptions,
}

impl<'g> Traverser<'g> {
    pub fn new(view: GraphView<'g>, opts: TraverseOptions) -> Result<Self, EngineError> {
        let routes = view.graph().load_all_routes()?;
        Ok(Self { view, routes, opts })
    }

    pub fn view(&self) -> &GraphView<'g> {
        &self.view
    }

    pub fn routes(&self, v: VertexId) -> &[RouteEntry] {
        self.routes.get(&v).map_or(&[], Vec::as_slice)
    }

    /// Frontier ids grouped by the edge partitions their routes point to.
    pub fn shuffle_frontier(&self, frontier: &BTreeSet<VertexId>) -> BTreeMap<u32, HashSet<VertexId>> {
        let mut out: BTreeMap<u32, HashSet<VertexId>> = BTreeMap::new();
        for &v in frontier {
            for r in self.routes(v) {
                if self.opts.direction.follows(r.role()) {
                    out.entry(r.pid()).or_default().insert(v);
                }
            }
        }
        out
    }

    /// Opposite endpoints of the view edges incident to each frontier
    /// vertex, following the configured direction.
    pub fn neighbors(&self, frontier: &BTreeSet<VertexId>) -> Result<BTreeMap<VertexId, BTreeSet<VertexId>>, EngineError> {
        let direction = self.opts.direction;
        let jobs: Vec<(u32, EdgeFilter)> = self
            .shuffle_frontier(frontier)
            .into_iter()
            .map(|(pid, ids)| {
                let filter = match direction {
                    Direction::Out => EdgeFilter::Src(ids),
                    Direction::In => EdgeFilter::Dst(ids),
                    Direction::Both => EdgeFilter::Either(ids),
                };
                (pid, filter)
            })
            .collect();
        let predicate = self.opts.predicate.clone();
        let parts: Vec<Vec<(VertexId, VertexId)>> =
            scan_partitions(&self.view, jobs, self.opts.workers, &self.opts.scan, |_, e, out: &mut Vec<_>| {
                if predicate.as_ref().is_none_or(|p| p(e)) {
                    if direction != Direction::In && frontier.contains(&e.src) {
                        out.push((e.src, e.dst));
                    }
                    if direction != Direction::Out && frontier.contains(&e.dst) {
                        out.push((e.dst, e.src));
                    }
                }
                Ok(())
            })?;
        let mut map: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for (v, n) in parts.into_iter().flatten() {
            map.entry(v).or_default().insert(n);
        }
        Ok(map)
    }

    /// Vertices one hop from the frontier.
    pub fn step(&self, frontier: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>, EngineError> {
        Ok(self.neighbors(frontier)?.into_values().flatten().collect())
    }

    /// Vertices exactly `hops` steps from `seeds` (the frontier after
    /// `hops` rounds, deduplicated per round).
    pub fn run(&self, seeds: &BTreeSet<VertexId>, hops: usize) -> Result<BTreeSet<VertexId>, EngineError> {
        let mut frontier = seeds.clone();
        for _ in 0..hops {
            if frontier.is_empty() {
                break;
            }
            frontier = self.step(&frontier)?;
        }
        Ok(frontier)
    }

    /// Vertices within `k` hops of `seeds`, seeds included.
    pub fn within(&self, seeds: &BTreeSet<VertexId>, k: usize) -> Result<BTreeSet<VertexId>, EngineError> {
        let mut seen = seeds.clone();
        let mut frontier = seeds.clone();
        for _ in 0..k {
            if frontier.is_empty() {
                break;
            }
            frontier = self.step(&frontier)?;
            seen.extend(frontier.iter().copied());
        }
        Ok(seen)
    }
}

/// Vertices reachable from `seeds` in exactly `hops` steps.
pub fn traverse(
    view: GraphView<'_>,
    seeds: &[VertexId],
    hops: usize,
    opts: TraverseOptions,
) -> Result<BTreeSet<VertexId>, EngineError> {
    let seeds: BTreeSet<VertexId> = seeds.iter().copied().collect();
    if hops == 0 {
        return Ok(seeds);
    }
    Traverser::new(view, opts)?.run(&seeds, hops)
}
