//! Parallel subgraph creation and cycle search over an index shard.
//!
//! Workers pull fixed-size chunks of shard positions from a shared queue.
//! For every consumed entry a neighborhood is grown around the seed; if it
//! holds more than one branching vertex and more than `2k+2` vertices, every
//! branching vertex of the neighborhood starts a bounded walk. Worker-local
//! results are merged by canonical cycle form, so the final set does not
//! depend on scheduling.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use super::cycle::{CanonicalCycle, Cycle};
use super::subgraph::{graph_neighborhood, Subgraph};
use super::walk::{to_cycle, LengthSet, Walker};
use super::{SearchError, SearchParams};
use crate::graph::ColoredGraph;
use crate::index::{select_fraction, ChunkQueue, IndexShard};

/// Per-entry measurements, one row of the discovery curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryStat {
    /// Position within the (fraction-selected) shard.
    pub position: usize,
    /// Cycles first discovered at this position: a cycle is credited to the
    /// smallest position whose subgraph produced it.
    pub new_cycles: usize,
    /// Distinct cycles produced by this entry's subgraph.
    pub found_cycles: usize,
    pub subgraph_vertices: usize,
    pub subgraph_edges: usize,
    pub complexity: f64,
    /// Passed the branching/size guard and was searched.
    pub searched: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    /// Size of the full parent index.
    pub index_size: usize,
    /// Entries available after sharding and fraction selection.
    pub shard_size: usize,
    /// Entries actually consumed ("used index").
    pub used_index: usize,
    pub subgraphs: usize,
    pub searched_subgraphs: usize,
    pub guard_rejected: usize,
    /// Searches started on a subgraph that fails the guard; always zero
    /// unless the guard is broken.
    pub guard_violations: usize,
    pub cycles: usize,
    pub workers: usize,
    pub elapsed: Duration,
    pub budget_hit: bool,
    pub entries: Vec<EntryStat>,
}

impl SearchStats {
    pub fn mean_complexity(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.complexity).sum::<f64>() / self.entries.len() as f64
    }

    /// Single-record text summary.
    pub fn report(&self) -> String {
        format!(
            "index={} shard={} used_index={} subgraphs={} searched={} guard_rejected={} guard_violations={} cycles={} workers={} budget_hit={} mean_complexity={:.6} elapsed_s={:.3}",
            self.index_size,
            self.shard_size,
            self.used_index,
            self.subgraphs,
            self.searched_subgraphs,
            self.guard_rejected,
            self.guard_violations,
            self.cycles,
            self.workers,
            self.budget_hit,
            self.mean_complexity(),
            self.elapsed.as_secs_f64(),
        )
    }

    pub const CSV_HEADER: &'static str =
        "entry_position,new_cycles,cumulative_cycles,subgraph_vertices,subgraph_edges,complexity";

    /// Discovery curve, one row per consumed entry in position order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        let mut cumulative = 0;
        for e in &self.entries {
            cumulative += e.new_cycles;
            writeln!(
                w,
                "{},{},{},{},{},{:.6}",
                e.position,
                e.new_cycles,
                cumulative,
                e.subgraph_vertices,
                e.subgraph_edges,
                e.complexity
            )?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Sorted by canonical form.
    pub cycles: Vec<Cycle>,
    pub stats: SearchStats,
}

#[derive(Default)]
struct WorkerOutput {
    found: HashMap<CanonicalCycle, (usize, Cycle)>,
    entries: Vec<EntryStat>,
    searched: usize,
    rejected: usize,
    violations: usize,
}

impl WorkerOutput {
    fn record(&mut self, position: usize, cycle: Cycle) {
        match self.found.get_mut(&cycle.vertices) {
            Some((first, existing)) => {
                *first = (*first).min(position);
                existing.absorb(&cycle);
            }
            None => {
                self.found.insert(cycle.vertices.clone(), (position, cycle));
            }
        }
    }
}

/// Runs the walk from every branching vertex of a guarded subgraph.
/// Checks the guard condition itself so a caller that skips it is counted.
fn search_subgraph(
    sub: &Subgraph,
    branching: &[u32],
    lengths: &LengthSet,
    min_subgraph: usize,
    violations: &mut usize,
    mut emit: impl FnMut(Cycle),
) {
    if branching.len() <= 1 || sub.len() <= min_subgraph {
        *violations += 1;
    }
    let mut walker = Walker::new(sub, lengths);
    let mut paths: Vec<Vec<u32>> = Vec::new();
    for &b in branching {
        walker.walk(b, &mut |p| paths.push(p.to_vec()));
    }
    for p in paths {
        emit(to_cycle(sub, &walker, &p));
    }
}

fn process_entry(
    graph: &ColoredGraph,
    shard: &IndexShard,
    position: usize,
    params: &SearchParams,
    lengths: &LengthSet,
    out: &mut WorkerOutput,
) -> Result<(), SearchError> {
    let seed = shard.entries[position];
    let sub = graph_neighborhood(graph, seed, params.v_max)?;
    let branching = sub.branching_ids();
    let min_g = params.min_subgraph();
    let mut stat = EntryStat {
        position,
        new_cycles: 0,
        found_cycles: 0,
        subgraph_vertices: sub.len(),
        subgraph_edges: sub.num_edges(),
        complexity: sub.complexity(),
        searched: false,
    };
    if branching.len() > 1 && sub.len() > min_g {
        stat.searched = true;
        out.searched += 1;
        let mut local: BTreeMap<CanonicalCycle, Cycle> = BTreeMap::new();
        search_subgraph(&sub, &branching, lengths, min_g, &mut out.violations, |c| {
            local.entry(c.vertices.clone()).or_insert(c);
        });
        stat.found_cycles = local.len();
        for c in local.into_values() {
            out.record(position, c);
        }
    } else {
        out.rejected += 1;
    }
    out.entries.push(stat);
    Ok(())
}

/// Searches every entry of `shard` (after fraction selection) for bubble
/// cycles on `params.workers` threads.
///
/// With a wall-clock budget, workers stop taking new entries once it is
/// spent but finish the subgraph they are on, so the run may overrun.
pub fn parallel_search(
    graph: &ColoredGraph,
    shard: &IndexShard,
    params: &SearchParams,
) -> Result<SearchResult, SearchError> {
    params.validate()?;
    if params.k != graph.k() {
        return Err(SearchError::InvalidParams(format!(
            "search k={} but graph k={}",
            params.k,
            graph.k()
        )));
    }
    shard.check_graph(graph)?;
    let shard = select_fraction(shard, params.fraction, params.select_mode);
    let lengths = params.length_set();
    let queue = ChunkQueue::new(shard.len(), params.chunk);
    let stop = AtomicBool::new(false);
    let error: Mutex<Option<SearchError>> = Mutex::new(None);
    let workers = params.workers.max(1);
    let started = Instant::now();

    let outputs: Vec<WorkerOutput> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut out = WorkerOutput::default();
                    'queue: while let Some(range) = queue.pop() {
                        for position in range {
                            if stop.load(Ordering::Relaxed) {
                                break 'queue;
                            }
                            if params.budget.is_some_and(|b| started.elapsed() >= b) {
                                stop.store(true, Ordering::Relaxed);
                                break 'queue;
                            }
                            if let Err(e) =
                                process_entry(graph, &shard, position, params, &lengths, &mut out)
                            {
                                error.lock().unwrap().get_or_insert(e);
                                stop.store(true, Ordering::Relaxed);
                                break 'queue;
                            }
                        }
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("search worker panicked"))
            .collect()
    });
    let elapsed = started.elapsed();
    if let Some(e) = error.into_inner().unwrap() {
        return Err(e);
    }

    let mut merged: BTreeMap<CanonicalCycle, (usize, Cycle)> = BTreeMap::new();
    let mut stats = SearchStats {
        index_size: shard.parent_len,
        shard_size: shard.len(),
        workers,
        elapsed,
        budget_hit: stop.load(Ordering::Relaxed),
        ..SearchStats::default()
    };
    for out in outputs {
        stats.searched_subgraphs += out.searched;
        stats.guard_rejected += out.rejected;
        stats.guard_violations += out.violations;
        stats.entries.extend(out.entries);
        for (key, (pos, cycle)) in out.found {
            match merged.get_mut(&key) {
                Some((first, existing)) => {
                    *first = (*first).min(pos);
                    existing.absorb(&cycle);
                }
                None => {
                    merged.insert(key, (pos, cycle));
                }
            }
        }
    }
    stats.entries.sort_by_key(|e| e.position);
    stats.used_index = stats.entries.len();
    stats.subgraphs = stats.entries.len();
    let mut new_at: HashMap<usize, usize> = HashMap::new();
    for (pos, _) in merged.values() {
        *new_at.entry(*pos).or_default() += 1;
    }
    for e in &mut stats.entries {
        e.new_cycles = new_at.get(&e.position).copied().unwrap_or(0);
    }
    let cycles: Vec<Cycle> = merged.into_values().map(|(_, c)| c).collect();
    stats.cycles = cycles.len();
    log::info!("search: {}", stats.report());
    Ok(SearchResult { cycles, stats })
}
