//! Depth-bounded backtracking walk for `2(k+n)+2` cycles.

use std::collections::{BTreeMap, VecDeque};

use super::cycle::{CanonicalCycle, Cycle};
use super::subgraph::Subgraph;
use super::SearchParams;
use crate::kmer::CanonicalKmer;

/// Membership table for allowed cycle lengths.
#[derive(Debug, Clone)]
pub struct LengthSet {
    allowed: Vec<bool>,
    max: usize,
}

impl LengthSet {
    pub fn new(lengths: impl IntoIterator<Item = usize>) -> Self {
        let lengths: Vec<usize> = lengths.into_iter().collect();
        let max = lengths.iter().copied().max().unwrap_or(0);
        let mut allowed = vec![false; max + 1];
        for l in lengths {
            allowed[l] = true;
        }
        LengthSet { allowed, max }
    }

    pub fn contains(&self, l: usize) -> bool {
        self.allowed.get(l).copied().unwrap_or(false)
    }

    pub fn max(&self) -> usize {
        self.max
    }
}

/// Reusable walk state for one subgraph.
pub(crate) struct Walker<'a> {
    sub: &'a Subgraph,
    lengths: &'a LengthSet,
    branching: Vec<bool>,
    dist: Vec<u32>,
    on_path: Vec<bool>,
    path: Vec<u32>,
}

impl<'a> Walker<'a> {
    pub(crate) fn new(sub: &'a Subgraph, lengths: &'a LengthSet) -> Self {
        let n = sub.len();
        let branching = (0..n as u32).map(|v| sub.degree(v) >= 3).collect();
        Walker {
            sub,
            lengths,
            branching,
            dist: vec![u32::MAX; n],
            on_path: vec![false; n],
            path: Vec::with_capacity(lengths.max() + 1),
        }
    }

    fn bfs_from(&mut self, start: u32) {
        self.dist.fill(u32::MAX);
        let limit = self.lengths.max() as u32;
        self.dist[start as usize] = 0;
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            let d = self.dist[v as usize];
            if d >= limit {
                continue;
            }
            for &w in self.sub.neighbors(v) {
                if self.dist[w as usize] == u32::MAX {
                    self.dist[w as usize] = d + 1;
                    q.push_back(w);
                }
            }
        }
    }

    fn qualifies(&self) -> bool {
        let l = self.path.len();
        if !l.is_multiple_of(2) || !self.lengths.contains(l) {
            return false;
        }
        let half = l / 2;
        (0..half).any(|i| {
            self.branching[self.path[i] as usize] && self.branching[self.path[i + half] as usize]
        })
    }

    /// Reports every qualifying simple cycle through `start` once per
    /// direction pair (the traversal with `path[1] < path[last]`).
    pub(crate) fn walk(&mut self, start: u32, emit: &mut impl FnMut(&[u32])) {
        if self.lengths.max() < 3 {
            return;
        }
        self.bfs_from(start);
        self.path.clear();
        self.path.push(start);
        self.on_path[start as usize] = true;
        self.extend(start, emit);
        self.on_path[start as usize] = false;
    }

    fn extend(&mut self, start: u32, emit: &mut impl FnMut(&[u32])) {
        let last = *self.path.last().expect("path holds start");
        let edges = self.path.len() - 1;
        let max = self.lengths.max();
        let sub = self.sub;
        for &w in sub.neighbors(last) {
            if w == start {
                if edges >= 2 && self.path[1] < last && self.qualifies() {
                    emit(&self.path);
                }
                continue;
            }
            if self.on_path[w as usize] {
                continue;
            }
            let d = self.dist[w as usize];
            // edges so far + 1 to reach w + at least d back to start
            if d == u32::MAX || edges + 1 + d as usize > max {
                continue;
            }
            self.on_path[w as usize] = true;
            self.path.push(w);
            self.extend(start, emit);
            self.path.pop();
            self.on_path[w as usize] = false;
        }
    }

    pub(crate) fn is_branching(&self, v: u32) -> bool {
        self.branching[v as usize]
    }
}

/// Converts a local-id traversal into a [`Cycle`] with subgraph branching
/// positions.
pub(crate) fn to_cycle(sub: &Subgraph, walker: &Walker<'_>, path: &[u32]) -> Cycle {
    let kmers: Vec<CanonicalKmer> = path.iter().map(|&v| sub.kmer(v)).collect();
    let branching: Vec<CanonicalKmer> = path
        .iter()
        .filter(|&&v| walker.is_branching(v))
        .map(|&v| sub.kmer(v))
        .collect();
    Cycle::from_traversal(&kmers, |x| branching.contains(&x))
}

/// All simple cycles through `start` whose length is `2(k+n)+2` for some
/// `n` in the parameter range and which hold a branching pair exactly half
/// the cycle apart. Branching is judged inside the subgraph.
pub fn search_cycles(sub: &Subgraph, start: CanonicalKmer, params: &SearchParams) -> Vec<Cycle> {
    search_cycles_with_lengths(sub, start, &params.length_set())
}

/// Same as [`search_cycles`] but with an explicit length set; the
/// building block for oracle comparisons on arbitrary graphs.
pub fn search_cycles_with_lengths(
    sub: &Subgraph,
    start: CanonicalKmer,
    lengths: &LengthSet,
) -> Vec<Cycle> {
    let Some(start) = sub.local_id(start) else {
        return Vec::new();
    };
    let mut walker = Walker::new(sub, lengths);
    let mut paths: Vec<Vec<u32>> = Vec::new();
    walker.walk(start, &mut |p| paths.push(p.to_vec()));
    let mut found: BTreeMap<CanonicalCycle, Cycle> = BTreeMap::new();
    for p in paths {
        let c = to_cycle(sub, &walker, &p);
        found.entry(c.vertices.clone()).or_insert(c);
    }
    found.into_values().collect()
}

/// Canonical forms only.
pub fn cycle_forms(cycles: &[Cycle]) -> Vec<CanonicalCycle> {
    cycles.iter().map(|c| c.vertices.clone()).collect()
}
