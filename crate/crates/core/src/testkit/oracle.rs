//! Exhaustive simple-cycle enumeration, kept deliberately naive.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TestkitError;
use crate::kmer::{CanonicalKmer, Kmer};
use crate::search::Subgraph;

/// Size guard for [`brute_force_cycles`].
pub const ORACLE_MAX_VERTICES: usize = 60;

type Adjacency = BTreeMap<CanonicalKmer, BTreeSet<CanonicalKmer>>;

/// Every simple cycle through `start` whose length is in `lengths`, found by
/// unbounded backtracking. With `require_branching`, a cycle is kept only if
/// some vertex and the vertex half-way around both have degree >= 3.
///
/// Cycles are returned as their smallest rotation/reflection.
pub fn brute_force_cycles(
    sub: &Subgraph,
    start: CanonicalKmer,
    lengths: &[usize],
    require_branching: bool,
) -> Result<BTreeSet<Vec<CanonicalKmer>>, TestkitError> {
    if sub.len() > ORACLE_MAX_VERTICES {
        return Err(TestkitError::TooLarge {
            max: ORACLE_MAX_VERTICES,
            actual: sub.len(),
        });
    }
    let mut adj: Adjacency = BTreeMap::new();
    for (i, &a) in sub.vertices().iter().enumerate() {
        let entry = adj.entry(a).or_default();
        for &j in sub.neighbors(i as u32) {
            entry.insert(sub.kmer(j));
        }
    }
    let mut found = BTreeSet::new();
    if !adj.contains_key(&start) {
        return Ok(found);
    }
    let mut path = vec![start];
    backtrack(&adj, &mut path, &mut |cycle| {
        if !lengths.contains(&cycle.len()) {
            return;
        }
        if require_branching && !has_antipodal_branching(&adj, cycle) {
            return;
        }
        found.insert(smallest_representation(cycle));
    });
    Ok(found)
}

fn backtrack(
    adj: &Adjacency,
    path: &mut Vec<CanonicalKmer>,
    emit: &mut impl FnMut(&[CanonicalKmer]),
) {
    let last = *path.last().unwrap();
    for &next in &adj[&last] {
        if next == path[0] && path.len() >= 3 {
            emit(path);
        } else if !path.contains(&next) {
            path.push(next);
            backtrack(adj, path, emit);
            path.pop();
        }
    }
}

fn has_antipodal_branching(adj: &Adjacency, cycle: &[CanonicalKmer]) -> bool {
    let l = cycle.len();
    if l % 2 == 1 {
        return false;
    }
    let branching = |v: &CanonicalKmer| adj[v].len() >= 3;
    (0..l).any(|i| branching(&cycle[i]) && branching(&cycle[(i + l / 2) % l]))
}

fn smallest_representation(cycle: &[CanonicalKmer]) -> Vec<CanonicalKmer> {
    let n = cycle.len();
    let mut reps = Vec::with_capacity(2 * n);
    for s in 0..n {
        reps.push((0..n).map(|i| cycle[(s + i) % n]).collect::<Vec<_>>());
        reps.push((0..n).map(|i| cycle[(s + n - i) % n]).collect::<Vec<_>>());
    }
    reps.into_iter().min().unwrap()
}

/// Seeded random connected graph over distinct canonical k-mers: a ring of
/// `ring` vertices, a random tree hung off it up to `vertices` in total,
/// and `chords` extra random edges.
pub fn random_connected_subgraph(
    seed: u64,
    vertices: usize,
    ring: usize,
    chords: usize,
    k: usize,
) -> Subgraph {
    assert!(ring >= 3 && ring <= vertices, "ring must fit");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<CanonicalKmer> = Vec::with_capacity(vertices);
    let space = 1u128 << (2 * k);
    while ids.len() < vertices {
        let x = Kmer::from_bits(rng.gen_range(0..space)).canonical(k);
        if !ids.contains(&x) {
            ids.push(x);
        }
    }
    let mut edges: Vec<(u32, u32)> = (0..ring as u32)
        .map(|i| (i, (i + 1) % ring as u32))
        .collect();
    for v in ring..vertices {
        edges.push((rng.gen_range(0..v) as u32, v as u32));
    }
    for _ in 0..chords {
        let a = rng.gen_range(0..vertices) as u32;
        let b = rng.gen_range(0..vertices) as u32;
        edges.push((a, b));
    }
    Subgraph::from_edges(ids, &edges)
}
