//! Cycle → bubble decomposition and path label reconstruction.

use crate::graph::ColoredGraph;
use crate::kmer::{kmerize, CanonicalKmer, Kmer};
use crate::search::Cycle;

use super::VariantError;

/// Two equal-length paths between branching vertices `s` and `t` with
/// their nucleotide labels, read in the orientation that leaves `s`
/// forwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bubble {
    pub id: u64,
    pub k: usize,
    pub n: usize,
    pub path_a: Vec<CanonicalKmer>,
    pub path_b: Vec<CanonicalKmer>,
    pub label_a: String,
    pub label_b: String,
}

impl Bubble {
    pub fn s(&self) -> CanonicalKmer {
        self.path_a[0]
    }

    pub fn t(&self) -> CanonicalKmer {
        *self.path_a.last().expect("non-empty path")
    }

    /// 0-based label positions where the two labels differ.
    pub fn mismatch_offsets(&self) -> Vec<usize> {
        self.label_a
            .bytes()
            .zip(self.label_b.bytes())
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Hamming distance between the two labels.
pub fn mismatches(bubble: &Bubble) -> usize {
    bubble.mismatch_offsets().len()
}

/// Keeps bubbles with between 1 and `f` mismatching label positions.
pub fn filter_bubbles(bubbles: Vec<Bubble>, f: usize) -> Vec<Bubble> {
    bubbles
        .into_iter()
        .filter(|b| (1..=f).contains(&mismatches(b)))
        .collect()
}

/// Concatenates a walk of oriented k-mers, each overlapping the previous by
/// `k-1` bases.
pub fn spell_path(path: &[Kmer], k: usize) -> Result<String, VariantError> {
    let first = path.first().ok_or(VariantError::EmptyPath)?;
    let mut label = first.to_bytes(k);
    for w in path.windows(2) {
        if w[0].extend_right(w[1].last_code(), k) != w[1] {
            return Err(VariantError::Orientation(format!(
                "{} does not overlap {}",
                w[0].to_string(k),
                w[1].to_string(k)
            )));
        }
        label.push(crate::kmer::code_base(w[1].last_code()));
    }
    Ok(String::from_utf8(label).expect("ACGT"))
}

/// Orients the walk `path` starting from oriented `start`, following edge
/// bits. `None` at the first step that has no matching successor.
fn orient_walk(
    graph: &ColoredGraph,
    start: Kmer,
    path: &[CanonicalKmer],
) -> Result<Option<Vec<Kmer>>, VariantError> {
    let k = graph.k();
    let mut out = Vec::with_capacity(path.len());
    out.push(start);
    for &next in &path[1..] {
        if !graph.contains(next) {
            return Err(VariantError::MissingVertex(next.to_string(k)));
        }
        let cur = *out.last().unwrap();
        let step = (0..4u8)
            .map(|b| cur.extend_right(b, k))
            .find(|&cand| cand.canonical(k) == next && graph.has_successor(cur, cand));
        match step {
            Some(s) => out.push(s),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Whether some orientation of `u` has some orientation of `v` as successor.
fn linked(graph: &ColoredGraph, u: CanonicalKmer, v: CanonicalKmer) -> bool {
    let k = graph.k();
    let us = [u.kmer(), u.kmer().reverse_complement(k)];
    let vs = [v.kmer(), v.kmer().reverse_complement(k)];
    us.iter()
        .any(|&a| vs.iter().any(|&b| graph.has_successor(a, b)))
}

/// Splits a cycle at an antipodal branching pair into two strand-consistent
/// paths and reads their labels from the graph.
///
/// Pairs are tried in order of position; the first pair whose halves leave
/// `s` on the same side and meet `t` in the same orientation wins.
pub fn decompose(cycle: &Cycle, graph: &ColoredGraph) -> Result<Bubble, VariantError> {
    let k = graph.k();
    let verts = cycle.vertices.vertices();
    let l = verts.len();
    let n = cycle
        .n_for(k)
        .ok_or(VariantError::NotABubble { length: l, k })?;
    for &v in verts {
        if !graph.contains(v) {
            return Err(VariantError::MissingVertex(v.to_string(k)));
        }
    }
    for i in 0..l {
        let (u, v) = (verts[i], verts[(i + 1) % l]);
        if !linked(graph, u, v) {
            return Err(VariantError::Orientation(format!(
                "cycle {:016x}: {} and {} share no edge",
                cycle.id(),
                u.to_string(k),
                v.to_string(k)
            )));
        }
    }
    let half = l / 2;
    let pairs = cycle.antipodal_pairs();
    if pairs.is_empty() {
        return Err(VariantError::NotABubble { length: l, k });
    }
    for (p, _) in pairs {
        let path_a: Vec<CanonicalKmer> = (0..=half).map(|i| verts[(p + i) % l]).collect();
        let path_b: Vec<CanonicalKmer> = (0..=half).map(|i| verts[(p + l - i) % l]).collect();
        let s = verts[p].kmer();
        let mut walk_a = None;
        for start in [s, s.reverse_complement(k)] {
            if let Some(w) = orient_walk(graph, start, &path_a)? {
                walk_a = Some(w);
                break;
            }
        }
        let Some(walk_a) = walk_a else {
            continue;
        };
        let Some(walk_b) = orient_walk(graph, walk_a[0], &path_b)? else {
            continue;
        };
        if walk_a.last() != walk_b.last() {
            continue;
        }
        let label_a = spell_path(&walk_a, k)?;
        let label_b = spell_path(&walk_b, k)?;
        for (label, path) in [(&label_a, &path_a), (&label_b, &path_b)] {
            let back: Vec<CanonicalKmer> = kmerize(label.as_bytes(), k)
                .into_iter()
                .map(|x| x.canonical(k))
                .collect();
            if back != *path {
                return Err(VariantError::Orientation(format!(
                    "label of cycle {:016x} does not re-kmerize to its path",
                    cycle.id()
                )));
            }
        }
        return Ok(Bubble {
            id: cycle.id(),
            k,
            n,
            path_a,
            path_b,
            label_a,
            label_b,
        });
    }
    Err(VariantError::Inconsistent(format!(
        "cycle {:016x}: no antipodal pair splits it into a strand-consistent bubble",
        cycle.id()
    )))
}
