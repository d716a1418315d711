use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use crate::kmer::CanonicalKmer;

/// Rotation/reflection-invariant vertex sequence of a simple cycle: it starts
/// at the smallest vertex and continues towards the smaller of its two
/// cycle neighbors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCycle(Vec<CanonicalKmer>);

impl CanonicalCycle {
    pub fn vertices(&self) -> &[CanonicalKmer] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<CanonicalKmer> {
        self.0
    }

    /// Stable 64-bit identifier (SHA-256 of the packed vertex sequence).
    pub fn id(&self) -> u64 {
        let mut h = Sha256::new();
        for v in &self.0 {
            h.update(v.kmer().bits().to_le_bytes());
        }
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("sha256 is 32 bytes"))
    }
}

/// Canonical form of a simple cycle given as any traversal.
///
/// Vertices are distinct, so the lexicographically minimal rotation of both
/// directions starts at the minimum vertex; the direction is settled by the
/// neighbor that follows it.
pub fn canonicalize_cycle(vertices: &[CanonicalKmer]) -> CanonicalCycle {
    let n = vertices.len();
    if n == 0 {
        return CanonicalCycle(Vec::new());
    }
    let (start, _) = vertices
        .iter()
        .enumerate()
        .min_by_key(|(_, &v)| v)
        .expect("non-empty");
    let next = vertices[(start + 1) % n];
    let prev = vertices[(start + n - 1) % n];
    let out = if next <= prev {
        (0..n).map(|i| vertices[(start + i) % n]).collect()
    } else {
        (0..n).map(|i| vertices[(start + n - i) % n]).collect()
    };
    CanonicalCycle(out)
}

/// A qualifying cycle in canonical vertex order with the positions of the
/// vertices that were branching when it was discovered.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycle {
    pub vertices: CanonicalCycle,
    pub branch_positions: BTreeSet<usize>,
}

impl Cycle {
    /// Builds a cycle from any traversal and the set of vertices that branch.
    pub fn from_traversal(
        vertices: &[CanonicalKmer],
        is_branching: impl Fn(CanonicalKmer) -> bool,
    ) -> Self {
        let canon = canonicalize_cycle(vertices);
        let branch_positions = canon
            .vertices()
            .iter()
            .enumerate()
            .filter(|(_, &v)| is_branching(v))
            .map(|(i, _)| i)
            .collect();
        Cycle {
            vertices: canon,
            branch_positions,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn id(&self) -> u64 {
        self.vertices.id()
    }

    /// Branching position pairs `(p, p + L/2)` in increasing `p`.
    pub fn antipodal_pairs(&self) -> Vec<(usize, usize)> {
        let l = self.len();
        if !l.is_multiple_of(2) {
            return Vec::new();
        }
        let half = l / 2;
        self.branch_positions
            .iter()
            .copied()
            .filter(|&p| p < half && self.branch_positions.contains(&(p + half)))
            .map(|p| (p, p + half))
            .collect()
    }

    /// Recovers `n` from `L = 2(k+n)+2`.
    pub fn n_for(&self, k: usize) -> Option<usize> {
        let l = self.len();
        (l.is_multiple_of(2) && l >= 2 * k + 2).then(|| (l - 2) / 2 - k)
    }

    /// Adds branching positions seen by another discovery of the same cycle.
    pub fn absorb(&mut self, other: &Cycle) {
        debug_assert_eq!(self.vertices, other.vertices);
        self.branch_positions
            .extend(other.branch_positions.iter().copied());
    }
}
