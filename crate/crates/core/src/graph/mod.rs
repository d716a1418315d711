//! Multi-color de Bruijn graph stored as a single k-mer hash table.
//!
//! Every node is a canonical k-mer carrying one coverage counter per color
//! and an 8-bit adjacency mask. Bits 0..4 mark forward extensions (the base
//! appended after the canonical orientation), bits 4..8 mark reverse
//! extensions (the base prepended before it).

mod build;
mod io;

use std::collections::HashMap;

use crate::kmer::{CanonicalKmer, Kmer};

pub use build::{build_graph, parse_manifest, ColorSpec, GraphBuilder};
pub use io::{load_graph, read_graph, save_graph, write_graph, GRAPH_MAGIC, GRAPH_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("color {color:?}: {source}")]
    Reads {
        color: String,
        #[source]
        source: crate::reads::ReadsError,
    },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path}:{line}: {msg}")]
    Manifest {
        path: std::path::PathBuf,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Kmer(#[from] crate::kmer::KmerError),
    #[error("at least one color is required")]
    NoColors,
    #[error("unknown k-mer {0}")]
    UnknownNode(String),
    #[error("bad magic: not a graph file")]
    BadMagic,
    #[error("unsupported graph file version {0}")]
    VersionMismatch(u32),
    #[error("truncated graph file")]
    Truncated,
    #[error("graph digest mismatch: header {expected:#018x}, content {actual:#018x}")]
    DigestMismatch { expected: u64, actual: u64 },
    #[error("corrupt graph file: {0}")]
    Corrupt(String),
}

/// Which side of the canonical k-mer an edge leaves from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// Suffix overlap: the neighbor follows the canonical orientation.
    Forward,
    /// Prefix overlap: the neighbor precedes the canonical orientation.
    Reverse,
}

/// Orientation tag of one adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub side: Side,
    /// Extension base code (0..4) on that side.
    pub base: u8,
    /// The raw extended k-mer is the reverse complement of the neighbor's
    /// canonical form.
    pub flipped: bool,
}

impl Link {
    pub fn bit(self) -> u8 {
        match self.side {
            Side::Forward => 1 << self.base,
            Side::Reverse => 1 << (4 + self.base),
        }
    }
}

/// Forward-extension bit for base `code`.
#[inline]
pub fn forward_bit(code: u8) -> u8 {
    1 << code
}

/// Reverse-extension bit for base `code`.
#[inline]
pub fn reverse_bit(code: u8) -> u8 {
    1 << (4 + code)
}

/// Borrowed view of a stored node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphNode<'a> {
    pub kmer: CanonicalKmer,
    pub coverage: &'a [u32],
    pub edges: u8,
}

/// Immutable colored de Bruijn graph.
#[derive(Clone)]
pub struct ColoredGraph {
    k: usize,
    colors: Vec<String>,
    // sorted, unique
    kmers: Vec<CanonicalKmer>,
    edges: Vec<u8>,
    // row-major: node * C + color
    coverage: Vec<u32>,
    lookup: HashMap<CanonicalKmer, u32>,
    // undirected adjacency over node ids (CSR), derived
    adj_offsets: Vec<u32>,
    adj: Vec<u32>,
    fingerprint: u64,
}

impl PartialEq for ColoredGraph {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
            && self.colors == other.colors
            && self.kmers == other.kmers
            && self.edges == other.edges
            && self.coverage == other.coverage
            && self.fingerprint == other.fingerprint
    }
}

impl Eq for ColoredGraph {}

impl std::fmt::Debug for ColoredGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ColoredGraph")
            .field("k", &self.k)
            .field("colors", &self.colors)
            .field("nodes", &self.kmers.len())
            .field("fingerprint", &format_args!("{:#018x}", self.fingerprint))
            .finish()
    }
}

impl ColoredGraph {
    /// Assembles a graph from sorted parts and derives lookup/adjacency.
    pub(crate) fn from_parts(
        k: usize,
        colors: Vec<String>,
        kmers: Vec<CanonicalKmer>,
        edges: Vec<u8>,
        coverage: Vec<u32>,
    ) -> Self {
        let lookup = kmers
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i as u32))
            .collect::<HashMap<_, _>>();
        let mut g = ColoredGraph {
            k,
            colors,
            kmers,
            edges,
            coverage,
            lookup,
            adj_offsets: Vec::new(),
            adj: Vec::new(),
            fingerprint: 0,
        };
        g.derive_adjacency();
        g.fingerprint = io::fingerprint(&g);
        g
    }

    fn derive_adjacency(&mut self) {
        let mut offsets = Vec::with_capacity(self.kmers.len() + 1);
        let mut adj = Vec::new();
        offsets.push(0u32);
        for i in 0..self.kmers.len() {
            let start = adj.len();
            for (nb, _) in self.raw_links(i) {
                if let Some(&j) = self.lookup.get(&nb) {
                    if j as usize != i {
                        adj.push(j);
                    }
                }
            }
            adj[start..].sort_unstable();
            let mut w = start;
            for r in start..adj.len() {
                if w == start || adj[w - 1] != adj[r] {
                    adj[w] = adj[r];
                    w += 1;
                }
            }
            adj.truncate(w);
            offsets.push(adj.len() as u32);
        }
        self.adj_offsets = offsets;
        self.adj = adj;
    }

    fn raw_links(&self, i: usize) -> impl Iterator<Item = (CanonicalKmer, Link)> + '_ {
        let k = self.k;
        let node = self.kmers[i].kmer();
        let mask = self.edges[i];
        (0..8u8)
            .filter(move |b| mask & (1 << b) != 0)
            .map(move |b| {
                let (side, base, raw) = if b < 4 {
                    (Side::Forward, b, node.extend_right(b, k))
                } else {
                    (Side::Reverse, b - 4, node.extend_left(b - 4, k))
                };
                let canon = raw.canonical(k);
                let link = Link {
                    side,
                    base,
                    flipped: canon.kmer() != raw,
                };
                (canon, link)
            })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }

    pub fn num_colors(&self) -> usize {
        self.colors.len()
    }

    pub fn len(&self) -> usize {
        self.kmers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kmers.is_empty()
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Canonical k-mers in sorted order.
    pub fn kmers(&self) -> &[CanonicalKmer] {
        &self.kmers
    }

    pub fn node_id(&self, kmer: CanonicalKmer) -> Option<u32> {
        self.lookup.get(&kmer).copied()
    }

    pub fn contains(&self, kmer: CanonicalKmer) -> bool {
        self.lookup.contains_key(&kmer)
    }

    pub fn kmer_at(&self, id: u32) -> CanonicalKmer {
        self.kmers[id as usize]
    }

    pub fn node_at(&self, id: u32) -> GraphNode<'_> {
        let i = id as usize;
        let c = self.colors.len();
        GraphNode {
            kmer: self.kmers[i],
            coverage: &self.coverage[i * c..(i + 1) * c],
            edges: self.edges[i],
        }
    }

    pub fn node(&self, kmer: CanonicalKmer) -> Option<GraphNode<'_>> {
        self.node_id(kmer).map(|id| self.node_at(id))
    }

    pub fn nodes(&self) -> impl Iterator<Item = GraphNode<'_>> + '_ {
        (0..self.kmers.len() as u32).map(|id| self.node_at(id))
    }

    pub fn coverage(&self, kmer: CanonicalKmer) -> Option<&[u32]> {
        self.node(kmer).map(|n| n.coverage)
    }

    /// Adjacent node ids, sorted, without self-loops.
    pub fn adjacent_ids(&self, id: u32) -> &[u32] {
        let i = id as usize;
        &self.adj[self.adj_offsets[i] as usize..self.adj_offsets[i + 1] as usize]
    }

    pub fn degree_of(&self, id: u32) -> usize {
        self.adjacent_ids(id).len()
    }

    pub fn degree(&self, kmer: CanonicalKmer) -> Option<usize> {
        self.node_id(kmer).map(|id| self.degree_of(id))
    }

    /// Distinct neighbors of `node`, sorted by k-mer, each with the first
    /// orientation tag (in bit order) that reaches it.
    pub fn neighbors(&self, node: CanonicalKmer) -> Result<Vec<(CanonicalKmer, Link)>, GraphError> {
        let id = self
            .node_id(node)
            .ok_or_else(|| GraphError::UnknownNode(node.to_string(self.k)))?;
        let mut out: Vec<(CanonicalKmer, Link)> = Vec::with_capacity(8);
        for (nb, link) in self.raw_links(id as usize) {
            if nb != node && !out.iter().any(|(x, _)| *x == nb) {
                out.push((nb, link));
            }
        }
        out.sort_by_key(|(x, _)| *x);
        Ok(out)
    }

    /// Edge bit test in a given orientation: does the oriented k-mer `from`
    /// have `to` (also oriented) as its successor?
    pub fn has_successor(&self, from: Kmer, to: Kmer) -> bool {
        let k = self.k;
        if from.extend_right(to.last_code(), k) != to {
            return false;
        }
        let canon = from.canonical(k);
        let Some(node) = self.node(canon) else {
            return false;
        };
        let bit = if canon.kmer() == from {
            forward_bit(to.last_code())
        } else {
            reverse_bit(3 - to.last_code())
        };
        node.edges & bit != 0
    }

    /// Total k-mer observations per color.
    pub fn color_mass(&self) -> Vec<u64> {
        let c = self.colors.len();
        let mut mass = vec![0u64; c];
        for row in self.coverage.chunks_exact(c.max(1)) {
            for (m, &x) in mass.iter_mut().zip(row) {
                *m += x as u64;
            }
        }
        mass
    }

    pub fn num_edges(&self) -> usize {
        self.adj.len() / 2
    }
}
