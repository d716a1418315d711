use std::collections::HashMap;
use std::collections::VecDeque;

use super::SearchError;
use crate::graph::ColoredGraph;
use crate::kmer::CanonicalKmer;

/// Bounded undirected neighborhood around a seed vertex.
///
/// Vertices keep insertion order (the seed is local id 0); adjacency is
/// stored over local ids, sorted, restricted to the included vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    seed: CanonicalKmer,
    vertices: Vec<CanonicalKmer>,
    adj: Vec<Vec<u32>>,
}

impl Subgraph {
    /// Builds a subgraph from an explicit undirected edge list over local
    /// ids. Vertex 0 is the seed. Duplicate edges and self-loops are dropped.
    pub fn from_edges(vertices: Vec<CanonicalKmer>, edges: &[(u32, u32)]) -> Self {
        assert!(!vertices.is_empty(), "subgraph needs a seed");
        let mut adj = vec![Vec::new(); vertices.len()];
        for &(a, b) in edges {
            if a != b {
                adj[a as usize].push(b);
                adj[b as usize].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Subgraph {
            seed: vertices[0],
            vertices,
            adj,
        }
    }

    pub fn seed(&self) -> CanonicalKmer {
        self.seed
    }

    pub fn vertices(&self) -> &[CanonicalKmer] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn neighbors(&self, local: u32) -> &[u32] {
        &self.adj[local as usize]
    }

    pub fn degree(&self, local: u32) -> usize {
        self.adj[local as usize].len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn local_id(&self, kmer: CanonicalKmer) -> Option<u32> {
        self.vertices
            .iter()
            .position(|&x| x == kmer)
            .map(|i| i as u32)
    }

    pub fn kmer(&self, local: u32) -> CanonicalKmer {
        self.vertices[local as usize]
    }

    /// Local ids with degree >= 3 inside the subgraph, in k-mer order.
    pub fn branching_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = (0..self.len() as u32)
            .filter(|&v| self.degree(v) >= 3)
            .collect();
        ids.sort_by_key(|&v| self.vertices[v as usize]);
        ids
    }

    /// Edges per vertex.
    pub fn complexity(&self) -> f64 {
        self.num_edges() as f64 / self.len() as f64
    }
}

/// Breadth-first neighborhood of `seed`, capped at `v_max` vertices.
///
/// Vertices are expanded in insertion order; each expansion appends unseen
/// neighbors (in k-mer order) until the cap is reached or the frontier is
/// exhausted. All graph edges among the included vertices are recorded.
pub fn graph_neighborhood(
    graph: &ColoredGraph,
    seed: CanonicalKmer,
    v_max: usize,
) -> Result<Subgraph, SearchError> {
    let seed_id = graph
        .node_id(seed)
        .ok_or_else(|| SearchError::UnknownSeed(seed.to_string(graph.k())))?;
    let v_max = v_max.max(1);
    let mut order: Vec<u32> = vec![seed_id];
    let mut local: HashMap<u32, u32> = HashMap::from([(seed_id, 0)]);
    let mut queue = VecDeque::from([seed_id]);
    'grow: while let Some(v) = queue.pop_front() {
        for &w in graph.adjacent_ids(v) {
            if local.contains_key(&w) {
                continue;
            }
            if order.len() >= v_max {
                break 'grow;
            }
            local.insert(w, order.len() as u32);
            order.push(w);
            queue.push_back(w);
        }
    }
    let adj = order
        .iter()
        .map(|&g| {
            let mut list: Vec<u32> = graph
                .adjacent_ids(g)
                .iter()
                .filter_map(|w| local.get(w).copied())
                .collect();
            list.sort_unstable();
            list
        })
        .collect();
    Ok(Subgraph {
        seed,
        vertices: order.into_iter().map(|g| graph.kmer_at(g)).collect(),
        adj,
    })
}

/// Vertices that branch inside the subgraph (degree >= 3), sorted.
pub fn branching_vertices(subgraph: &Subgraph) -> Vec<CanonicalKmer> {
    subgraph
        .branching_ids()
        .into_iter()
        .map(|v| subgraph.kmer(v))
        .collect()
}

pub fn complexity(subgraph: &Subgraph) -> f64 {
    subgraph.complexity()
}
