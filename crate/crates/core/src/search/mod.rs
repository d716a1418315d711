//! Neighborhood decomposition and parallel `2(k+n)+2` cycle enumeration.

mod cycle;
mod cycles_file;
mod parallel;
mod subgraph;
mod walk;

use std::time::Duration;

pub use cycle::{canonicalize_cycle, CanonicalCycle, Cycle};
pub use cycles_file::{
    load_cycles, merge_cycle_sets, parse_cycles, save_cycles, write_cycles, CycleSet,
};
pub use parallel::{parallel_search, EntryStat, SearchResult, SearchStats};
pub use subgraph::{branching_vertices, complexity, graph_neighborhood, Subgraph};
pub use walk::{cycle_forms, search_cycles, search_cycles_with_lengths, LengthSet};

use crate::index::{Fraction, IndexError, SelectMode, DEFAULT_CHUNK};
use crate::kmer::validate_k;

/// Default neighborhood cap.
pub const DEFAULT_VMAX: usize = 5000;

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("unknown seed k-mer {0}")]
    UnknownSeed(String),
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cycles file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cycle sets do not belong together: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchParams {
    pub k: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub v_max: usize,
    pub fraction: Fraction,
    pub select_mode: SelectMode,
    pub workers: usize,
    pub budget: Option<Duration>,
    pub chunk: usize,
}

impl SearchParams {
    /// Defaults: `n` in `[0, k]`, 5000-vertex neighborhoods, whole shard,
    /// one worker, no budget.
    pub fn new(k: usize) -> Self {
        SearchParams {
            k,
            n_min: 0,
            n_max: k,
            v_max: DEFAULT_VMAX,
            fraction: Fraction::ONE,
            select_mode: SelectMode::default(),
            workers: 1,
            budget: None,
            chunk: DEFAULT_CHUNK,
        }
    }

    pub fn with_n_range(mut self, n_min: usize, n_max: usize) -> Self {
        self.n_min = n_min;
        self.n_max = n_max;
        self
    }

    pub fn with_vmax(mut self, v_max: usize) -> Self {
        self.v_max = v_max;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_budget(mut self, budget: Option<Duration>) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::InvalidParams(m));
        if let Err(e) = validate_k(self.k) {
            return bad(e.to_string());
        }
        if self.n_min > self.n_max || self.n_max > self.k {
            return bad(format!(
                "need 0 <= n_min <= n_max <= k, got n_min={} n_max={} k={}",
                self.n_min, self.n_max, self.k
            ));
        }
        if self.v_max < self.min_subgraph() {
            return bad(format!(
                "v_max {} is below 2k+2 = {}",
                self.v_max,
                self.min_subgraph()
            ));
        }
        if self.workers == 0 {
            return bad("worker count must be >= 1".into());
        }
        if self.chunk == 0 {
            return bad("chunk size must be >= 1".into());
        }
        Ok(())
    }

    /// Smallest subgraph that can hold a bubble cycle: `2k+2`.
    pub fn min_subgraph(&self) -> usize {
        2 * self.k + 2
    }

    /// Target cycle lengths `2(k+n)+2`, ascending.
    pub fn lengths(&self) -> Vec<usize> {
        (self.n_min..=self.n_max)
            .map(|n| 2 * (self.k + n) + 2)
            .collect()
    }

    pub fn length_set(&self) -> LengthSet {
        LengthSet::new(self.lengths())
    }
}
