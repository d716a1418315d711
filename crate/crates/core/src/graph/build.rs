use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{forward_bit, reverse_bit, ColoredGraph, GraphError};
use crate::kmer::{validate_k, CanonicalKmer, KmerWindows};
use crate::reads::{open_reads, ReadFormat};

/// One manifest line: a sample name and its read files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorSpec {
    pub name: String,
    pub files: Vec<PathBuf>,
}

/// Parses `<sample-name>\t<path>,<path>,...` lines. Relative paths are
/// resolved against the manifest's directory; blank lines and `#` comments
/// are skipped.
pub fn parse_manifest(path: &Path) -> Result<Vec<ColorSpec>, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut colors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |msg: &str| GraphError::Manifest {
            path: path.to_path_buf(),
            line: i + 1,
            msg: msg.to_string(),
        };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, files) = line
            .split_once('\t')
            .ok_or_else(|| err("expected <name>\\t<paths>"))?;
        if name.is_empty() {
            return Err(err("empty sample name"));
        }
        if colors.iter().any(|c: &ColorSpec| c.name == name) {
            return Err(err("duplicate sample name"));
        }
        let files: Vec<PathBuf> = files
            .split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .map(|f| {
                let p = PathBuf::from(f);
                if p.is_absolute() {
                    p
                } else {
                    base.join(p)
                }
            })
            .collect();
        if files.is_empty() {
            return Err(err("no read files listed"));
        }
        colors.push(ColorSpec {
            name: name.to_string(),
            files,
        });
    }
    if colors.is_empty() {
        return Err(GraphError::NoColors);
    }
    Ok(colors)
}

pub(super) struct NodeAcc {
    coverage: Vec<u32>,
    edges: u8,
}

/// Mutable accumulation table; finish() freezes it into a [`ColoredGraph`].
///
/// Independent builders over the same colors can be merged in any order and
/// yield the same graph.
pub struct GraphBuilder {
    k: usize,
    colors: Vec<String>,
    pub(super) table: HashMap<CanonicalKmer, NodeAcc>,
}

impl GraphBuilder {
    pub fn new(k: usize, colors: Vec<String>) -> Result<Self, GraphError> {
        validate_k(k)?;
        if colors.is_empty() {
            return Err(GraphError::NoColors);
        }
        Ok(GraphBuilder {
            k,
            colors,
            table: HashMap::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn entry(&mut self, kmer: CanonicalKmer) -> &mut NodeAcc {
        let c = self.colors.len();
        self.table.entry(kmer).or_insert_with(|| NodeAcc {
            coverage: vec![0; c],
            edges: 0,
        })
    }

    /// Counts every window of `seq` for `color` and links consecutive
    /// windows of each clean segment.
    pub fn add_sequence(&mut self, color: usize, seq: &[u8]) {
        assert!(color < self.colors.len(), "color {color} out of range");
        let k = self.k;
        let mut prev: Option<crate::kmer::Window> = None;
        for w in KmerWindows::new(seq, k) {
            let node = self.entry(w.canonical());
            node.coverage[color] = node.coverage[color].saturating_add(1);
            if let (Some(p), false) = (prev, w.segment_start) {
                let next_base = w.forward.last_code();
                let prev_base = p.forward.first_code(k);
                let bit = if p.is_forward() {
                    forward_bit(next_base)
                } else {
                    reverse_bit(3 - next_base)
                };
                self.entry(p.canonical()).edges |= bit;
                let bit = if w.is_forward() {
                    reverse_bit(prev_base)
                } else {
                    forward_bit(3 - prev_base)
                };
                self.entry(w.canonical()).edges |= bit;
            }
            prev = Some(w);
        }
    }

    pub fn merge(&mut self, other: GraphBuilder) {
        assert_eq!(self.k, other.k);
        assert_eq!(self.colors, other.colors);
        for (kmer, acc) in other.table {
            let node = self.entry(kmer);
            for (a, b) in node.coverage.iter_mut().zip(acc.coverage) {
                *a = a.saturating_add(b);
            }
            node.edges |= acc.edges;
        }
    }

    pub fn finish(self) -> ColoredGraph {
        let mut entries: Vec<_> = self.table.into_iter().collect();
        entries.sort_unstable_by_key(|(x, _)| *x);
        let c = self.colors.len();
        let mut kmers = Vec::with_capacity(entries.len());
        let mut edges = Vec::with_capacity(entries.len());
        let mut coverage = Vec::with_capacity(entries.len() * c);
        for (x, acc) in entries {
            kmers.push(x);
            edges.push(acc.edges);
            coverage.extend(acc.coverage);
        }
        ColoredGraph::from_parts(self.k, self.colors, kmers, edges, coverage)
    }
}

/// Builds the colored graph from a manifest, reading files on up to
/// `threads` workers. The result does not depend on the worker count.
pub fn build_graph(
    manifest: &[ColorSpec],
    k: usize,
    threads: usize,
) -> Result<ColoredGraph, GraphError> {
    validate_k(k)?;
    if manifest.is_empty() {
        return Err(GraphError::NoColors);
    }
    let names: Vec<String> = manifest.iter().map(|c| c.name.clone()).collect();
    let jobs: Vec<(usize, &Path)> = manifest
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| c.files.iter().map(move |f| (ci, f.as_path())))
        .collect();
    let next = AtomicUsize::new(0);
    let first_error: Mutex<Option<(usize, GraphError)>> = Mutex::new(None);
    let workers = threads.clamp(1, jobs.len().max(1));

    let partials: Vec<GraphBuilder> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut local = GraphBuilder::new(k, names.clone()).expect("validated");
                    loop {
                        let j = next.fetch_add(1, Ordering::Relaxed);
                        let Some(&(color, path)) = jobs.get(j) else {
                            break;
                        };
                        if let Err(e) = ingest(&mut local, color, path, &names[color]) {
                            let mut slot = first_error.lock().unwrap();
                            // keep the error of the earliest job for a stable message
                            if slot.as_ref().is_none_or(|(jj, _)| j < *jj) {
                                *slot = Some((j, e));
                            }
                        }
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("build worker panicked"))
            .collect()
    });

    if let Some((_, e)) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let mut partials = partials.into_iter();
    let mut acc = partials.next().expect("at least one worker");
    for p in partials {
        acc.merge(p);
    }
    let graph = acc.finish();
    log::info!(
        "built graph: k={} colors={} nodes={}",
        graph.k(),
        graph.num_colors(),
        graph.len()
    );
    Ok(graph)
}

fn ingest(b: &mut GraphBuilder, color: usize, path: &Path, name: &str) -> Result<(), GraphError> {
    let wrap = |source| GraphError::Reads {
        color: name.to_string(),
        source,
    };
    for read in open_reads(path, ReadFormat::Auto).map_err(wrap)? {
        let read = read.map_err(wrap)?;
        b.add_sequence(color, &read.seq);
    }
    Ok(())
}
