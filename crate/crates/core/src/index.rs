//! Branching-vertex index, sharding across processes and chunking across
//! workers.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_rational::Ratio;

use crate::graph::ColoredGraph;
use crate::kmer::{packed_len, CanonicalKmer, Kmer};

pub const INDEX_MAGIC: &[u8; 8] = b"PICYCIDX";
pub const INDEX_VERSION: u32 = 1;
/// Entries per work chunk handed to an idle worker.
pub const DEFAULT_CHUNK: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("shard id {id} out of range for {count} shards")]
    ShardOutOfRange { id: usize, count: usize },
    #[error("fraction must be in (0, 1], got {0}")]
    InvalidFraction(String),
    #[error("index/graph pair mismatch: index {index:#018x}, graph {graph:#018x}")]
    FingerprintMismatch { index: u64, graph: u64 },
    #[error("bad magic: not an index file")]
    BadMagic,
    #[error("unsupported index file version {0}")]
    VersionMismatch(u32),
    #[error("truncated index file")]
    Truncated,
    #[error("corrupt index file: {0}")]
    Corrupt(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Sorted list of the graph's branching vertices (undirected degree >= 3).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingIndex {
    pub entries: Vec<CanonicalKmer>,
    pub fingerprint: u64,
}

impl BranchingIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn check_graph(&self, graph: &ColoredGraph) -> Result<(), IndexError> {
        check_fingerprint(self.fingerprint, graph)
    }
}

fn check_fingerprint(fp: u64, graph: &ColoredGraph) -> Result<(), IndexError> {
    if fp == graph.fingerprint() {
        Ok(())
    } else {
        Err(IndexError::FingerprintMismatch {
            index: fp,
            graph: graph.fingerprint(),
        })
    }
}

/// Minimum undirected degree of a branching vertex.
pub const BRANCHING_DEGREE: usize = 3;

/// Scans the graph for branching vertices on up to `threads` workers. Node
/// order is sorted, so concatenating per-range results keeps the index
/// sorted regardless of worker count.
pub fn build_index(graph: &ColoredGraph, threads: usize) -> BranchingIndex {
    let n = graph.len();
    let workers = threads.clamp(1, n.max(1));
    let per = n.div_ceil(workers).max(1);
    let parts: Vec<Vec<CanonicalKmer>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    let lo = (w * per).min(n);
                    let hi = ((w + 1) * per).min(n);
                    (lo as u32..hi as u32)
                        .filter(|&id| graph.degree_of(id) >= BRANCHING_DEGREE)
                        .map(|id| graph.kmer_at(id))
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("index worker panicked"))
            .collect()
    });
    BranchingIndex {
        entries: parts.concat(),
        fingerprint: graph.fingerprint(),
    }
}

/// A contiguous slice of an index, possibly thinned by [`select_fraction`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexShard {
    pub shard_id: usize,
    pub shard_count: usize,
    /// Position of the shard's first entry in the parent index.
    pub offset: usize,
    pub entries: Vec<CanonicalKmer>,
    pub fingerprint: u64,
    /// Size of the parent index.
    pub parent_len: usize,
}

impl IndexShard {
    pub fn whole(index: &BranchingIndex) -> Self {
        IndexShard {
            shard_id: 0,
            shard_count: 1,
            offset: 0,
            entries: index.entries.clone(),
            fingerprint: index.fingerprint,
            parent_len: index.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn check_graph(&self, graph: &ColoredGraph) -> Result<(), IndexError> {
        check_fingerprint(self.fingerprint, graph)
    }
}

/// Half-open entry range of shard `id` out of `count`; the first
/// `len % count` shards get one extra entry.
pub fn shard_range(len: usize, id: usize, count: usize) -> Result<Range<usize>, IndexError> {
    if count == 0 || id >= count {
        return Err(IndexError::ShardOutOfRange { id, count });
    }
    let base = len / count;
    let extra = len % count;
    let start = id * base + id.min(extra);
    let size = base + usize::from(id < extra);
    Ok(start..start + size)
}

pub fn shard_index(
    index: &BranchingIndex,
    shard_id: usize,
    shard_count: usize,
) -> Result<IndexShard, IndexError> {
    let r = shard_range(index.len(), shard_id, shard_count)?;
    Ok(IndexShard {
        shard_id,
        shard_count,
        offset: r.start,
        entries: index.entries[r].to_vec(),
        fingerprint: index.fingerprint,
        parent_len: index.len(),
    })
}

/// Rational share of a shard in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction(Ratio<u64>);

impl Fraction {
    pub const ONE: Fraction = Fraction(Ratio::new_raw(1, 1));

    pub fn new(numer: u64, denom: u64) -> Result<Self, IndexError> {
        if denom == 0 || numer == 0 || numer > denom {
            return Err(IndexError::InvalidFraction(format!("{numer}/{denom}")));
        }
        Ok(Fraction(Ratio::new(numer, denom)))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    /// `ceil(self * n)`
    pub fn ceil_of(&self, n: usize) -> usize {
        let n = n as u128;
        (n * self.numer() as u128).div_ceil(self.denom() as u128) as usize
    }

    /// `floor(1 / self)`
    pub fn stride(&self) -> usize {
        (self.denom() / self.numer()) as usize
    }
}

impl FromStr for Fraction {
    type Err = IndexError;

    /// Accepts `a/b` or a decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self, IndexError> {
        let bad = || IndexError::InvalidFraction(s.to_string());
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let a = a.trim().parse::<u64>().map_err(|_| bad())?;
            let b = b.trim().parse::<u64>().map_err(|_| bad())?;
            return Fraction::new(a, b).map_err(|_| bad());
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let denom = 10u64.pow(frac.len() as u32);
        let frac_val: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let numer = int
            .checked_mul(denom)
            .and_then(|x| x.checked_add(frac_val))
            .ok_or_else(bad)?;
        Fraction::new(numer, denom).map_err(|_| bad())
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectMode {
    /// First `ceil(fraction * n)` entries.
    Prefix,
    /// Every `floor(1 / fraction)`-th entry.
    #[default]
    Strided,
}

impl FromStr for SelectMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "prefix" => Ok(SelectMode::Prefix),
            "strided" => Ok(SelectMode::Strided),
            other => Err(format!("unknown selection mode {other:?}")),
        }
    }
}

pub fn select_fraction(shard: &IndexShard, fraction: Fraction, mode: SelectMode) -> IndexShard {
    let entries = match mode {
        SelectMode::Prefix => shard.entries[..fraction.ceil_of(shard.len())].to_vec(),
        SelectMode::Strided => shard
            .entries
            .iter()
            .step_by(fraction.stride())
            .copied()
            .collect(),
    };
    IndexShard {
        entries,
        ..shard.clone()
    }
}

/// Fixed-size chunks covering `0..len`.
pub fn partition_for_workers(len: usize, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    (0..len)
        .step_by(chunk)
        .map(|s| s..(s + chunk).min(len))
        .collect()
}

/// Shared queue of work chunks; idle workers pull the next chunk.
pub struct ChunkQueue {
    chunks: Vec<Range<usize>>,
    next: AtomicUsize,
}

impl ChunkQueue {
    pub fn new(len: usize, chunk: usize) -> Self {
        ChunkQueue {
            chunks: partition_for_workers(len, chunk),
            next: AtomicUsize::new(0),
        }
    }

    pub fn pop(&self) -> Option<Range<usize>> {
        let i = self.next.fetch_add(1, Ordering::Relaxed);
        self.chunks.get(i).cloned()
    }

    pub fn num_chunks(&self) -> usize {
        self.chunks.len()
    }
}

/// Writes an index. k-mers are packed with the graph's `k`.
pub fn write_index<W: Write>(index: &BranchingIndex, k: usize, mut w: W) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(24 + index.len() * packed_len(k));
    buf.extend_from_slice(INDEX_MAGIC);
    buf.extend_from_slice(&INDEX_VERSION.to_le_bytes());
    buf.extend_from_slice(&index.fingerprint.to_le_bytes());
    buf.extend_from_slice(&(index.len() as u64).to_le_bytes());
    for e in &index.entries {
        e.kmer().pack(k, &mut buf);
    }
    w.write_all(&buf)?;
    w.flush()
}

pub fn save_index(index: &BranchingIndex, k: usize, path: &Path) -> Result<(), IndexError> {
    let io_err = |source| IndexError::Io {
        path: path.to_path_buf(),
        source,
    };
    let f = File::create(path).map_err(io_err)?;
    write_index(index, k, BufWriter::new(f)).map_err(io_err)
}

/// Parses an index and checks that it belongs to `graph`.
pub fn read_index(data: &[u8], graph: &ColoredGraph) -> Result<BranchingIndex, IndexError> {
    if data.len() < 8 || &data[..8] != INDEX_MAGIC {
        return Err(IndexError::BadMagic);
    }
    let field = |range: Range<usize>| data.get(range).ok_or(IndexError::Truncated);
    let version = u32::from_le_bytes(field(8..12)?.try_into().unwrap());
    if version != INDEX_VERSION {
        return Err(IndexError::VersionMismatch(version));
    }
    let fingerprint = u64::from_le_bytes(field(12..20)?.try_into().unwrap());
    let count = u64::from_le_bytes(field(20..28)?.try_into().unwrap()) as usize;
    check_fingerprint(fingerprint, graph)?;
    let k = graph.k();
    let rec = packed_len(k);
    let body = &data[28..];
    match count.checked_mul(rec) {
        Some(n) if n == body.len() => {}
        Some(n) if n > body.len() => return Err(IndexError::Truncated),
        None => return Err(IndexError::Truncated),
        Some(_) => return Err(IndexError::Corrupt("trailing bytes".into())),
    }
    let mut entries = Vec::with_capacity(count);
    for chunk in body.chunks_exact(rec) {
        let kmer = Kmer::unpack(chunk, k);
        let canon = CanonicalKmer::from_canonical(kmer, k)
            .ok_or_else(|| IndexError::Corrupt("non-canonical k-mer".into()))?;
        if entries.last().is_some_and(|&p| p >= canon) {
            return Err(IndexError::Corrupt("entries not strictly sorted".into()));
        }
        if !graph.contains(canon) {
            return Err(IndexError::Corrupt("entry missing from graph".into()));
        }
        entries.push(canon);
    }
    Ok(BranchingIndex {
        entries,
        fingerprint,
    })
}

pub fn load_index(path: &Path, graph: &ColoredGraph) -> Result<BranchingIndex, IndexError> {
    let mut data = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    read_index(&data, graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn fake_index(n: usize) -> BranchingIndex {
        BranchingIndex {
            entries: (0..n as u128)
                .map(|i| Kmer::from_bits(i).canonical(31))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
            fingerprint: 7,
        }
    }

    fn sizes(len: usize, count: usize) -> Vec<usize> {
        (0..count)
            .map(|i| shard_range(len, i, count).unwrap().len())
            .collect()
    }

    #[test]
    fn remainder_goes_to_front() {
        assert_eq!(sizes(10, 3), [4, 3, 3]);
        assert_eq!(
            sizes(1_314_786, 5),
            [262_958, 262_957, 262_957, 262_957, 262_957]
        );
        assert_eq!(sizes(0, 4), [0, 0, 0, 0]);
        let idx = fake_index(17);
        assert_eq!(shard_index(&idx, 0, 1).unwrap().entries, idx.entries);
        assert!(matches!(
            shard_index(&idx, 3, 3),
            Err(IndexError::ShardOutOfRange { id: 3, count: 3 })
        ));
    }

    #[test]
    fn fraction_selection() {
        let idx = fake_index(9);
        let shard = IndexShard::whole(&idx);
        let third = Fraction::new(1, 3).unwrap();
        assert_eq!(
            select_fraction(&shard, Fraction::ONE, SelectMode::Prefix),
            shard
        );
        assert_eq!(
            select_fraction(&shard, Fraction::ONE, SelectMode::Strided),
            shard
        );
        assert_eq!(
            select_fraction(&shard, third, SelectMode::Prefix).entries,
            idx.entries[..3]
        );
        let strided = select_fraction(&shard, third, SelectMode::Strided).entries;
        assert_eq!(strided, [idx.entries[0], idx.entries[3], idx.entries[6]]);
    }

    #[test]
    fn fraction_parsing() {
        assert_eq!(
            "1/3".parse::<Fraction>().unwrap(),
            Fraction::new(1, 3).unwrap()
        );
        assert_eq!(
            "0.25".parse::<Fraction>().unwrap(),
            Fraction::new(1, 4).unwrap()
        );
        assert_eq!("1".parse::<Fraction>().unwrap(), Fraction::ONE);
        for bad in ["0", "0/3", "4/3", "1.5", "-1", "x", "1/0"] {
            assert!(bad.parse::<Fraction>().is_err(), "{bad}");
        }
        assert!(Fraction::new(0, 1).is_err());
    }

    #[test]
    fn chunking() {
        let sizes: Vec<usize> = partition_for_workers(130, 64)
            .iter()
            .map(|r| r.len())
            .collect();
        assert_eq!(sizes, [64, 64, 2]);
        assert!(partition_for_workers(0, 64).is_empty());
        let q = ChunkQueue::new(130, 64);
        let mut seen = Vec::new();
        while let Some(r) = q.pop() {
            seen.extend(r);
        }
        assert_eq!(seen, (0..130).collect::<Vec<_>>());
    }

    #[test]
    fn chunk_queue_assigns_each_entry_once_under_contention() {
        let n = 10_000;
        for workers in [1, 8] {
            let q = ChunkQueue::new(n, 64);
            let mut all: Vec<usize> = std::thread::scope(|s| {
                let hs: Vec<_> = (0..workers)
                    .map(|_| {
                        s.spawn(|| {
                            let mut mine = Vec::new();
                            while let Some(r) = q.pop() {
                                mine.extend(r);
                            }
                            mine
                        })
                    })
                    .collect();
                hs.into_iter().flat_map(|h| h.join().unwrap()).collect()
            });
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }

    fn random_graph(seed: u64) -> crate::graph::ColoredGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = GraphBuilder::new(5, vec!["a".into(), "b".into()]).unwrap();
        for _ in 0..40 {
            let read: Vec<u8> = (0..30).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect();
            b.add_sequence(rng.gen_range(0..2), &read);
        }
        b.finish()
    }

    #[test]
    fn index_matches_exhaustive_recount() {
        for seed in 0..5 {
            let g = random_graph(seed);
            let idx = build_index(&g, 1);
            let brute: Vec<CanonicalKmer> = g
                .kmers()
                .iter()
                .copied()
                .filter(|&x| g.neighbors(x).unwrap().len() >= 3)
                .collect();
            assert_eq!(idx.entries, brute);
            assert!(!brute.is_empty());
            for threads in [2, 3, 8] {
                assert_eq!(build_index(&g, threads), idx);
            }
        }
    }

    #[test]
    fn simple_path_has_empty_index() {
        let mut b = GraphBuilder::new(5, vec!["a".into()]).unwrap();
        b.add_sequence(0, b"ACGGTCATTGCAGTTCAG");
        let g = b.finish();
        assert!(build_index(&g, 2).is_empty());
    }

    #[test]
    fn index_file_round_trip_and_mismatch() {
        let g = random_graph(1);
        let other = random_graph(2);
        let idx = build_index(&g, 1);
        let mut buf = Vec::new();
        write_index(&idx, g.k(), &mut buf).unwrap();
        assert_eq!(&buf[..8], b"PICYCIDX");
        assert_eq!(read_index(&buf, &g).unwrap(), idx);
        assert!(matches!(
            read_index(&buf, &other),
            Err(IndexError::FingerprintMismatch { .. })
        ));
        assert!(matches!(read_index(&[], &g), Err(IndexError::BadMagic)));
        assert!(matches!(
            read_index(&buf[..buf.len() - 1], &g),
            Err(IndexError::Truncated)
        ));

        let empty = BranchingIndex {
            entries: vec![],
            fingerprint: g.fingerprint(),
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("i.idx");
        save_index(&empty, g.k(), &p).unwrap();
        assert_eq!(load_index(&p, &g).unwrap(), empty);
    }

    #[test]
    fn large_synthetic_index_round_trip() {
        // 10^6 entries, written and parsed without a backing graph check
        let k = 31;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let set: BTreeSet<CanonicalKmer> = (0..1_000_000)
            .map(|_| Kmer::from_bits((rng.gen::<u64>() >> 2) as u128).canonical(k))
            .collect();
        let idx = BranchingIndex {
            entries: set.into_iter().collect(),
            fingerprint: 0xfeed,
        };
        let mut buf = Vec::new();
        write_index(&idx, k, &mut buf).unwrap();
        let body = &buf[28..];
        let back: Vec<CanonicalKmer> = body
            .chunks_exact(packed_len(k))
            .map(|c| CanonicalKmer::from_canonical(Kmer::unpack(c, k), k).unwrap())
            .collect();
        assert_eq!(back, idx.entries);
        let mut again = Vec::new();
        write_index(
            &BranchingIndex {
                entries: back,
                fingerprint: 0xfeed,
            },
            k,
            &mut again,
        )
        .unwrap();
        assert_eq!(again, buf);
    }

    proptest! {
        #[test]
        fn shards_partition_the_index(len in 0usize..500, count in 1usize..=10) {
            let idx = fake_index(len);
            let mut union = Vec::new();
            let mut sizes = Vec::new();
            for i in 0..count {
                let s = shard_index(&idx, i, count).unwrap();
                prop_assert_eq!(s.offset, union.len());
                sizes.push(s.len());
                union.extend(s.entries);
            }
            prop_assert_eq!(&union, &idx.entries);
            let max = *sizes.iter().max().unwrap();
            let min = *sizes.iter().min().unwrap();
            prop_assert!(max - min <= 1);
        }

        #[test]
        fn selection_stays_sorted(len in 0usize..300, num in 1u64..10, den in 1u64..10) {
            prop_assume!(num <= den);
            let idx = fake_index(len);
            let shard = IndexShard::whole(&idx);
            let f = Fraction::new(num, den).unwrap();
            for mode in [SelectMode::Prefix, SelectMode::Strided] {
                let sel = select_fraction(&shard, f, mode);
                prop_assert!(sel.entries.windows(2).all(|w| w[0] < w[1]));
            }
            prop_assert_eq!(select_fraction(&shard, f, SelectMode::Prefix).len(), f.ceil_of(len));
        }
    }
}
