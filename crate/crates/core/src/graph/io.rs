//! Binary graph file.
//!
//! Layout (little-endian): magic `PICYCGPH`, u32 version, u32 k, u32 color
//! count, colors as u32-length-prefixed UTF-8, u64 node count, u64
//! fingerprint, then per node in sorted order: packed k-mer
//! (`ceil(k/4)` bytes), one u32 coverage per color, one edge byte.
//!
//! The fingerprint is the first 8 bytes of SHA-256 over everything after the
//! version field except the fingerprint itself.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{ColoredGraph, GraphError};
use crate::kmer::{packed_len, validate_k, CanonicalKmer, Kmer};

pub const GRAPH_MAGIC: &[u8; 8] = b"PICYCGPH";
pub const GRAPH_VERSION: u32 = 1;

fn write_header_fields(g: &ColoredGraph, out: &mut Vec<u8>) {
    out.extend_from_slice(&(g.k as u32).to_le_bytes());
    out.extend_from_slice(&(g.colors.len() as u32).to_le_bytes());
    for name in &g.colors {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
    }
    out.extend_from_slice(&(g.kmers.len() as u64).to_le_bytes());
}

fn write_node(g: &ColoredGraph, i: usize, out: &mut Vec<u8>) {
    let c = g.colors.len();
    g.kmers[i].kmer().pack(g.k, out);
    for &x in &g.coverage[i * c..(i + 1) * c] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.push(g.edges[i]);
}

fn digest_u64(hasher: Sha256) -> u64 {
    let d = hasher.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("sha256 is 32 bytes"))
}

pub(crate) fn fingerprint(g: &ColoredGraph) -> u64 {
    let mut hasher = Sha256::new();
    let mut buf = Vec::new();
    write_header_fields(g, &mut buf);
    hasher.update(&buf);
    for i in 0..g.kmers.len() {
        buf.clear();
        write_node(g, i, &mut buf);
        hasher.update(&buf);
    }
    digest_u64(hasher)
}

/// Serializes a graph to any writer.
pub fn write_graph<W: Write>(g: &ColoredGraph, mut w: W) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(1 << 16);
    buf.extend_from_slice(GRAPH_MAGIC);
    buf.extend_from_slice(&GRAPH_VERSION.to_le_bytes());
    write_header_fields(g, &mut buf);
    buf.extend_from_slice(&g.fingerprint.to_le_bytes());
    for i in 0..g.kmers.len() {
        write_node(g, i, &mut buf);
        if buf.len() >= 1 << 16 {
            w.write_all(&buf)?;
            buf.clear();
        }
    }
    w.write_all(&buf)?;
    w.flush()
}

pub fn save_graph(g: &ColoredGraph, path: &Path) -> Result<(), GraphError> {
    let io_err = |source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    };
    let f = File::create(path).map_err(io_err)?;
    write_graph(g, BufWriter::new(f)).map_err(io_err)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], GraphError> {
        let end = self.pos.checked_add(n).ok_or(GraphError::Truncated)?;
        let s = self.data.get(self.pos..end).ok_or(GraphError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, GraphError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, GraphError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses a serialized graph and verifies its fingerprint.
pub fn read_graph(data: &[u8]) -> Result<ColoredGraph, GraphError> {
    if data.len() < GRAPH_MAGIC.len() || &data[..8] != GRAPH_MAGIC {
        return Err(GraphError::BadMagic);
    }
    let mut cur = Cursor { data, pos: 8 };
    let version = cur.u32()?;
    if version != GRAPH_VERSION {
        return Err(GraphError::VersionMismatch(version));
    }
    let k = cur.u32()? as usize;
    validate_k(k).map_err(|e| GraphError::Corrupt(e.to_string()))?;
    let c = cur.u32()? as usize;
    if c == 0 {
        return Err(GraphError::Corrupt("zero colors".into()));
    }
    let mut colors = Vec::with_capacity(c.min(1 << 16));
    for _ in 0..c {
        let len = cur.u32()? as usize;
        let name = std::str::from_utf8(cur.take(len)?)
            .map_err(|_| GraphError::Corrupt("color name is not UTF-8".into()))?;
        colors.push(name.to_string());
    }
    let n = cur.u64()? as usize;
    let expected = cur.u64()?;
    let record = packed_len(k) + 4 * c + 1;
    let body = n.checked_mul(record).ok_or(GraphError::Truncated)?;
    if data.len() - cur.pos < body {
        return Err(GraphError::Truncated);
    }
    if data.len() - cur.pos > body {
        return Err(GraphError::Corrupt("trailing bytes".into()));
    }
    let mut kmers = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n);
    let mut coverage = Vec::with_capacity(n * c);
    for _ in 0..n {
        let kmer = Kmer::unpack(cur.take(packed_len(k))?, k);
        let canon = CanonicalKmer::from_canonical(kmer, k)
            .ok_or_else(|| GraphError::Corrupt("non-canonical k-mer".into()))?;
        if kmers.last().is_some_and(|&prev| prev >= canon) {
            return Err(GraphError::Corrupt("nodes not strictly sorted".into()));
        }
        kmers.push(canon);
        for _ in 0..c {
            coverage.push(cur.u32()?);
        }
        edges.push(cur.take(1)?[0]);
    }
    let g = ColoredGraph::from_parts(k, colors, kmers, edges, coverage);
    if g.fingerprint != expected {
        return Err(GraphError::DigestMismatch {
            expected,
            actual: g.fingerprint,
        });
    }
    Ok(g)
}

pub fn load_graph(path: &Path) -> Result<ColoredGraph, GraphError> {
    let mut data = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    read_graph(&data)
}
