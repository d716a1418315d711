//! Text serialization of cycle sets.
//!
//! ```text
//! #picyc-cycles v1
//! #k=21 fingerprint=0x0123456789abcdef index=100 used=100 subgraphs=100
//! <id-hex>\t<length>\t<branch positions>\t<k-mer>,<k-mer>,...
//! ```
//!
//! Cycles are written in canonical vertex order, sorted by canonical form,
//! so a set always serializes to the same bytes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::cycle::{canonicalize_cycle, CanonicalCycle, Cycle};
use super::parallel::SearchResult;
use super::SearchError;
use crate::kmer::CanonicalKmer;

const HEADER: &str = "#picyc-cycles v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleSet {
    pub k: usize,
    pub fingerprint: u64,
    pub index_size: usize,
    pub used_index: usize,
    pub subgraphs: usize,
    /// Sorted by canonical form, unique.
    pub cycles: Vec<Cycle>,
}

impl CycleSet {
    pub fn from_result(k: usize, fingerprint: u64, result: &SearchResult) -> Self {
        CycleSet {
            k,
            fingerprint,
            index_size: result.stats.index_size,
            used_index: result.stats.used_index,
            subgraphs: result.stats.subgraphs,
            cycles: result.cycles.clone(),
        }
    }

    pub fn forms(&self) -> Vec<CanonicalCycle> {
        self.cycles.iter().map(|c| c.vertices.clone()).collect()
    }
}

pub fn write_cycles<W: Write>(set: &CycleSet, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")?;
    writeln!(
        w,
        "#k={} fingerprint={:#018x} index={} used={} subgraphs={}",
        set.k, set.fingerprint, set.index_size, set.used_index, set.subgraphs
    )?;
    for c in &set.cycles {
        let branches: Vec<String> = c.branch_positions.iter().map(|p| p.to_string()).collect();
        let kmers: Vec<String> = c
            .vertices
            .vertices()
            .iter()
            .map(|x| x.to_string(set.k))
            .collect();
        writeln!(
            w,
            "{:016x}\t{}\t{}\t{}",
            c.id(),
            c.len(),
            branches.join(","),
            kmers.join(",")
        )?;
    }
    w.flush()
}

pub fn save_cycles(set: &CycleSet, path: &Path) -> Result<(), SearchError> {
    let io_err = |source| SearchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let f = File::create(path).map_err(io_err)?;
    write_cycles(set, BufWriter::new(f)).map_err(io_err)
}

fn header_field<'a>(fields: &'a [(&'a str, &'a str)], key: &str) -> Option<&'a str> {
    fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

pub fn parse_cycles<R: BufRead>(reader: R) -> Result<CycleSet, SearchError> {
    let mut lines = reader.lines().enumerate();
    let mut next_line = || -> Result<Option<(usize, String)>, SearchError> {
        match lines.next() {
            None => Ok(None),
            Some((i, Ok(l))) => Ok(Some((i + 1, l))),
            Some((i, Err(e))) => Err(SearchError::Parse {
                line: i + 1,
                msg: e.to_string(),
            }),
        }
    };
    let perr = |line: usize, msg: &str| SearchError::Parse {
        line,
        msg: msg.to_string(),
    };
    match next_line()? {
        Some((_, l)) if l == HEADER => {}
        _ => return Err(perr(1, "missing cycles header")),
    }
    let (_, meta) = next_line()?.ok_or_else(|| perr(2, "missing metadata line"))?;
    let meta = meta
        .strip_prefix('#')
        .ok_or_else(|| perr(2, "bad metadata line"))?;
    let fields: Vec<(&str, &str)> = meta
        .split_whitespace()
        .filter_map(|f| f.split_once('='))
        .collect();
    let num = |key: &str| -> Result<usize, SearchError> {
        header_field(&fields, key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| perr(2, &format!("missing or bad {key}")))
    };
    let k = num("k")?;
    crate::kmer::validate_k(k).map_err(|e| perr(2, &e.to_string()))?;
    let fingerprint = header_field(&fields, "fingerprint")
        .and_then(|v| u64::from_str_radix(v.trim_start_matches("0x"), 16).ok())
        .ok_or_else(|| perr(2, "missing or bad fingerprint"))?;
    let mut set = CycleSet {
        k,
        fingerprint,
        index_size: num("index")?,
        used_index: num("used")?,
        subgraphs: num("subgraphs")?,
        cycles: Vec::new(),
    };
    while let Some((no, line)) = next_line()? {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(perr(no, "expected 4 tab-separated columns"));
        }
        let vertices = cols[3]
            .split(',')
            .map(|s| CanonicalKmer::from_str(s, k))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| perr(no, &e.to_string()))?;
        let len: usize = cols[1].parse().map_err(|_| perr(no, "bad length"))?;
        if len != vertices.len() {
            return Err(perr(no, "length does not match vertex count"));
        }
        let canon = canonicalize_cycle(&vertices);
        if canon.vertices() != vertices.as_slice() {
            return Err(perr(no, "cycle is not in canonical order"));
        }
        let branch_positions = if cols[2].is_empty() {
            Default::default()
        } else {
            cols[2]
                .split(',')
                .map(|p| p.parse::<usize>().ok().filter(|&p| p < len))
                .collect::<Option<_>>()
                .ok_or_else(|| perr(no, "bad branch positions"))?
        };
        let cycle = Cycle {
            vertices: canon,
            branch_positions,
        };
        if format!("{:016x}", cycle.id()) != cols[0] {
            return Err(perr(no, "cycle id does not match its vertices"));
        }
        if set
            .cycles
            .last()
            .is_some_and(|p: &Cycle| p.vertices >= cycle.vertices)
        {
            return Err(perr(no, "cycles not sorted or duplicated"));
        }
        set.cycles.push(cycle);
    }
    Ok(set)
}

pub fn load_cycles(path: &Path) -> Result<CycleSet, SearchError> {
    let f = File::open(path).map_err(|source| SearchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_cycles(BufReader::new(f))
}

/// Unions shard outputs of the same graph/index into one set.
pub fn merge_cycle_sets(sets: &[CycleSet]) -> Result<CycleSet, SearchError> {
    let first = sets
        .first()
        .ok_or_else(|| SearchError::Mismatch("nothing to merge".into()))?;
    let mut merged: BTreeMap<CanonicalCycle, Cycle> = BTreeMap::new();
    let mut used = 0;
    let mut subgraphs = 0;
    for s in sets {
        if s.k != first.k || s.fingerprint != first.fingerprint || s.index_size != first.index_size
        {
            return Err(SearchError::Mismatch(format!(
                "k/fingerprint/index differ: ({}, {:#x}, {}) vs ({}, {:#x}, {})",
                first.k, first.fingerprint, first.index_size, s.k, s.fingerprint, s.index_size
            )));
        }
        used += s.used_index;
        subgraphs += s.subgraphs;
        for c in &s.cycles {
            merged
                .entry(c.vertices.clone())
                .and_modify(|e| e.absorb(c))
                .or_insert_with(|| c.clone());
        }
    }
    Ok(CycleSet {
        k: first.k,
        fingerprint: first.fingerprint,
        index_size: first.index_size,
        used_index: used,
        subgraphs,
        cycles: merged.into_values().collect(),
    })
}
