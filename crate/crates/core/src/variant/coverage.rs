//! Per-color path coverage and the support-set SNP rule.

use std::fmt;

use crate::graph::ColoredGraph;

use super::bubble::Bubble;
use super::VariantError;

/// Coverage of one path: `rows[color][vertex]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathMatrix {
    pub rows: Vec<Vec<u32>>,
}

impl PathMatrix {
    fn interior(&self, color: usize) -> &[u32] {
        let row = &self.rows[color];
        &row[1..row.len() - 1]
    }

    /// Minimum over interior vertices (`s` and `t` excluded).
    pub fn interior_min(&self, color: usize) -> u32 {
        self.interior(color).iter().copied().min().unwrap_or(0)
    }

    pub fn interior_median(&self, color: usize) -> f64 {
        let mut v = self.interior(color).to_vec();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_unstable();
        let m = v.len() / 2;
        if v.len() % 2 == 1 {
            v[m] as f64
        } else {
            (v[m - 1] as f64 + v[m] as f64) / 2.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCoverage {
    pub a: PathMatrix,
    pub b: PathMatrix,
}

impl PathCoverage {
    pub fn num_colors(&self) -> usize {
        self.a.rows.len()
    }
}

/// Reads the coverage vector of every path vertex from the graph.
pub fn extract_coverage(
    bubble: &Bubble,
    graph: &ColoredGraph,
) -> Result<PathCoverage, VariantError> {
    let matrix = |path: &[crate::kmer::CanonicalKmer]| -> Result<PathMatrix, VariantError> {
        let mut rows = vec![Vec::with_capacity(path.len()); graph.num_colors()];
        for &v in path {
            let cov = graph
                .coverage(v)
                .ok_or_else(|| VariantError::MissingVertex(v.to_string(graph.k())))?;
            for (row, &c) in rows.iter_mut().zip(cov) {
                row.push(c);
            }
        }
        Ok(PathMatrix { rows })
    };
    Ok(PathCoverage {
        a: matrix(&bubble.path_a)?,
        b: matrix(&bubble.path_b)?,
    })
}

/// Which path(s) a color supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Allele {
    A,
    B,
    Both,
    Absent,
}

impl fmt::Display for Allele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Allele::A => "A",
            Allele::B => "B",
            Allele::Both => "both",
            Allele::Absent => "absent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnpCall {
    pub bubble_id: u64,
    pub offset: usize,
    pub allele_a: u8,
    pub allele_b: u8,
    /// One entry per color.
    pub classes: Vec<Allele>,
    pub predicted: bool,
}

/// Per-color classification: a color supports a path when every interior
/// vertex has coverage at least `c_min`.
pub fn classify(coverage: &PathCoverage, c_min: u32) -> Vec<Allele> {
    (0..coverage.num_colors())
        .map(|c| {
            let a = coverage.a.interior_min(c) >= c_min;
            let b = coverage.b.interior_min(c) >= c_min;
            match (a, b) {
                (true, true) => Allele::Both,
                (true, false) => Allele::A,
                (false, true) => Allele::B,
                (false, false) => Allele::Absent,
            }
        })
        .collect()
}

/// One call per mismatching label offset. A call is predicted when both
/// paths have a supporting color and the two supporting sets differ.
pub fn predict_snps(bubble: &Bubble, coverage: &PathCoverage, c_min: u32) -> Vec<SnpCall> {
    let classes = classify(coverage, c_min);
    let supports_a: Vec<bool> = classes
        .iter()
        .map(|c| matches!(c, Allele::A | Allele::Both))
        .collect();
    let supports_b: Vec<bool> = classes
        .iter()
        .map(|c| matches!(c, Allele::B | Allele::Both))
        .collect();
    let predicted =
        supports_a.contains(&true) && supports_b.contains(&true) && supports_a != supports_b;
    let (la, lb) = (bubble.label_a.as_bytes(), bubble.label_b.as_bytes());
    bubble
        .mismatch_offsets()
        .into_iter()
        .map(|offset| SnpCall {
            bubble_id: bubble.id,
            offset,
            allele_a: la[offset],
            allele_b: lb[offset],
            classes: classes.clone(),
            predicted,
        })
        .collect()
}
