//! Bubble decomposition, path coverage and SNP prediction.

mod bubble;
mod coverage;
mod output;

pub use bubble::{decompose, filter_bubbles, mismatches, spell_path, Bubble};
pub use coverage::{
    classify, extract_coverage, predict_snps, Allele, PathCoverage, PathMatrix, SnpCall,
};
pub use output::{save_fasta, save_variants, write_fasta, write_variants};

use crate::graph::ColoredGraph;
use crate::search::Cycle;

/// Default maximum label mismatches.
pub const DEFAULT_MAX_MISMATCHES: usize = 15;
/// Default minimum interior coverage for a color to support a path.
pub const DEFAULT_CMIN: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum VariantError {
    #[error("empty path")]
    EmptyPath,
    #[error("vertex {0} is not in the graph")]
    MissingVertex(String),
    #[error("cycle of length {length} is not a k={k} bubble")]
    NotABubble { length: usize, k: usize },
    #[error("orientation inconsistency: {0}")]
    Orientation(String),
    #[error("unresolved bubble: {0}")]
    Inconsistent(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallStats {
    /// Input cycles.
    pub cycles: usize,
    /// Cycles that decomposed into a bubble.
    pub bubbles: usize,
    /// Cycles that could not be split into two consistent equal paths.
    pub indel_or_unresolved: usize,
    /// Bubbles kept by the mismatch filter.
    pub filtered: usize,
    /// Filtered bubbles with a predicted call.
    pub predicted_bubbles: usize,
    /// Predicted calls (one per mismatching position).
    pub predicted_snps: usize,
}

#[derive(Debug, Clone)]
pub struct CallOutput {
    /// Filtered bubbles, sorted by id.
    pub bubbles: Vec<Bubble>,
    /// Calls for all filtered bubbles, sorted by `(bubble_id, offset)`.
    pub calls: Vec<SnpCall>,
    pub stats: CallStats,
}

/// Runs decomposition, filtering and prediction over a cycle set.
/// Orientation errors and missing vertices abort; unresolvable cycles are
/// counted and skipped.
pub fn call_variants(
    cycles: &[Cycle],
    graph: &ColoredGraph,
    f: usize,
    c_min: u32,
) -> Result<CallOutput, VariantError> {
    let mut stats = CallStats {
        cycles: cycles.len(),
        ..CallStats::default()
    };
    let mut bubbles = Vec::new();
    for c in cycles {
        match decompose(c, graph) {
            Ok(b) => bubbles.push(b),
            Err(VariantError::Inconsistent(_) | VariantError::NotABubble { .. }) => {
                stats.indel_or_unresolved += 1
            }
            Err(e) => return Err(e),
        }
    }
    stats.bubbles = bubbles.len();
    let mut bubbles = filter_bubbles(bubbles, f);
    bubbles.sort_by_key(|b| b.id);
    stats.filtered = bubbles.len();
    let mut calls = Vec::new();
    for b in &bubbles {
        let cov = extract_coverage(b, graph)?;
        let mut bc = predict_snps(b, &cov, c_min);
        if bc.iter().any(|c| c.predicted) {
            stats.predicted_bubbles += 1;
        }
        stats.predicted_snps += bc.iter().filter(|c| c.predicted).count();
        calls.append(&mut bc);
    }
    calls.sort_by_key(|c| (c.bubble_id, c.offset));
    Ok(CallOutput {
        bubbles,
        calls,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::index::{build_index, IndexShard};
    use crate::kmer::Kmer;
    use crate::search::{parallel_search, SearchParams};
    use crate::testkit::{synth_genomes, SynthConfig};

    fn bubble(a: &str, b: &str) -> Bubble {
        Bubble {
            id: 7,
            k: 3,
            n: 0,
            path_a: Vec::new(),
            path_b: Vec::new(),
            label_a: a.into(),
            label_b: b.into(),
        }
    }

    #[test]
    fn spell_overlaps() {
        let path: Vec<Kmer> = ["ACG", "CGT", "GTA"]
            .iter()
            .map(|s| Kmer::from_bytes(s.as_bytes()).unwrap())
            .collect();
        assert_eq!(spell_path(&path, 3).unwrap(), "ACGTA");
        let broken = [path[0], path[2]];
        assert!(matches!(
            spell_path(&broken, 3),
            Err(VariantError::Orientation(_))
        ));
        assert!(spell_path(&[], 3).is_err());
    }

    #[test]
    fn mismatch_counts_and_filter() {
        assert_eq!(mismatches(&bubble("AAACAAA", "AAACAAA")), 0);
        assert_eq!(mismatches(&bubble("AAACAAA", "AAAGAAA")), 1);
        let many = bubble(
            &"A".repeat(40),
            &format!("{}{}", "C".repeat(16), "A".repeat(24)),
        );
        let kept = filter_bubbles(
            vec![bubble("AAACAAA", "AAAGAAA"), bubble("AAA", "AAA"), many],
            15,
        );
        assert_eq!(kept.len(), 1);
        assert!(filter_bubbles(vec![bubble("AAACAAA", "AAAGAAA")], 0).is_empty());
    }

    #[test]
    fn fasta_layout() {
        let mut buf = Vec::new();
        write_fasta(&[], &mut buf).unwrap();
        assert!(buf.is_empty());
        let long = "ACGT".repeat(20);
        let mut other = long.clone();
        other.replace_range(30..31, "A");
        write_fasta(&[bubble(&long, &other)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], ">0000000000000007_A");
        assert_eq!(lines[1].len(), 60);
        assert_eq!(lines[2].len(), 20);
        assert_eq!(lines[3], ">0000000000000007_B");
        assert_eq!(lines.len(), 6);
    }

    #[test]
    fn variants_tsv_schema() {
        let colors: Vec<String> = vec!["x".into(), "y".into(), "z".into()];
        let mut buf = Vec::new();
        write_variants(&[], &colors, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bubble_id\toffset\tallele_a\tallele_b\tpredicted\tx\ty\tz\n"
        );
        let call = |id, offset| SnpCall {
            bubble_id: id,
            offset,
            allele_a: b'A',
            allele_b: b'G',
            classes: vec![Allele::A, Allele::B, Allele::Absent],
            predicted: true,
        };
        let mut buf = Vec::new();
        write_variants(&[call(2, 5), call(1, 9), call(1, 3)], &colors, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<Vec<&str>> = text
            .lines()
            .skip(1)
            .map(|l| l.split('\t').collect())
            .collect();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.len() == 5 + 3));
        assert_eq!((rows[0][1], rows[1][1], rows[2][1]), ("3", "9", "5"));
        assert_eq!(rows[0][5..], ["A", "B", "absent"]);
    }

    fn planted(colors: usize, seed: u64) -> (crate::graph::ColoredGraph, Vec<Bubble>) {
        let mut cfg = SynthConfig::new(seed, 3000, colors, 4, 15);
        cfg.depth = 8;
        let g = synth_genomes(&cfg).unwrap().build_graph();
        let idx = build_index(&g, 1);
        let res = parallel_search(&g, &IndexShard::whole(&idx), &SearchParams::new(15)).unwrap();
        let bubbles = res
            .cycles
            .iter()
            .map(|c| decompose(c, &g).unwrap())
            .collect();
        (g, bubbles)
    }

    #[test]
    fn coverage_shape_and_support() {
        let (g, bubbles) = planted(2, 4);
        assert_eq!(bubbles.len(), 4);
        for b in &bubbles {
            let cov = extract_coverage(b, &g).unwrap();
            assert_eq!(cov.num_colors(), 2);
            assert!(cov.a.rows.iter().all(|r| r.len() == 15 + 2));
            let classes = classify(&cov, 1);
            // one color per path, the reference color 0 never carries alt
            assert!(classes.contains(&Allele::A) && classes.contains(&Allele::B));
            let a_color = classes.iter().position(|c| *c == Allele::A).unwrap();
            assert!(cov.a.interior_min(a_color) >= 1);
            assert_eq!(cov.b.interior_min(a_color), 0);
            assert!(cov.a.interior_median(a_color) >= 1.0);
        }
    }

    #[test]
    fn single_color_matrix_has_one_row() {
        let mut b = GraphBuilder::new(3, vec!["only".into()]).unwrap();
        b.add_sequence(0, b"AAGCATTG");
        b.add_sequence(0, b"AAGCTTTG");
        let g = b.finish();
        let bubble = Bubble {
            id: 0,
            k: 3,
            n: 0,
            path_a: vec![crate::kmer::CanonicalKmer::from_str("AAG", 3).unwrap(); 3],
            path_b: vec![crate::kmer::CanonicalKmer::from_str("AAG", 3).unwrap(); 3],
            label_a: "AAGCA".into(),
            label_b: "AAGCA".into(),
        };
        let cov = extract_coverage(&bubble, &g).unwrap();
        assert_eq!(cov.a.rows.len(), 1);
        let missing = Bubble {
            path_a: vec![crate::kmer::CanonicalKmer::from_str("CCC", 3).unwrap()],
            ..bubble
        };
        assert!(matches!(
            extract_coverage(&missing, &g),
            Err(VariantError::MissingVertex(_))
        ));
    }

    fn cov(a: Vec<Vec<u32>>, b: Vec<Vec<u32>>) -> PathCoverage {
        PathCoverage {
            a: PathMatrix { rows: a },
            b: PathMatrix { rows: b },
        }
    }

    #[test]
    fn prediction_rule() {
        let b = bubble("AAACAAA", "AAAGAAA");
        // color 0 on A, color 1 on B
        let split = cov(
            vec![vec![9, 5, 5, 9], vec![9, 0, 0, 9]],
            vec![vec![9, 0, 0, 9], vec![9, 4, 6, 9]],
        );
        let calls = predict_snps(&b, &split, 1);
        assert_eq!(calls.len(), 1);
        assert!(calls[0].predicted);
        assert_eq!(calls[0].classes, [Allele::A, Allele::B]);
        assert_eq!(
            (calls[0].offset, calls[0].allele_a, calls[0].allele_b),
            (3, b'C', b'G')
        );
        // both colors on both paths
        let both = cov(
            vec![vec![1, 3, 3, 1], vec![1, 3, 3, 1]],
            vec![vec![1, 2, 2, 1], vec![1, 2, 2, 1]],
        );
        assert!(!predict_snps(&b, &both, 1)[0].predicted);
        // nobody supports B
        let one_sided = cov(
            vec![vec![1, 3, 3, 1], vec![1, 3, 3, 1]],
            vec![vec![1, 0, 2, 1], vec![1, 2, 0, 1]],
        );
        let c = &predict_snps(&b, &one_sided, 1)[0];
        assert!(!c.predicted);
        assert_eq!(c.classes, [Allele::A, Allele::A]);
        // c_min raises the bar
        assert!(!predict_snps(&b, &split, 5)[0].predicted);
    }

    #[test]
    fn relabeling_and_scaling_invariance() {
        let b = bubble("AAACAAA", "AAAGAAA");
        let rows_a = vec![vec![3, 2, 1, 3], vec![3, 0, 0, 3], vec![2, 4, 4, 2]];
        let rows_b = vec![vec![3, 0, 1, 3], vec![3, 5, 7, 3], vec![2, 1, 1, 2]];
        let base = predict_snps(&b, &cov(rows_a.clone(), rows_b.clone()), 1);
        let perm = [2, 0, 1];
        let pa = perm.iter().map(|&i| rows_a[i].clone()).collect();
        let pb = perm.iter().map(|&i| rows_b[i].clone()).collect();
        let permuted = predict_snps(&b, &cov(pa, pb), 1);
        assert_eq!(base[0].predicted, permuted[0].predicted);
        let expect: Vec<Allele> = perm.iter().map(|&i| base[0].classes[i]).collect();
        assert_eq!(permuted[0].classes, expect);
        for factor in [1, 2, 7] {
            let mut sa = rows_a.clone();
            let mut sb = rows_b.clone();
            for x in sa[1].iter_mut().chain(sb[1].iter_mut()) {
                *x *= factor;
            }
            assert_eq!(
                predict_snps(&b, &cov(sa, sb), 1)[0].predicted,
                base[0].predicted
            );
        }
    }

    #[test]
    fn call_variants_counts() {
        let (g, bubbles) = planted(3, 9);
        assert_eq!(bubbles.len(), 4);
        let idx = build_index(&g, 1);
        let res = parallel_search(&g, &IndexShard::whole(&idx), &SearchParams::new(15)).unwrap();
        let out = call_variants(&res.cycles, &g, 15, 1).unwrap();
        assert_eq!(out.stats.cycles, 4);
        assert_eq!(out.stats.bubbles, 4);
        assert_eq!(out.stats.filtered, 4);
        assert_eq!(out.stats.predicted_bubbles, 4);
        assert_eq!(out.stats.predicted_snps, 4);
        assert!(out.bubbles.windows(2).all(|w| w[0].id < w[1].id));
    }
}
