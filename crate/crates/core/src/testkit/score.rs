//! Matching predicted calls back to planted coordinates.

use std::collections::{HashMap, HashSet};

use super::synth::PlantedTruth;
use crate::kmer::{complement_base, CanonicalKmer, Kmer, KmerWindows};
use crate::variant::{Bubble, SnpCall};

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    /// Polymorphic planted variants.
    pub planted: usize,
    /// Predicted calls.
    pub predicted: usize,
    /// Predicted calls whose position and allele pair agree with truth.
    pub matched_calls: usize,
    /// Distinct planted variants hit by at least one matched call.
    pub matched_variants: usize,
    pub recall: f64,
    /// 1.0 when nothing was predicted, see `zero_predicted`.
    pub precision: f64,
    pub zero_predicted: bool,
}

/// Scores predicted calls against planted truth. A call is located through
/// the first k-mer of its bubble's label, whose position and strand are
/// looked up in the color genomes.
pub fn score_calls(calls: &[SnpCall], bubbles: &[Bubble], truth: &PlantedTruth) -> Score {
    let k = truth.k;
    let mut at: HashMap<CanonicalKmer, (usize, Kmer)> = HashMap::new();
    for c in 0..truth.colors {
        let g = truth.color_genome(c);
        for (i, w) in KmerWindows::new(&g, k).enumerate() {
            at.entry(w.canonical()).or_insert((i, w.forward));
        }
    }
    let by_id: HashMap<u64, &Bubble> = bubbles.iter().map(|b| (b.id, b)).collect();
    let planted = truth.polymorphic().count();
    let mut predicted = 0;
    let mut matched_calls = 0;
    let mut hit: HashSet<usize> = HashSet::new();
    for call in calls.iter().filter(|c| c.predicted) {
        predicted += 1;
        let Some(b) = by_id.get(&call.bubble_id) else {
            continue;
        };
        let Ok(s) = Kmer::from_bytes(&b.label_a.as_bytes()[..k]) else {
            continue;
        };
        let Some(&(pos, fwd)) = at.get(&s.canonical(k)) else {
            continue;
        };
        let (position, a, bb) = if fwd == s {
            (pos + call.offset, call.allele_a, call.allele_b)
        } else {
            let Some(p) = (pos + k - 1).checked_sub(call.offset) else {
                continue;
            };
            (
                p,
                complement_base(call.allele_a),
                complement_base(call.allele_b),
            )
        };
        let Some(v) = truth.variant_at(position) else {
            continue;
        };
        let pair_ok = (a, bb) == (v.ref_base, v.alt_base) || (a, bb) == (v.alt_base, v.ref_base);
        if pair_ok {
            matched_calls += 1;
            hit.insert(position);
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            1.0
        } else {
            num as f64 / den as f64
        }
    };
    Score {
        planted,
        predicted,
        matched_calls,
        matched_variants: hit.len(),
        recall: if planted == 0 {
            1.0
        } else {
            hit.len() as f64 / planted as f64
        },
        precision: ratio(matched_calls, predicted),
        zero_predicted: predicted == 0,
    }
}
