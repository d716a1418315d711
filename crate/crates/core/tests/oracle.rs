use std::collections::BTreeSet;
use std::time::Instant;

use picyc_core::index::build_index;
use picyc_core::search::{
    graph_neighborhood, search_cycles, search_cycles_with_lengths, LengthSet, SearchParams,
};
use picyc_core::testkit::{
    brute_force_cycles, random_connected_subgraph, synth_genomes, PlantMode, SynthConfig,
};

const K: usize = 5;

fn lengths() -> Vec<usize> {
    (0..=3).map(|n| 2 * (K + n) + 2).collect()
}

#[test]
fn random_subgraphs_match_brute_force() {
    let started = Instant::now();
    let allowed = lengths();
    let set = LengthSet::new(allowed.clone());
    let mut nonempty = 0;
    for seed in 0..100u64 {
        let ring = 10 + (seed as usize % 10);
        let vertices = 20 + (seed as usize * 7) % 41;
        let chords = (seed as usize) % 5;
        let sub = random_connected_subgraph(seed, vertices, ring, chords, K);
        assert!(sub.len() <= 60);
        for &v in sub.vertices() {
            let fast: BTreeSet<_> = search_cycles_with_lengths(&sub, v, &set)
                .into_iter()
                .map(|c| c.vertices.into_vec())
                .collect();
            let slow = brute_force_cycles(&sub, v, &allowed, true).unwrap();
            assert_eq!(fast, slow, "seed {seed} start {}", v.to_string(K));
            if !fast.is_empty() {
                nonempty += 1;
            }
        }
    }
    assert!(nonempty > 100, "too few starts with cycles: {nonempty}");
    assert!(started.elapsed().as_secs() < 60);
}

#[test]
fn no_matching_length_is_empty() {
    let sub = random_connected_subgraph(7, 30, 12, 3, K);
    let set = LengthSet::new([40]);
    for &v in sub.vertices() {
        assert!(search_cycles_with_lengths(&sub, v, &set).is_empty());
        assert!(brute_force_cycles(&sub, v, &[40], true).unwrap().is_empty());
    }
}

#[test]
fn planted_snp_subgraphs_match_brute_force() {
    let allowed = lengths();
    let params = SearchParams::new(K).with_n_range(0, 3).with_vmax(60);
    let mut checked = 0;
    for (seed, mode) in [
        (1, PlantMode::Isolated),
        (2, PlantMode::Clustered { gap: 2 }),
        (3, PlantMode::Isolated),
    ] {
        let mut cfg = SynthConfig::new(seed, 160, 2, 2, K);
        cfg.mode = mode;
        cfg.read_len = 30;
        cfg.depth = 6;
        let data = synth_genomes(&cfg).unwrap();
        let g = data.build_graph();
        let idx = build_index(&g, 1);
        assert!(!idx.is_empty());
        for &seed_kmer in &idx.entries {
            let sub = graph_neighborhood(&g, seed_kmer, 60).unwrap();
            for &v in sub.vertices() {
                let fast: BTreeSet<_> = search_cycles(&sub, v, &params)
                    .into_iter()
                    .map(|c| c.vertices.into_vec())
                    .collect();
                assert_eq!(fast, brute_force_cycles(&sub, v, &allowed, true).unwrap());
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}
