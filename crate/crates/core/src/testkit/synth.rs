//! Seeded genome/read simulator with planted substitutions.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TestkitError;
use crate::graph::{ColoredGraph, GraphBuilder};
use crate::kmer::{complement_base, validate_k, CanonicalKmer, KmerWindows};

/// How variant positions are laid out along the genome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantMode {
    /// At least `2k+1` bases between consecutive variants, so every variant
    /// sits in its own bubble flanked by unique shared k-mers.
    Isolated,
    /// Pairs of variants `gap` bases apart (`gap < k`), pairs isolated from
    /// each other; exercises `n >= 1` cycles.
    Clustered { gap: usize },
    /// Distinct uniformly random positions, no spacing guarantee.
    Random,
}

/// Which colors carry the alternate allele.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    /// Color 0 keeps the reference; every variant is carried by a random
    /// non-empty subset of the other colors (color 1 alone when C = 2).
    Split,
    /// Every color gets `n_snps` variants of its own.
    Private,
    /// All colors identical to the base genome; variants are ignored.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub length: usize,
    pub colors: usize,
    pub n_snps: usize,
    pub k: usize,
    pub mode: PlantMode,
    pub assignment: Assignment,
    pub read_len: usize,
    pub depth: usize,
    pub error_rate: f64,
}

impl SynthConfig {
    pub fn new(seed: u64, length: usize, colors: usize, n_snps: usize, k: usize) -> Self {
        SynthConfig {
            seed,
            length,
            colors,
            n_snps,
            k,
            mode: PlantMode::Isolated,
            assignment: Assignment::Split,
            read_len: 100,
            depth: 30,
            error_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedVariant {
    pub position: usize,
    pub ref_base: u8,
    pub alt_base: u8,
    /// Colors carrying `alt_base`, ascending.
    pub carriers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTruth {
    pub genome: Vec<u8>,
    pub colors: usize,
    /// Sorted by position.
    pub variants: Vec<PlantedVariant>,
    pub k: usize,
    pub read_len: usize,
    pub depth: usize,
    pub error_rate: f64,
    pub seed: u64,
}

impl PlantedTruth {
    pub fn color_genome(&self, color: usize) -> Vec<u8> {
        let mut g = self.genome.clone();
        for v in &self.variants {
            if v.carriers.binary_search(&color).is_ok() {
                g[v.position] = v.alt_base;
            }
        }
        g
    }

    pub fn variant_at(&self, position: usize) -> Option<&PlantedVariant> {
        self.variants
            .binary_search_by_key(&position, |v| v.position)
            .ok()
            .map(|i| &self.variants[i])
    }

    /// Variants that differ between at least two colors.
    pub fn polymorphic(&self) -> impl Iterator<Item = &PlantedVariant> {
        self.variants
            .iter()
            .filter(move |v| !v.carriers.is_empty() && v.carriers.len() < self.colors)
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub truth: PlantedTruth,
    /// Reads per color, as base strings.
    pub reads: Vec<Vec<Vec<u8>>>,
}

impl SynthData {
    pub fn color_names(&self) -> Vec<String> {
        (0..self.truth.colors)
            .map(|c| format!("sample_{c}"))
            .collect()
    }

    /// Builds the colored graph directly from the simulated reads.
    pub fn build_graph(&self) -> ColoredGraph {
        let mut b = GraphBuilder::new(self.truth.k, self.color_names()).expect("validated config");
        for (c, reads) in self.reads.iter().enumerate() {
            for r in reads {
                b.add_sequence(c, r);
            }
        }
        b.finish()
    }
}

const MAX_ATTEMPTS: usize = 200;

/// Generates a base genome, plants variants and tiles reads over every
/// color genome. Deterministic for a fixed configuration.
pub fn synth_genomes(cfg: &SynthConfig) -> Result<SynthData, TestkitError> {
    validate_k(cfg.k).map_err(|e| TestkitError::Config(e.to_string()))?;
    if cfg.colors == 0 {
        return Err(TestkitError::Config("need at least one color".into()));
    }
    if cfg.length < 20 * cfg.k {
        return Err(TestkitError::Config(format!(
            "genome length {} is below 20k = {}",
            cfg.length,
            20 * cfg.k
        )));
    }
    if cfg.read_len < cfg.k || cfg.depth == 0 {
        return Err(TestkitError::Config(
            "read length must be >= k and depth >= 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.error_rate) {
        return Err(TestkitError::Config("error rate must be in [0, 1]".into()));
    }
    if let PlantMode::Clustered { gap } = cfg.mode {
        if gap == 0 || gap >= cfg.k {
            return Err(TestkitError::Config(format!(
                "cluster gap must be in [1, k), got {gap}"
            )));
        }
        if !cfg.n_snps.is_multiple_of(2) {
            return Err(TestkitError::Config(
                "clustered mode plants pairs: n_snps must be even".into(),
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..MAX_ATTEMPTS {
        let Some(genome) = self_avoiding_genome(&mut rng, cfg.length, cfg.k) else {
            continue;
        };
        for _ in 0..MAX_ATTEMPTS / 10 {
            let Some(variants) = plant(&mut rng, cfg, &genome) else {
                break;
            };
            let truth = PlantedTruth {
                genome: genome.clone(),
                colors: cfg.colors,
                variants,
                k: cfg.k,
                read_len: cfg.read_len,
                depth: cfg.depth,
                error_rate: cfg.error_rate,
                seed: cfg.seed,
            };
            if cfg.mode != PlantMode::Random && !positions_unique(&truth) {
                continue;
            }
            let reads = (0..cfg.colors)
                .map(|c| tile_reads(&mut rng, &truth.color_genome(c), cfg))
                .collect();
            return Ok(SynthData { truth, reads });
        }
    }
    Err(TestkitError::Infeasible(format!(
        "could not place {} variants with unique k-mer context (length {}, k {})",
        cfg.n_snps, cfg.length, cfg.k
    )))
}

/// Random genome whose canonical k-mers are all distinct; `None` on a dead
/// end.
fn self_avoiding_genome(rng: &mut ChaCha8Rng, length: usize, k: usize) -> Option<Vec<u8>> {
    let mut seq: Vec<u8> = (0..k).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect();
    let mut used: HashSet<CanonicalKmer> = HashSet::with_capacity(length);
    used.insert(crate::kmer::Kmer::from_bytes(&seq).ok()?.canonical(k));
    while seq.len() < length {
        let mut bases = *b"ACGT";
        bases.shuffle(rng);
        let tail = &seq[seq.len() - (k - 1)..];
        let mut placed = false;
        for b in bases {
            let mut window = tail.to_vec();
            window.push(b);
            let c = crate::kmer::Kmer::from_bytes(&window).ok()?.canonical(k);
            if used.insert(c) {
                seq.push(b);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    Some(seq)
}

fn alt_for(rng: &mut ChaCha8Rng, r: u8) -> u8 {
    let choices: Vec<u8> = b"ACGT".iter().copied().filter(|&b| b != r).collect();
    choices[rng.gen_range(0..3)]
}

fn carriers_for(rng: &mut ChaCha8Rng, colors: usize) -> Vec<usize> {
    if colors <= 2 {
        return vec![colors - 1];
    }
    loop {
        let set: Vec<usize> = (1..colors).filter(|_| rng.gen_bool(0.5)).collect();
        if !set.is_empty() {
            return set;
        }
    }
}

fn plant(rng: &mut ChaCha8Rng, cfg: &SynthConfig, genome: &[u8]) -> Option<Vec<PlantedVariant>> {
    let k = cfg.k;
    let total = match cfg.assignment {
        Assignment::None => 0,
        Assignment::Split => cfg.n_snps,
        Assignment::Private => cfg.n_snps * cfg.colors,
    };
    if total == 0 {
        return Some(Vec::new());
    }
    // clusters: (start, span), each holding one or two variants
    let (clusters, span) = match cfg.mode {
        PlantMode::Clustered { gap } => (total / 2, gap),
        _ => (total, 0),
    };
    let lo = 2 * k;
    let hi = cfg.length.checked_sub(2 * k + span)?;
    let spacing = match cfg.mode {
        PlantMode::Random => 1,
        _ => 2 * k + 1 + span,
    };
    if hi <= lo || (hi - lo) < (clusters - 1) * spacing + 1 {
        return None;
    }
    // choose sorted starts with minimum spacing: draw from the compressed
    // range and re-expand
    let free = hi - lo - (clusters - 1) * spacing;
    let mut draws: Vec<usize> =
        rand::seq::index::sample(rng, free + clusters - 1, clusters).into_vec();
    draws.sort_unstable();
    let starts: Vec<usize> = draws
        .iter()
        .enumerate()
        .map(|(i, &d)| lo + d - i + i * spacing)
        .collect();
    let mut positions = Vec::with_capacity(total);
    for s in starts {
        positions.push(s);
        if span > 0 {
            positions.push(s + span);
        }
    }
    let carriers: Vec<Vec<usize>> = match cfg.assignment {
        Assignment::Split => {
            let mut out = Vec::with_capacity(positions.len());
            for i in 0..positions.len() {
                // both members of a pair share carriers
                if span > 0 && i % 2 == 1 {
                    let prev: Vec<usize> = out.last().cloned().unwrap_or_default();
                    out.push(prev);
                } else {
                    out.push(carriers_for(rng, cfg.colors));
                }
            }
            out
        }
        Assignment::Private => {
            let mut owners: Vec<usize> = (0..cfg.colors)
                .flat_map(|c| std::iter::repeat_n(c, cfg.n_snps))
                .collect();
            if span > 0 {
                // keep pairs on one owner
                let mut pair_owners: Vec<usize> = owners.iter().copied().step_by(2).collect();
                pair_owners.shuffle(rng);
                owners = pair_owners.into_iter().flat_map(|o| [o, o]).collect();
            } else {
                owners.shuffle(rng);
            }
            owners.into_iter().map(|o| vec![o]).collect()
        }
        Assignment::None => unreachable!(),
    };
    let mut variants: Vec<PlantedVariant> = positions
        .into_iter()
        .zip(carriers)
        .map(|(position, carriers)| {
            let ref_base = genome[position];
            PlantedVariant {
                position,
                ref_base,
                alt_base: alt_for(rng, ref_base),
                carriers,
            }
        })
        .collect();
    variants.sort_by_key(|v| v.position);
    Some(variants)
}

/// Every canonical k-mer of every color genome occurs at a single window
/// position (shared between colors only at the same coordinate).
fn positions_unique(truth: &PlantedTruth) -> bool {
    let k = truth.k;
    let mut at: HashMap<CanonicalKmer, usize> = HashMap::new();
    for c in 0..truth.colors {
        let g = truth.color_genome(c);
        for (i, w) in KmerWindows::new(&g, k).enumerate() {
            match at.insert(w.canonical(), i) {
                Some(prev) if prev != i => return false,
                _ => {}
            }
        }
    }
    true
}

fn revcomp(seq: &[u8]) -> Vec<u8> {
    seq.iter().rev().map(|&b| complement_base(b)).collect()
}

/// Uniform tiling: read starts every `read_len / depth` bases (never more
/// than `read_len - k + 1`, so consecutive reads share a k-mer), plus one
/// read flush with the genome end. Odd reads are reverse complemented.
fn tile_reads(rng: &mut ChaCha8Rng, genome: &[u8], cfg: &SynthConfig) -> Vec<Vec<u8>> {
    let len = cfg.read_len.min(genome.len());
    let step = (len / cfg.depth).clamp(1, len - cfg.k + 1);
    let mut starts: Vec<usize> = (0..=genome.len() - len).step_by(step).collect();
    if *starts.last().expect("at least one start") != genome.len() - len {
        starts.push(genome.len() - len);
    }
    starts
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut read = genome[s..s + len].to_vec();
            if cfg.error_rate > 0.0 {
                for b in read.iter_mut() {
                    if rng.gen_bool(cfg.error_rate) {
                        *b = alt_for(rng, *b);
                    }
                }
            }
            if i % 2 == 1 {
                revcomp(&read)
            } else {
                read
            }
        })
        .collect()
}

/// Files written by [`write_synth`].
#[derive(Debug, Clone)]
pub struct SynthFiles {
    pub manifest: PathBuf,
    pub truth: PathBuf,
    pub reads: Vec<PathBuf>,
}

/// Writes one FASTA per color, a manifest and a truth TSV into `dir`.
pub fn write_synth(data: &SynthData, dir: &Path) -> Result<SynthFiles, TestkitError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| TestkitError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let names = data.color_names();
    let mut reads = Vec::new();
    for (c, color_reads) in data.reads.iter().enumerate() {
        let path = dir.join(format!("{}.fa", names[c]));
        let mut w = BufWriter::new(File::create(&path).map_err(io(&path))?);
        for (i, r) in color_reads.iter().enumerate() {
            writeln!(w, ">{}_r{}", names[c], i).map_err(io(&path))?;
            w.write_all(r).map_err(io(&path))?;
            writeln!(w).map_err(io(&path))?;
        }
        w.flush().map_err(io(&path))?;
        reads.push(path);
    }
    let manifest = dir.join("manifest.tsv");
    let mut m = String::new();
    for (name, path) in names.iter().zip(&reads) {
        let file = path.file_name().expect("file name").to_string_lossy();
        m.push_str(&format!("{name}\t{file}\n"));
    }
    std::fs::write(&manifest, m).map_err(io(&manifest))?;
    let truth = dir.join("truth.tsv");
    std::fs::write(&truth, truth_tsv(&data.truth)).map_err(io(&truth))?;
    Ok(SynthFiles {
        manifest,
        truth,
        reads,
    })
}

pub fn truth_tsv(truth: &PlantedTruth) -> String {
    let mut out = String::from("position\tref\talt\tcolors\n");
    for v in &truth.variants {
        let colors: Vec<String> = v.carriers.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            v.position,
            v.ref_base as char,
            v.alt_base as char,
            colors.join(",")
        ));
    }
    out
}
