//! Ground-truth generators, brute-force oracles and call scoring.

mod oracle;
mod score;
mod synth;

pub use oracle::{brute_force_cycles, random_connected_subgraph, ORACLE_MAX_VERTICES};
pub use score::{score_calls, Score};
pub use synth::{
    synth_genomes, truth_tsv, write_synth, Assignment, PlantMode, PlantedTruth, PlantedVariant,
    SynthConfig, SynthData, SynthFiles,
};

#[derive(Debug, thiserror::Error)]
pub enum TestkitError {
    #[error("invalid generator configuration: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("oracle limited to {max} vertices, subgraph has {actual}")]
    TooLarge { max: usize, actual: usize },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}
