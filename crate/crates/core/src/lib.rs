//! Reference-free SNP discovery over colored de Bruijn graphs.
//!
//! The pipeline builds one k-mer hash table for all samples, indexes its
//! branching vertices, grows bounded neighborhoods around them, enumerates
//! `2(k+n)+2` bubble cycles in parallel and predicts SNPs from per-color path
//! coverage.

pub mod graph;
pub mod index;
pub mod kmer;
pub mod reads;
pub mod search;
pub mod testkit;
pub mod variant;
