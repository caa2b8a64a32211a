//! Side-by-side measurement of traditional and trim Merkle trees.
//!
//! Timing columns are wall-clock medians and vary between runs. Structural
//! columns (hash invocations, stored nodes and bytes, proof depth) depend only
//! on the configuration and seed. Hash invocations stand in for energy use.

mod compare;
mod harness;
mod report;

pub use compare::{compare_variants, ComparisonRow, ComparisonTable};
pub use harness::{
    generate_payloads, proof_sample_indices, run_benchmark, BenchConfig, BenchReport, BenchSample,
    PAYLOAD_GENERATOR, PROOF_SAMPLE_CAP,
};
pub use report::{emit_report, ReportFormat};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),
    #[error("InvalidRange: need 1 <= from <= to, got from={from} to={to}")]
    InvalidRange { from: usize, to: usize },
    #[error(transparent)]
    Tree(#[from] trimtree_core::Error),
    #[error("proof for leaf {index} of {variant} tree with n={n} failed to verify")]
    VerificationFailed {
        variant: trimtree_core::TreeVariant,
        n: usize,
        index: usize,
    },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}
