//! Merkle trees with and without last-node duplication.
//!
//! Two constructions share one arena representation:
//!
//! * **Traditional**: an odd level pairs its last node with itself, as in
//!   Bitcoin (single SHA-256, no byte reversal).
//! * **Trim**: an odd level sets its first node aside and pairs it, as a left
//!   child, with the next odd level or the final node. No node is ever
//!   duplicated and `n` leaves yield exactly `2n - 1` nodes.
//!
//! ```
//! use trimtree_core::{build_trim, generate_proof, hash_leaf, verify_proof, HashMode};
//!
//! let mode = HashMode::DomainSeparated;
//! let leaves: Vec<_> = ["t1", "t2", "t3", "t4", "t5"]
//!     .iter()
//!     .map(|p| hash_leaf(p.as_bytes(), mode))
//!     .collect();
//! let tree = build_trim(&leaves, mode).unwrap();
//! assert_eq!(tree.stats().total_nodes, 9);
//!
//! let proof = generate_proof(&tree, 0).unwrap();
//! assert_eq!(proof.depth(), 1);
//! assert!(verify_proof(&proof, &tree.root()).valid);
//! ```

pub mod chain;
pub mod error;
pub mod hash;
pub mod proof;
pub mod tree;

pub use chain::{
    assemble_blocks, ingest_transactions, validate_chain, Block, BlockHeader, ChainError,
    ChainReport, ChainStore, Clock, FixedClock, SystemClock, TransactionRecord, BLOCK_PAYLOAD_CAP,
};
pub use error::Error;
pub use hash::{
    hash_counter_snapshot, hash_internal, hash_leaf, reset_hash_counter, Digest, HashCountScope,
    HashMode,
};
pub use proof::{
    detect_tamper, generate_proof, proof_size_bytes, verify_proof, InclusionProof, ProofFile,
    ProofStep, VerificationOutcome, PROOF_HEADER_BYTES,
};
pub use tree::{
    build_traditional, build_trim, expected_node_count, structural_counts, MerkleNode, MerkleTree,
    NodeId, NodeKind, Side, StructuralCounts, TreeDump, TreeStats, TreeVariant,
};
