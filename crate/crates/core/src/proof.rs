//! Inclusion proofs and tamper localisation.
//!
//! Each [`ProofStep`] records which side its sibling sits on. Trim trees are
//! irregular, so the side cannot be recovered from the leaf index.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hash::{hash_internal, Digest, HashMode};
use crate::tree::{MerkleTree, NodeId, Side, TreeVariant};

/// Bytes charged to every proof besides its siblings: version (1), variant
/// (1), mode (1), n (8), leaf index (8), leaf digest (32), and a 16-byte
/// bitmap holding one side bit per step.
pub const PROOF_HEADER_BYTES: usize = 67;

pub const PROOF_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofStep {
    pub sibling: Digest,
    /// Side the sibling occupies in the pairing.
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionProof {
    pub leaf_index: usize,
    pub leaf_digest: Digest,
    /// Leaf to root.
    pub path: Vec<ProofStep>,
    pub variant: TreeVariant,
    pub mode: HashMode,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerificationOutcome {
    pub valid: bool,
    pub computed_root: Digest,
    pub expected_root: Digest,
    pub steps_applied: usize,
}

pub fn generate_proof(tree: &MerkleTree, leaf_index: usize) -> Result<InclusionProof, Error> {
    let n = tree.leaf_count();
    if leaf_index >= n {
        return Err(Error::IndexOutOfRange {
            index: leaf_index,
            n,
        });
    }
    let mut path = Vec::new();
    let mut at = NodeId(leaf_index);
    while let Some(parent) = tree.node(at).parent {
        let (left, right) = tree
            .node(parent)
            .children
            .expect("a parent always has children");
        let step = match tree.node(at).side {
            // a duplicated pairing lists the node as its own right sibling
            Some(Side::Left) => ProofStep {
                sibling: tree.node(right).digest,
                side: Side::Right,
            },
            Some(Side::Right) => ProofStep {
                sibling: tree.node(left).digest,
                side: Side::Left,
            },
            None => unreachable!("non-root node without a side"),
        };
        path.push(step);
        at = parent;
    }
    Ok(InclusionProof {
        leaf_index,
        leaf_digest: tree.node(NodeId(leaf_index)).digest,
        path,
        variant: tree.variant(),
        mode: tree.mode(),
        n,
    })
}

impl InclusionProof {
    /// Folds the path from the leaf digest up. Only the proof itself is
    /// consulted.
    pub fn compute_root(&self) -> Digest {
        self.path
            .iter()
            .fold(self.leaf_digest, |acc, step| match step.side {
                Side::Left => hash_internal(&step.sibling, &acc, self.mode),
                Side::Right => hash_internal(&acc, &step.sibling, self.mode),
            })
    }

    pub fn depth(&self) -> usize {
        self.path.len()
    }

    pub fn to_file(&self, root: Digest) -> ProofFile {
        ProofFile {
            version: PROOF_FORMAT_VERSION,
            variant: self.variant,
            mode: self.mode,
            n: self.n,
            leaf_index: self.leaf_index,
            leaf_digest: self.leaf_digest,
            path: self.path.clone(),
            root,
        }
    }
}

pub fn verify_proof(proof: &InclusionProof, expected_root: &Digest) -> VerificationOutcome {
    let computed_root = proof.compute_root();
    VerificationOutcome {
        valid: computed_root == *expected_root,
        computed_root,
        expected_root: *expected_root,
        steps_applied: proof.path.len(),
    }
}

pub fn proof_size_bytes(proof: &InclusionProof) -> usize {
    PROOF_HEADER_BYTES + Digest::LEN * proof.path.len()
}

/// Rebuilds the tree from `leaves` under the tree's variant and mode and
/// returns the indices of leaves whose digests disagree, found by descending
/// only into mismatching subtrees. Empty means the leaves reproduce the
/// stored root.
pub fn detect_tamper(tree: &MerkleTree, leaves: &[Digest]) -> Result<Vec<usize>, Error> {
    if leaves.len() != tree.leaf_count() {
        return Err(Error::LengthMismatch {
            expected: tree.leaf_count(),
            actual: leaves.len(),
        });
    }
    let fresh = MerkleTree::build(tree.variant(), leaves, tree.mode())?;
    if fresh.root() == tree.root() {
        return Ok(Vec::new());
    }
    // same n and variant give the same arena layout
    let mut suspects = BTreeSet::new();
    let mut stack = vec![tree.root_id()];
    while let Some(id) = stack.pop() {
        if fresh.node(id).digest == tree.node(id).digest {
            continue;
        }
        match tree.node(id).children {
            None => {
                suspects.insert(id.0);
            }
            Some((l, r)) => {
                stack.push(l);
                if r != l {
                    stack.push(r);
                }
            }
        }
    }
    Ok(suspects.into_iter().collect())
}

/// On-disk proof: `{version, variant, mode, n, leaf_index, leaf_digest,
/// path: [{sibling, side: "L"|"R"}], root}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofFile {
    pub version: u32,
    pub variant: TreeVariant,
    pub mode: HashMode,
    pub n: usize,
    pub leaf_index: usize,
    pub leaf_digest: Digest,
    pub path: Vec<ProofStep>,
    pub root: Digest,
}

impl ProofFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("proof serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let file: ProofFile =
            serde_json::from_str(s).map_err(|e| Error::MalformedProof(e.to_string()))?;
        if file.version != PROOF_FORMAT_VERSION {
            return Err(Error::MalformedProof(format!(
                "unsupported version {}",
                file.version
            )));
        }
        if file.leaf_index >= file.n {
            return Err(Error::MalformedProof(format!(
                "leaf_index {} is not below n {}",
                file.leaf_index, file.n
            )));
        }
        Ok(file)
    }

    pub fn proof(&self) -> InclusionProof {
        InclusionProof {
            leaf_index: self.leaf_index,
            leaf_digest: self.leaf_digest,
            path: self.path.clone(),
            variant: self.variant,
            mode: self.mode,
            n: self.n,
        }
    }
}
