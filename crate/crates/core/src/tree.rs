//! Arena-backed Merkle trees in two shapes.
//!
//! [`TreeVariant::Traditional`] is the Bitcoin-style construction: an odd
//! level pairs its last node with itself. [`TreeVariant::Trim`] never
//! duplicates. When a level has odd width and nothing is set aside, its first
//! node becomes the *carry* and the rest pair up left to right. The next odd
//! level (or the final single node) absorbs the carry as a left child. A trim
//! tree over `n` leaves therefore holds exactly `2n - 1` nodes and performs
//! `n - 1` internal hashes.
//!
//! Nodes live in a flat vector. Leaves occupy ordinals `0..n` in input order,
//! so a leaf's ordinal is also its leaf index.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hash::{hash_internal, Digest, HashMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TreeVariant {
    #[serde(rename = "traditional")]
    Traditional,
    #[serde(rename = "trim")]
    Trim,
}

impl TreeVariant {
    pub const ALL: [TreeVariant; 2] = [TreeVariant::Traditional, TreeVariant::Trim];

    pub fn as_str(&self) -> &'static str {
        match self {
            TreeVariant::Traditional => "traditional",
            TreeVariant::Trim => "trim",
        }
    }
}

impl fmt::Display for TreeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TreeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "traditional" => Ok(TreeVariant::Traditional),
            "trim" => Ok(TreeVariant::Trim),
            other => Err(Error::UnknownVariant(other.to_string())),
        }
    }
}

/// Position of a node in its tree's arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MerkleNode {
    pub digest: Digest,
    pub kind: NodeKind,
    pub level: usize,
    pub parent: Option<NodeId>,
    pub side: Option<Side>,
    /// Left and right child. Both entries name the same node for a
    /// traditional duplicated pairing.
    pub children: Option<(NodeId, NodeId)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    pub n: usize,
    pub total_nodes: usize,
    pub internal_hashes: usize,
    pub duplicated_pairings: usize,
    pub levels: usize,
    pub build_nanos: u64,
}

/// Counts that follow from the leaf count alone, without hashing anything.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralCounts {
    pub total_nodes: usize,
    pub internal_hashes: usize,
    pub duplicated_pairings: usize,
    /// Nodes created per level, leaves first.
    pub level_widths: Vec<usize>,
}

impl StructuralCounts {
    pub fn levels(&self) -> usize {
        self.level_widths.len()
    }
}

pub fn structural_counts(n: usize, variant: TreeVariant) -> Result<StructuralCounts, Error> {
    if n == 0 {
        return Err(Error::InvalidCount);
    }
    let mut widths = vec![n];
    let mut internal = 0;
    let mut duplicated = 0;
    let mut width = n;
    match variant {
        TreeVariant::Traditional => {
            while width > 1 {
                duplicated += width % 2;
                width = width.div_ceil(2);
                internal += width;
                widths.push(width);
            }
        }
        TreeVariant::Trim => {
            let mut carry = false;
            loop {
                if width == 1 {
                    if carry {
                        internal += 1;
                        widths.push(1);
                    }
                    break;
                }
                if width % 2 == 1 {
                    // either sets a carry aside or absorbs the pending one
                    width = if carry { width.div_ceil(2) } else { width / 2 };
                    carry = !carry;
                } else {
                    width /= 2;
                }
                internal += width;
                widths.push(width);
            }
        }
    }
    Ok(StructuralCounts {
        total_nodes: n + internal,
        internal_hashes: internal,
        duplicated_pairings: duplicated,
        level_widths: widths,
    })
}

/// Stored node count for a tree of `n` leaves. Duplicated references in the
/// traditional variant are not counted as extra nodes.
pub fn expected_node_count(n: usize, variant: TreeVariant) -> Result<usize, Error> {
    structural_counts(n, variant).map(|c| c.total_nodes)
}

#[derive(Clone, Debug)]
pub struct MerkleTree {
    variant: TreeVariant,
    mode: HashMode,
    nodes: Vec<MerkleNode>,
    levels: Vec<Vec<NodeId>>,
    root: NodeId,
    stats: TreeStats,
}

struct Builder {
    mode: HashMode,
    nodes: Vec<MerkleNode>,
    levels: Vec<Vec<NodeId>>,
    duplicated: usize,
}

impl Builder {
    fn new(leaves: &[Digest], mode: HashMode) -> Self {
        let nodes = leaves
            .iter()
            .map(|d| MerkleNode {
                digest: *d,
                kind: NodeKind::Leaf,
                level: 0,
                parent: None,
                side: None,
                children: None,
            })
            .collect();
        Builder {
            mode,
            nodes,
            levels: vec![(0..leaves.len()).map(NodeId).collect()],
            duplicated: 0,
        }
    }

    fn join(&mut self, left: NodeId, right: NodeId) -> NodeId {
        let digest = hash_internal(
            &self.nodes[left.0].digest,
            &self.nodes[right.0].digest,
            self.mode,
        );
        let id = NodeId(self.nodes.len());
        self.nodes.push(MerkleNode {
            digest,
            kind: NodeKind::Internal,
            level: self.levels.len(),
            parent: None,
            side: None,
            children: Some((left, right)),
        });
        self.nodes[left.0].parent = Some(id);
        self.nodes[left.0].side = Some(Side::Left);
        if right != left {
            self.nodes[right.0].parent = Some(id);
            self.nodes[right.0].side = Some(Side::Right);
        } else {
            self.duplicated += 1;
        }
        id
    }

    fn current(&self) -> Vec<NodeId> {
        self.levels.last().cloned().unwrap_or_default()
    }

    fn reduce_traditional(&mut self) {
        let mut level = self.current();
        while level.len() > 1 {
            let next: Vec<NodeId> = level
                .chunks(2)
                .map(|pair| match *pair {
                    [l, r] => self.join(l, r),
                    [only] => self.join(only, only),
                    _ => unreachable!(),
                })
                .collect();
            self.levels.push(next.clone());
            level = next;
        }
    }

    fn reduce_trim(&mut self) {
        let mut level = self.current();
        let mut carry: Option<NodeId> = None;
        loop {
            if level.len() == 1 {
                if let Some(c) = carry.take() {
                    let root = self.join(c, level[0]);
                    self.levels.push(vec![root]);
                }
                return;
            }
            let mut next = Vec::with_capacity(level.len() / 2 + 1);
            let rest = if level.len() % 2 == 1 {
                match carry.take() {
                    Some(c) => next.push(self.join(c, level[0])),
                    None => carry = Some(level[0]),
                }
                &level[1..]
            } else {
                &level[..]
            };
            for pair in rest.chunks_exact(2) {
                next.push(self.join(pair[0], pair[1]));
            }
            self.levels.push(next.clone());
            level = next;
        }
    }
}

pub fn build_traditional(leaves: &[Digest], mode: HashMode) -> Result<MerkleTree, Error> {
    MerkleTree::build(TreeVariant::Traditional, leaves, mode)
}

pub fn build_trim(leaves: &[Digest], mode: HashMode) -> Result<MerkleTree, Error> {
    MerkleTree::build(TreeVariant::Trim, leaves, mode)
}

impl MerkleTree {
    pub fn build(variant: TreeVariant, leaves: &[Digest], mode: HashMode) -> Result<Self, Error> {
        if leaves.is_empty() {
            return Err(Error::EmptyLeaves);
        }
        let start = Instant::now();
        let mut builder = Builder::new(leaves, mode);
        match variant {
            TreeVariant::Traditional => builder.reduce_traditional(),
            TreeVariant::Trim => builder.reduce_trim(),
        }
        let build_nanos = start.elapsed().as_nanos() as u64;

        let Builder {
            nodes,
            levels,
            duplicated,
            ..
        } = builder;
        let root = levels.last().expect("at least the leaf level")[0];
        let stats = TreeStats {
            n: leaves.len(),
            total_nodes: nodes.len(),
            internal_hashes: nodes.len() - leaves.len(),
            duplicated_pairings: duplicated,
            levels: levels.len(),
            build_nanos,
        };
        Ok(MerkleTree {
            variant,
            mode,
            nodes,
            levels,
            root,
            stats,
        })
    }

    pub fn variant(&self) -> TreeVariant {
        self.variant
    }

    pub fn mode(&self) -> HashMode {
        self.mode
    }

    pub fn leaf_count(&self) -> usize {
        self.stats.n
    }

    pub fn root(&self) -> Digest {
        self.nodes[self.root.0].digest
    }

    pub fn root_id(&self) -> NodeId {
        self.root
    }

    pub fn stats(&self) -> &TreeStats {
        &self.stats
    }

    pub fn node(&self, id: NodeId) -> &MerkleNode {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[MerkleNode] {
        &self.nodes
    }

    pub fn leaf(&self, index: usize) -> Option<Digest> {
        (index < self.stats.n).then(|| self.nodes[index].digest)
    }

    pub fn leaves(&self) -> impl Iterator<Item = Digest> + '_ {
        self.nodes[..self.stats.n].iter().map(|n| n.digest)
    }

    /// Nodes created at each level, leaves first. A trim carry is counted in
    /// the level that produced it.
    pub fn levels(&self) -> &[Vec<NodeId>] {
        &self.levels
    }

    pub fn level_widths(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Number of parent hops from leaf `index` to the root.
    pub fn depth_of(&self, index: usize) -> Result<usize, Error> {
        if index >= self.stats.n {
            return Err(Error::IndexOutOfRange {
                index,
                n: self.stats.n,
            });
        }
        let mut depth = 0;
        let mut at = NodeId(index);
        while let Some(p) = self.nodes[at.0].parent {
            depth += 1;
            at = p;
        }
        Ok(depth)
    }

    pub fn to_dump(&self) -> TreeDump {
        TreeDump {
            variant: self.variant,
            mode: self.mode,
            n: self.stats.n,
            levels: self
                .levels
                .iter()
                .map(|lvl| lvl.iter().map(|id| self.nodes[id.0].digest).collect())
                .collect(),
            root: self.root(),
            stats: self.stats.clone(),
        }
    }

    /// Rebuilds from the dump's leaf level and checks every stored digest
    /// against the recomputation.
    pub fn from_dump(dump: &TreeDump) -> Result<Self, Error> {
        let leaves = dump
            .levels
            .first()
            .ok_or_else(|| Error::MalformedTree("no levels".into()))?;
        if leaves.len() != dump.n {
            return Err(Error::MalformedTree(format!(
                "n = {} but leaf level holds {} digests",
                dump.n,
                leaves.len()
            )));
        }
        let tree = MerkleTree::build(dump.variant, leaves, dump.mode)?;
        let rebuilt = tree.to_dump();
        if rebuilt.levels != dump.levels {
            return Err(Error::MalformedTree(
                "stored levels disagree with recomputation".into(),
            ));
        }
        if rebuilt.root != dump.root {
            return Err(Error::MalformedTree(
                "stored root disagrees with recomputation".into(),
            ));
        }
        Ok(tree)
    }
}

/// On-disk form of a tree: `{variant, mode, n, levels, root, stats}` with
/// every digest as lowercase hex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDump {
    pub variant: TreeVariant,
    pub mode: HashMode,
    pub n: usize,
    pub levels: Vec<Vec<Digest>>,
    pub root: Digest,
    pub stats: TreeStats,
}

impl TreeDump {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree dump serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        serde_json::from_str(s).map_err(|e| Error::MalformedTree(e.to_string()))
    }
}
