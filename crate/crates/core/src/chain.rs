//! Minimal block and chain layer.
//!
//! Transactions are opaque payloads. Blocks are packed greedily in mempool
//! order up to [`BLOCK_PAYLOAD_CAP`] bytes of summed payload. Each header
//! commits to the previous header digest and to the Merkle root of the block's
//! transactions under the block's tree variant and hash mode. Nonce is always 0.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::{hash_leaf, Digest, HashMode};
use crate::tree::{MerkleTree, TreeVariant};

/// Summed transaction payload bytes allowed in one block (headers excluded).
pub const BLOCK_PAYLOAD_CAP: usize = 1_000_000;

pub const BLOCK_VERSION: u32 = 1;

/// Size in bytes of the header hashing preimage.
pub const HEADER_PREIMAGE_LEN: usize = 4 + 32 + 32 + 8 + 8 + 4;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: duplicate transaction id `{id}`")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error("transaction `{id}` is {size} bytes, above the {BLOCK_PAYLOAD_CAP}-byte block cap")]
    OversizedTransaction { id: String, size: usize },
    #[error("EmptyMempool: no transactions to assemble")]
    EmptyMempool,
    #[error("chain store {0} holds no blocks")]
    EmptyStore(PathBuf),
    #[error("corrupt block file {path}: {message}")]
    StoreCorrupt { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl ChainError {
    fn io(path: &Path, source: io::Error) -> Self {
        ChainError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransactionRecord {
    pub id: String,
    pub payload: Vec<u8>,
}

impl TransactionRecord {
    pub fn new(id: impl Into<String>, payload: Vec<u8>) -> Result<Self, ChainError> {
        let id = id.into();
        if payload.len() > BLOCK_PAYLOAD_CAP {
            return Err(ChainError::OversizedTransaction {
                id,
                size: payload.len(),
            });
        }
        Ok(TransactionRecord { id, payload })
    }

    pub fn byte_size(&self) -> usize {
        self.payload.len()
    }

    pub fn leaf_digest(&self, mode: HashMode) -> Digest {
        hash_leaf(&self.payload, mode)
    }
}

/// Wire form of a transaction, shared by mempool lines and block files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransactionLine {
    pub id: String,
    pub payload_hex: String,
}

impl From<&TransactionRecord> for TransactionLine {
    fn from(tx: &TransactionRecord) -> Self {
        TransactionLine {
            id: tx.id.clone(),
            payload_hex: hex::encode(&tx.payload),
        }
    }
}

/// Parses a mempool: one `{id, payload_hex}` JSON document per line, blank
/// lines ignored. Line numbers in errors are 1-based.
pub fn parse_mempool(text: &str, path: &Path) -> Result<Vec<TransactionRecord>, ChainError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| ChainError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let rec: TransactionLine =
            serde_json::from_str(raw).map_err(|e| parse_err(e.to_string()))?;
        let payload =
            hex::decode(&rec.payload_hex).map_err(|e| parse_err(format!("payload_hex: {e}")))?;
        if !seen.insert(rec.id.clone()) {
            return Err(ChainError::DuplicateId {
                path: path.to_path_buf(),
                line,
                id: rec.id,
            });
        }
        out.push(TransactionRecord::new(rec.id, payload)?);
    }
    Ok(out)
}

pub fn ingest_transactions(path: impl AsRef<Path>) -> Result<Vec<TransactionRecord>, ChainError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| ChainError::io(path, e))?;
    parse_mempool(&text, path)
}

/// Writes records in mempool line format.
pub fn write_mempool(path: impl AsRef<Path>, txs: &[TransactionRecord]) -> Result<(), ChainError> {
    let path = path.as_ref();
    let mut text = String::new();
    for tx in txs {
        text.push_str(&serde_json::to_string(&TransactionLine::from(tx)).expect("serializes"));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| ChainError::io(path, e))
}

/// Source of header timestamps, in seconds since the Unix epoch.
pub trait Clock {
    fn now(&self) -> u64;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FixedClock(pub u64);

impl Clock for FixedClock {
    fn now(&self) -> u64 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockHeader {
    pub version: u32,
    pub prev_hash: Digest,
    pub merkle_root: Digest,
    pub timestamp: u64,
    pub nonce: u64,
    pub tx_count: u32,
}

impl BlockHeader {
    /// `version LE32 || prev_hash || merkle_root || timestamp LE64 || nonce LE64 || tx_count LE32`
    pub fn preimage(&self) -> [u8; HEADER_PREIMAGE_LEN] {
        let mut buf = [0u8; HEADER_PREIMAGE_LEN];
        buf[0..4].copy_from_slice(&self.version.to_le_bytes());
        buf[4..36].copy_from_slice(&self.prev_hash.0);
        buf[36..68].copy_from_slice(&self.merkle_root.0);
        buf[68..76].copy_from_slice(&self.timestamp.to_le_bytes());
        buf[76..84].copy_from_slice(&self.nonce.to_le_bytes());
        buf[84..88].copy_from_slice(&self.tx_count.to_le_bytes());
        buf
    }

    pub fn digest(&self, mode: HashMode) -> Digest {
        hash_leaf(&self.preimage(), mode)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub header: BlockHeader,
    pub transactions: Vec<TransactionRecord>,
    pub variant: TreeVariant,
    pub mode: HashMode,
}

pub fn merkle_root_of(
    txs: &[TransactionRecord],
    variant: TreeVariant,
    mode: HashMode,
) -> Option<Digest> {
    let leaves: Vec<Digest> = txs.iter().map(|tx| tx.leaf_digest(mode)).collect();
    MerkleTree::build(variant, &leaves, mode)
        .ok()
        .map(|t| t.root())
}

impl Block {
    pub fn payload_bytes(&self) -> usize {
        self.transactions
            .iter()
            .map(TransactionRecord::byte_size)
            .sum()
    }

    pub fn digest(&self) -> Digest {
        self.header.digest(self.mode)
    }

    pub fn recompute_root(&self) -> Option<Digest> {
        merkle_root_of(&self.transactions, self.variant, self.mode)
    }

    pub fn to_file(&self) -> BlockFile {
        BlockFile {
            header: self.header.clone(),
            variant: self.variant,
            mode: self.mode,
            transactions: self
                .transactions
                .iter()
                .map(TransactionLine::from)
                .collect(),
        }
    }
}

/// On-disk form of a block, `block_<k>.json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockFile {
    pub header: BlockHeader,
    pub variant: TreeVariant,
    pub mode: HashMode,
    pub transactions: Vec<TransactionLine>,
}

impl BlockFile {
    fn into_block(self) -> Result<Block, String> {
        let transactions = self
            .transactions
            .into_iter()
            .map(|line| {
                hex::decode(&line.payload_hex)
                    .map(|payload| TransactionRecord {
                        id: line.id.clone(),
                        payload,
                    })
                    .map_err(|e| format!("transaction `{}`: {e}", line.id))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Block {
            header: self.header,
            transactions,
            variant: self.variant,
            mode: self.mode,
        })
    }
}

/// Packs transactions first-fit in arrival order. A transaction that would
/// push the running sum past the cap closes the current block.
pub fn assemble_blocks(
    mempool: &[TransactionRecord],
    variant: TreeVariant,
    mode: HashMode,
    prev: Option<Digest>,
    clock: &dyn Clock,
) -> Result<Vec<Block>, ChainError> {
    if mempool.is_empty() {
        return Err(ChainError::EmptyMempool);
    }
    let mut batches: Vec<Vec<TransactionRecord>> = Vec::new();
    let mut current: Vec<TransactionRecord> = Vec::new();
    let mut running = 0usize;
    for tx in mempool {
        if tx.byte_size() > BLOCK_PAYLOAD_CAP {
            return Err(ChainError::OversizedTransaction {
                id: tx.id.clone(),
                size: tx.byte_size(),
            });
        }
        if !current.is_empty() && running + tx.byte_size() > BLOCK_PAYLOAD_CAP {
            batches.push(std::mem::take(&mut current));
            running = 0;
        }
        running += tx.byte_size();
        current.push(tx.clone());
    }
    batches.push(current);

    let mut prev_hash = prev.unwrap_or(Digest::ZERO);
    let mut blocks = Vec::with_capacity(batches.len());
    for transactions in batches {
        let merkle_root =
            merkle_root_of(&transactions, variant, mode).expect("batches are non-empty");
        let header = BlockHeader {
            version: BLOCK_VERSION,
            prev_hash,
            merkle_root,
            timestamp: clock.now(),
            nonce: 0,
            tx_count: transactions.len() as u32,
        };
        prev_hash = header.digest(mode);
        blocks.push(Block {
            header,
            transactions,
            variant,
            mode,
        });
    }
    Ok(blocks)
}

/// Directory of `block_<k>.json` files, numbered from 1. Block 1 is the
/// genesis block and links to the all-zero digest.
#[derive(Clone, Debug)]
pub struct ChainStore {
    dir: PathBuf,
}

pub fn block_file_name(k: usize) -> String {
    format!("block_{k}.json")
}

impl ChainStore {
    pub fn open(dir: impl Into<PathBuf>) -> Self {
        ChainStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Block files sorted by their number.
    pub fn block_files(&self) -> Result<Vec<(usize, PathBuf)>, ChainError> {
        let entries = fs::read_dir(&self.dir).map_err(|e| ChainError::io(&self.dir, e))?;
        let mut files = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| ChainError::io(&self.dir, e))?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            let Some(k) = name
                .strip_prefix("block_")
                .and_then(|s| s.strip_suffix(".json"))
                .and_then(|s| s.parse::<usize>().ok())
            else {
                continue;
            };
            files.push((k, entry.path()));
        }
        files.sort();
        Ok(files)
    }

    pub fn load_block(path: &Path) -> Result<Block, ChainError> {
        let text = fs::read_to_string(path).map_err(|e| ChainError::io(path, e))?;
        let corrupt = |message: String| ChainError::StoreCorrupt {
            path: path.to_path_buf(),
            message,
        };
        let file: BlockFile = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        file.into_block().map_err(corrupt)
    }

    pub fn load(&self) -> Result<Vec<Block>, ChainError> {
        self.block_files()?
            .iter()
            .map(|(_, path)| Self::load_block(path))
            .collect()
    }

    /// Digest of the newest header, if any block exists.
    pub fn tip(&self) -> Result<Option<Digest>, ChainError> {
        let files = self.block_files()?;
        match files.last() {
            None => Ok(None),
            Some((_, path)) => Ok(Some(Self::load_block(path)?.digest())),
        }
    }

    /// Writes blocks after any existing ones. Returns the paths written.
    pub fn append(&self, blocks: &[Block]) -> Result<Vec<PathBuf>, ChainError> {
        fs::create_dir_all(&self.dir).map_err(|e| ChainError::io(&self.dir, e))?;
        let next = self.block_files()?.last().map_or(1, |(k, _)| k + 1);
        let mut written = Vec::with_capacity(blocks.len());
        for (offset, block) in blocks.iter().enumerate() {
            let path = self.dir.join(block_file_name(next + offset));
            let json = serde_json::to_string_pretty(&block.to_file()).expect("block serializes");
            fs::write(&path, json + "\n").map_err(|e| ChainError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockCheck {
    Linkage,
    TxCount,
    PayloadCap,
    MerkleRoot,
}

impl BlockCheck {
    pub fn name(&self) -> &'static str {
        match self {
            BlockCheck::Linkage => "prev_hash linkage",
            BlockCheck::TxCount => "tx_count",
            BlockCheck::PayloadCap => "payload cap",
            BlockCheck::MerkleRoot => "merkle_root",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockVerdict {
    pub number: usize,
    pub path: PathBuf,
    pub merkle_root: Digest,
    /// Every check that failed, in evaluation order.
    pub failures: Vec<BlockCheck>,
}

impl BlockVerdict {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<BlockCheck> {
        self.failures.first().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainReport {
    pub blocks: Vec<BlockVerdict>,
}

impl ChainReport {
    pub fn is_valid(&self) -> bool {
        self.blocks.iter().all(BlockVerdict::passed)
    }

    pub fn failing_blocks(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .filter(|b| !b.passed())
            .map(|b| b.number)
            .collect()
    }
}

pub fn check_blocks(blocks: &[(usize, PathBuf, Block)]) -> ChainReport {
    let mut expected_prev = Digest::ZERO;
    let mut verdicts = Vec::with_capacity(blocks.len());
    for (number, path, block) in blocks {
        let mut failures = Vec::new();
        if block.header.prev_hash != expected_prev {
            failures.push(BlockCheck::Linkage);
        }
        if block.header.tx_count as usize != block.transactions.len() {
            failures.push(BlockCheck::TxCount);
        }
        if block.payload_bytes() > BLOCK_PAYLOAD_CAP {
            failures.push(BlockCheck::PayloadCap);
        }
        if block.recompute_root() != Some(block.header.merkle_root) {
            failures.push(BlockCheck::MerkleRoot);
        }
        // link the next block to the header as stored, so one bad block does
        // not cascade
        expected_prev = block.digest();
        verdicts.push(BlockVerdict {
            number: *number,
            path: path.clone(),
            merkle_root: block.header.merkle_root,
            failures,
        });
    }
    ChainReport { blocks: verdicts }
}

/// Re-derives every block's Merkle root and checks header linkage. Unreadable
/// or unparsable files are errors; inconsistent but readable blocks are
/// reported as failures in the returned report.
pub fn validate_chain(store: &ChainStore) -> Result<ChainReport, ChainError> {
    let files = store.block_files()?;
    if files.is_empty() {
        return Err(ChainError::EmptyStore(store.dir().to_path_buf()));
    }
    let blocks = files
        .into_iter()
        .map(|(k, path)| ChainStore::load_block(&path).map(|b| (k, path, b)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(check_blocks(&blocks))
}
