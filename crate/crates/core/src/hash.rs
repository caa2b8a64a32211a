//! SHA-256 node hashing and hash-invocation accounting.
//!
//! Every call to [`hash_leaf`] or [`hash_internal`] counts as one hash
//! invocation. Invocations are tallied twice: in a process-wide atomic
//! counter ([`hash_counter_snapshot`] / [`reset_hash_counter`]) and in a
//! per-thread counter read through [`HashCountScope`]. The per-thread tally
//! lets concurrent measurements stay isolated from one another.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

use crate::error::Error;

/// Prefix byte for leaf preimages in [`HashMode::DomainSeparated`].
pub const LEAF_PREFIX: u8 = 0x00;
/// Prefix byte for internal-node preimages in [`HashMode::DomainSeparated`].
pub const INTERNAL_PREFIX: u8 = 0x01;

/// A 32-byte SHA-256 output.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const LEN: usize = 32;
    pub const ZERO: Digest = Digest([0u8; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// Lowercase hex, 64 characters, no prefix.
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    /// Parses exactly 64 hex characters. Uppercase digits are accepted.
    pub fn from_hex(s: &str) -> Result<Self, Error> {
        if s.len() != 64 {
            return Err(Error::InvalidHex(format!(
                "expected 64 hex characters, got {}",
                s.len()
            )));
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|e| Error::InvalidHex(e.to_string()))?;
        Ok(Digest(out))
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl FromStr for Digest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Digest::from_hex(s)
    }
}

impl From<[u8; 32]> for Digest {
    fn from(bytes: [u8; 32]) -> Self {
        Digest(bytes)
    }
}

impl AsRef<[u8]> for Digest {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Digest::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// How leaf and internal preimages are formed.
///
/// `PlainConcat` hashes the payload and `left || right` as-is. `DomainSeparated`
/// prefixes leaves with [`LEAF_PREFIX`] and internal nodes with
/// [`INTERNAL_PREFIX`] so that an internal node can never be replayed as a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum HashMode {
    #[serde(rename = "plain")]
    PlainConcat,
    #[default]
    #[serde(rename = "domsep")]
    DomainSeparated,
}

impl HashMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            HashMode::PlainConcat => "plain",
            HashMode::DomainSeparated => "domsep",
        }
    }
}

impl fmt::Display for HashMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HashMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(HashMode::PlainConcat),
            "domsep" => Ok(HashMode::DomainSeparated),
            other => Err(Error::UnknownMode(other.to_string())),
        }
    }
}

static GLOBAL_HASHES: AtomicU64 = AtomicU64::new(0);

thread_local! {
    static LOCAL_HASHES: Cell<u64> = const { Cell::new(0) };
}

#[inline]
fn count_invocation() {
    GLOBAL_HASHES.fetch_add(1, Ordering::Relaxed);
    LOCAL_HASHES.with(|c| c.set(c.get() + 1));
}

/// Total hash invocations across all threads since start or the last
/// [`reset_hash_counter`].
pub fn hash_counter_snapshot() -> u64 {
    GLOBAL_HASHES.load(Ordering::Relaxed)
}

pub fn reset_hash_counter() {
    GLOBAL_HASHES.store(0, Ordering::Relaxed);
}

/// Counts hash invocations made on the current thread after creation.
///
/// ```
/// use trimtree_core::hash::{hash_leaf, HashCountScope, HashMode};
///
/// let scope = HashCountScope::begin();
/// hash_leaf(b"tx", HashMode::PlainConcat);
/// assert_eq!(scope.count(), 1);
/// ```
#[derive(Debug)]
pub struct HashCountScope {
    start: u64,
}

impl HashCountScope {
    pub fn begin() -> Self {
        HashCountScope {
            start: LOCAL_HASHES.with(Cell::get),
        }
    }

    pub fn count(&self) -> u64 {
        LOCAL_HASHES.with(Cell::get) - self.start
    }
}

pub fn hash_leaf(payload: &[u8], mode: HashMode) -> Digest {
    count_invocation();
    let mut hasher = Sha256::new();
    if mode == HashMode::DomainSeparated {
        hasher.update([LEAF_PREFIX]);
    }
    hasher.update(payload);
    Digest(hasher.finalize().into())
}

/// Combines two children, left first.
pub fn hash_internal(left: &Digest, right: &Digest, mode: HashMode) -> Digest {
    count_invocation();
    let mut hasher = Sha256::new();
    if mode == HashMode::DomainSeparated {
        hasher.update([INTERNAL_PREFIX]);
    }
    hasher.update(left.0);
    hasher.update(right.0);
    Digest(hasher.finalize().into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hex(d: Digest) -> String {
        d.to_hex()
    }

    #[test]
    fn sha256_test_vectors() {
        assert_eq!(
            hex(hash_leaf(b"", HashMode::PlainConcat)),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            hex(hash_leaf(b"abc", HashMode::PlainConcat)),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn domain_separated_leaf_prefixes_zero_byte() {
        let sep = hash_leaf(b"abc", HashMode::DomainSeparated);
        assert_ne!(sep, hash_leaf(b"abc", HashMode::PlainConcat));
        assert_eq!(sep, hash_leaf(b"\x00abc", HashMode::PlainConcat));
    }

    #[test]
    fn internal_is_order_sensitive() {
        let a = hash_leaf(b"a", HashMode::PlainConcat);
        let b = hash_leaf(b"b", HashMode::PlainConcat);
        let ab = hash_internal(&a, &b, HashMode::PlainConcat);
        assert_ne!(ab, hash_internal(&b, &a, HashMode::PlainConcat));

        let mut concat = a.0.to_vec();
        concat.extend_from_slice(&b.0);
        assert_eq!(ab, hash_leaf(&concat, HashMode::PlainConcat));
        // a || a is well-defined
        let aa = hash_internal(&a, &a, HashMode::PlainConcat);
        let mut doubled = a.0.to_vec();
        doubled.extend_from_slice(&a.0);
        assert_eq!(aa, hash_leaf(&doubled, HashMode::PlainConcat));
    }

    #[test]
    fn domain_separated_internal_differs_from_leaf_of_concat() {
        let a = hash_leaf(b"a", HashMode::DomainSeparated);
        let b = hash_leaf(b"b", HashMode::DomainSeparated);
        let mut concat = a.0.to_vec();
        concat.extend_from_slice(&b.0);
        let internal = hash_internal(&a, &b, HashMode::DomainSeparated);
        assert_ne!(internal, hash_leaf(&concat, HashMode::DomainSeparated));
        let mut pre = vec![INTERNAL_PREFIX];
        pre.extend_from_slice(&concat);
        assert_eq!(internal, hash_leaf(&pre, HashMode::PlainConcat));
    }

    #[test]
    fn modes_differ_on_random_payloads() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let len = rng.random_range(0..300);
            let mut p = vec![0u8; len];
            rng.fill_bytes(&mut p);
            let plain = hash_leaf(&p, HashMode::PlainConcat);
            assert_eq!(plain, hash_leaf(&p, HashMode::PlainConcat));
            assert_ne!(plain, hash_leaf(&p, HashMode::DomainSeparated));
        }
    }

    #[test]
    fn scope_counts_only_this_thread() {
        let scope = HashCountScope::begin();
        assert_eq!(scope.count(), 0);
        std::thread::spawn(|| {
            hash_leaf(b"elsewhere", HashMode::PlainConcat);
        })
        .join()
        .unwrap();
        assert_eq!(scope.count(), 0);
        let d = hash_leaf(b"x", HashMode::DomainSeparated);
        hash_internal(&d, &d, HashMode::DomainSeparated);
        assert_eq!(scope.count(), 2);
    }

    #[test]
    fn global_counter_is_monotone() {
        let before = hash_counter_snapshot();
        hash_leaf(b"x", HashMode::PlainConcat);
        // nothing in this test binary resets the global counter
        assert!(hash_counter_snapshot() > before);
    }

    #[test]
    fn hex_round_trip_and_errors() {
        let d = hash_leaf(b"abc", HashMode::PlainConcat);
        let s = d.to_string();
        assert_eq!(s.len(), 64);
        assert_eq!(s, s.to_lowercase());
        assert_eq!(s.parse::<Digest>().unwrap(), d);
        assert!(matches!(
            Digest::from_hex(&s[..63]),
            Err(Error::InvalidHex(_))
        ));
        assert!(matches!(
            Digest::from_hex(&"zz".repeat(32)),
            Err(Error::InvalidHex(_))
        ));
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, format!("\"{s}\""));
    }

    #[test]
    fn mode_names() {
        assert_eq!("plain".parse::<HashMode>().unwrap(), HashMode::PlainConcat);
        assert_eq!(
            "domsep".parse::<HashMode>().unwrap(),
            HashMode::DomainSeparated
        );
        assert!("sha3".parse::<HashMode>().is_err());
        assert_eq!(HashMode::default(), HashMode::DomainSeparated);
        assert_eq!(
            serde_json::to_string(&HashMode::PlainConcat).unwrap(),
            "\"plain\""
        );
    }
}
