use std::collections::BTreeSet;
use std::time::Instant;

use rand::{seq::index, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use trimtree_core::{
    generate_proof, hash_leaf, verify_proof, Digest, HashCountScope, HashMode, MerkleTree,
    TreeVariant,
};

use crate::BenchError;

/// Above this many leaves, proofs are measured on a seeded sample of this size.
pub const PROOF_SAMPLE_CAP: usize = 1_000;

pub const PAYLOAD_GENERATOR: &str = "ChaCha8 (rand_chacha), seeded with config seed, stream = n";

const PROOF_SAMPLE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub variants: Vec<TreeVariant>,
    pub mode: HashMode,
    pub repetitions: usize,
    pub payload_bytes: usize,
    pub seed: u64,
    /// Run independent (variant, n) cells on a thread pool.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![3, 5, 8, 15, 16, 17, 100, 1000],
            variants: TreeVariant::ALL.to_vec(),
            mode: HashMode::DomainSeparated,
            repetitions: 5,
            payload_bytes: 256,
            seed: 0x5eed,
            parallel: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.sizes.is_empty() {
            return Err(BenchError::InvalidConfig("sizes must not be empty".into()));
        }
        if self.sizes.contains(&0) {
            return Err(BenchError::InvalidConfig(
                "every size must be at least 1".into(),
            ));
        }
        if self.variants.is_empty() {
            return Err(BenchError::InvalidConfig(
                "variants must not be empty".into(),
            ));
        }
        if self.repetitions < 3 {
            return Err(BenchError::InvalidConfig(format!(
                "repetitions must be at least 3, got {}",
                self.repetitions
            )));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(TreeVariant, usize)> {
        let variants: BTreeSet<_> = self.variants.iter().copied().collect();
        let sizes: BTreeSet<_> = self.sizes.iter().copied().collect();
        variants
            .into_iter()
            .flat_map(|v| sizes.iter().map(move |&n| (v, n)))
            .collect()
    }
}

/// One row per (variant, n). Timing fields are medians over repetitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSample {
    pub variant: TreeVariant,
    pub n: usize,
    pub build_nanos: u64,
    pub prove_nanos_mean: f64,
    pub verify_nanos_mean: f64,
    pub internal_hashes: usize,
    /// Leaf plus internal hashes for one build, before any proof work.
    pub total_hash_invocations: u64,
    pub stored_nodes: usize,
    pub stored_bytes: usize,
    pub mean_proof_depth: f64,
}

impl BenchSample {
    /// The columns that must not change between runs with the same seed.
    pub fn structural(&self) -> (TreeVariant, usize, usize, u64, usize, usize, u64) {
        (
            self.variant,
            self.n,
            self.internal_hashes,
            self.total_hash_invocations,
            self.stored_nodes,
            self.stored_bytes,
            self.mean_proof_depth.to_bits(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub samples: Vec<BenchSample>,
    pub environment: String,
}

/// `n` payloads of `payload_bytes` each. Identical for every variant.
pub fn generate_payloads(seed: u64, n: usize, payload_bytes: usize) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    (0..n)
        .map(|_| {
            let mut p = vec![0u8; payload_bytes];
            rng.fill_bytes(&mut p);
            p
        })
        .collect()
}

/// Every index when `n <= PROOF_SAMPLE_CAP`, otherwise a sorted seeded sample.
pub fn proof_sample_indices(seed: u64, n: usize) -> Vec<usize> {
    if n <= PROOF_SAMPLE_CAP {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ PROOF_SAMPLE_SALT);
    rng.set_stream(n as u64);
    let mut picked = index::sample(&mut rng, n, PROOF_SAMPLE_CAP).into_vec();
    picked.sort_unstable();
    picked
}

struct Repetition {
    build_nanos: u64,
    prove_nanos_mean: f64,
    verify_nanos_mean: f64,
    tree_stats: trimtree_core::TreeStats,
    hash_invocations: u64,
    mean_depth: f64,
}

fn run_once(
    variant: TreeVariant,
    mode: HashMode,
    payloads: &[Vec<u8>],
    sample: &[usize],
) -> Result<Repetition, BenchError> {
    let scope = HashCountScope::begin();
    let start = Instant::now();
    let leaves: Vec<Digest> = payloads.iter().map(|p| hash_leaf(p, mode)).collect();
    let tree = MerkleTree::build(variant, &leaves, mode)?;
    let build_nanos = start.elapsed().as_nanos() as u64;
    let hash_invocations = scope.count();

    let start = Instant::now();
    let proofs = sample
        .iter()
        .map(|&i| generate_proof(&tree, i))
        .collect::<Result<Vec<_>, _>>()?;
    let prove_nanos = start.elapsed().as_nanos() as f64;

    let root = tree.root();
    let start = Instant::now();
    for p in &proofs {
        if !verify_proof(p, &root).valid {
            return Err(BenchError::VerificationFailed {
                variant,
                n: leaves.len(),
                index: p.leaf_index,
            });
        }
    }
    let verify_nanos = start.elapsed().as_nanos() as f64;

    let count = proofs.len() as f64;
    let depth_sum: usize = proofs.iter().map(|p| p.depth()).sum();
    Ok(Repetition {
        build_nanos,
        prove_nanos_mean: prove_nanos / count,
        verify_nanos_mean: verify_nanos / count,
        tree_stats: tree.stats().clone(),
        hash_invocations,
        mean_depth: depth_sum as f64 / count,
    })
}

fn median_u64(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2
    }
}

fn median_f64(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

fn run_cell(
    config: &BenchConfig,
    variant: TreeVariant,
    n: usize,
) -> Result<BenchSample, BenchError> {
    let payloads = generate_payloads(config.seed, n, config.payload_bytes);
    let sample = proof_sample_indices(config.seed, n);
    let reps = (0..config.repetitions)
        .map(|_| run_once(variant, config.mode, &payloads, &sample))
        .collect::<Result<Vec<_>, _>>()?;

    let first = &reps[0];
    debug_assert!(reps
        .iter()
        .all(|r| r.tree_stats.total_nodes == first.tree_stats.total_nodes
            && r.hash_invocations == first.hash_invocations));
    let stored_nodes = first.tree_stats.total_nodes;
    Ok(BenchSample {
        variant,
        n,
        build_nanos: median_u64(reps.iter().map(|r| r.build_nanos).collect()),
        prove_nanos_mean: median_f64(reps.iter().map(|r| r.prove_nanos_mean).collect()),
        verify_nanos_mean: median_f64(reps.iter().map(|r| r.verify_nanos_mean).collect()),
        internal_hashes: first.tree_stats.internal_hashes,
        total_hash_invocations: first.hash_invocations,
        stored_nodes,
        stored_bytes: Digest::LEN * stored_nodes,
        mean_proof_depth: first.mean_depth,
    })
}

pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let cells = config.cells();
    let mut samples = if config.parallel {
        // a cell runs start to finish on one worker, so per-thread hash
        // counts stay isolated
        cells
            .par_iter()
            .map(|&(v, n)| run_cell(config, v, n))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        cells
            .iter()
            .map(|&(v, n)| run_cell(config, v, n))
            .collect::<Result<Vec<_>, _>>()?
    };
    samples.sort_by_key(|s| (s.variant, s.n));
    Ok(BenchReport {
        config: config.clone(),
        samples,
        environment: environment_note(config),
    })
}

fn environment_note(config: &BenchConfig) -> String {
    format!(
        "os={} arch={} threads={}; energy proxy: total_hash_invocations counts SHA-256 \
         calls per build (leaf + internal), not joules; payloads: {}; timing columns are \
         medians over {} repetitions and are not reproducible; proofs sampled on at most {} leaves",
        std::env::consts::OS,
        std::env::consts::ARCH,
        if config.parallel {
            rayon::current_num_threads()
        } else {
            1
        },
        PAYLOAD_GENERATOR,
        config.repetitions,
        PROOF_SAMPLE_CAP,
    )
}
