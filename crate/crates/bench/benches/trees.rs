use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use trimtree_bench::generate_payloads;
use trimtree_core::{
    generate_proof, hash_leaf, verify_proof, Digest, HashMode, MerkleTree, TreeVariant,
};

const SEED: u64 = 0x5eed;
const MODE: HashMode = HashMode::DomainSeparated;

fn leaves(n: usize) -> Vec<Digest> {
    generate_payloads(SEED, n, 256)
        .iter()
        .map(|p| hash_leaf(p, MODE))
        .collect()
}

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    for n in [5usize, 1023, 1024, 1025, 10_001] {
        let leaves = leaves(n);
        group.throughput(Throughput::Elements(n as u64));
        for variant in TreeVariant::ALL {
            group.bench_with_input(
                BenchmarkId::new(variant.as_str(), n),
                &leaves,
                |b, leaves| b.iter(|| MerkleTree::build(variant, black_box(leaves), MODE).unwrap()),
            );
        }
    }
    group.finish();
}

fn prove_and_verify(c: &mut Criterion) {
    let mut group = c.benchmark_group("prove_verify");
    for n in [1025usize, 10_001] {
        let leaves = leaves(n);
        for variant in TreeVariant::ALL {
            let tree = MerkleTree::build(variant, &leaves, MODE).unwrap();
            let root = tree.root();
            group.bench_function(BenchmarkId::new(variant.as_str(), n), |b| {
                b.iter(|| {
                    let p = generate_proof(&tree, black_box(n / 3)).unwrap();
                    verify_proof(&p, &root).valid
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, build, prove_and_verify);
criterion_main!(benches);
