mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trimtree_core::{
    build_traditional, build_trim, hash_leaf, Digest, HashMode, MerkleTree, TreeVariant,
};

fn random_leaves(rng: &mut ChaCha8Rng, n: usize) -> Vec<Digest> {
    (0..n)
        .map(|_| {
            let mut d = [0u8; 32];
            rng.fill_bytes(&mut d);
            Digest(d)
        })
        .collect()
}

fn raw(leaves: &[Digest]) -> Vec<common::Raw> {
    leaves.iter().map(|d| d.0).collect()
}

#[test]
fn oracle_agrees_with_hand_computed_golden_root() {
    let leaves: Vec<_> = (1..=5)
        .map(|i| common::leaf(format!("t{i}").as_bytes(), false))
        .collect();
    assert_eq!(
        hex::encode(common::trim_root(&leaves, false)),
        "752821240785a10ff69866c51c9a6127818248942981c5e8c703e26467119712"
    );
    assert_eq!(
        hex::encode(common::traditional_root(&leaves, false)),
        "33d6017410a573a22936000d1a87c7407127e036dcd7762ea42078b856bac483"
    );
}

#[test]
fn trim_node_count_is_two_n_minus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=4096 {
        let leaves = random_leaves(&mut rng, n);
        let t = build_trim(&leaves, HashMode::DomainSeparated).unwrap();
        assert_eq!(t.stats().total_nodes, 2 * n - 1, "n={n}");
        assert_eq!(t.stats().internal_hashes, n - 1, "n={n}");
        assert_eq!(t.stats().duplicated_pairings, 0, "n={n}");
    }
}

#[test]
fn traditional_hashes_at_least_n_minus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 1..=4096usize {
        let leaves = random_leaves(&mut rng, n);
        let t = build_traditional(&leaves, HashMode::PlainConcat).unwrap();
        let h = t.stats().internal_hashes;
        if n.is_power_of_two() {
            assert_eq!(h, n - 1, "n={n}");
        } else {
            assert!(h > n - 1, "n={n}");
        }
    }
}

#[test]
fn power_of_two_roots_coincide() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..=12 {
        let n = 1usize << k;
        let leaves = random_leaves(&mut rng, n);
        for mode in [HashMode::PlainConcat, HashMode::DomainSeparated] {
            let trim = build_trim(&leaves, mode).unwrap();
            let trad = build_traditional(&leaves, mode).unwrap();
            assert_eq!(trim.root(), trad.root(), "n={n}");
        }
    }
}

#[test]
fn oracle_equivalence_up_to_64() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 1..=64 {
        let leaves = random_leaves(&mut rng, n);
        for (mode, domsep) in [
            (HashMode::PlainConcat, false),
            (HashMode::DomainSeparated, true),
        ] {
            let trim = build_trim(&leaves, mode).unwrap();
            let trad = build_traditional(&leaves, mode).unwrap();
            assert_eq!(
                trim.root().0,
                common::trim_root(&raw(&leaves), domsep),
                "trim n={n}"
            );
            assert_eq!(
                trad.root().0,
                common::traditional_root(&raw(&leaves), domsep),
                "traditional n={n}"
            );
        }
    }
}

#[test]
fn variants_differ_for_five_payloads() {
    for mode in [HashMode::PlainConcat, HashMode::DomainSeparated] {
        let leaves: Vec<_> = (1..=5)
            .map(|i| hash_leaf(format!("t{i}").as_bytes(), mode))
            .collect();
        assert_ne!(
            build_trim(&leaves, mode).unwrap().root(),
            build_traditional(&leaves, mode).unwrap().root()
        );
    }
}

#[test]
fn leaf_order_changes_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut equalities = 0;
    for trial in 0..1000 {
        let n = 2 + (trial % 40);
        let leaves = random_leaves(&mut rng, n);
        let mut shuffled = leaves.clone();
        while shuffled == leaves {
            shuffled.shuffle(&mut rng);
        }
        for variant in TreeVariant::ALL {
            let a = MerkleTree::build(variant, &leaves, HashMode::DomainSeparated).unwrap();
            let b = MerkleTree::build(variant, &shuffled, HashMode::DomainSeparated).unwrap();
            if a.root() == b.root() {
                equalities += 1;
            }
        }
    }
    assert_eq!(equalities, 0);
}

#[test]
fn every_leaf_reaches_the_single_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 1..=200 {
        let leaves = random_leaves(&mut rng, n);
        for variant in TreeVariant::ALL {
            let t = MerkleTree::build(variant, &leaves, HashMode::PlainConcat).unwrap();
            let roots = t
                .nodes()
                .iter()
                .filter(|node| node.parent.is_none())
                .count();
            assert_eq!(roots, 1);
            let root = t.node(t.root_id());
            assert!(root.side.is_none());
            for i in 0..n {
                assert!(t.depth_of(i).is_ok());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn builds_are_deterministic(
        payloads in prop::collection::vec(prop::collection::vec(any::<u8>(), 0..64), 1..80),
        domsep in any::<bool>(),
    ) {
        let mode = if domsep { HashMode::DomainSeparated } else { HashMode::PlainConcat };
        let leaves: Vec<Digest> = payloads.iter().map(|p| hash_leaf(p, mode)).collect();
        for variant in TreeVariant::ALL {
            let a = MerkleTree::build(variant, &leaves, mode).unwrap();
            let b = MerkleTree::build(variant, &leaves, mode).unwrap();
            prop_assert_eq!(a.root(), b.root());
            prop_assert_eq!(a.root(), a.root());
        }
    }

    #[test]
    fn trim_children_are_distinct_nodes(n in 1usize..600) {
        let leaves: Vec<Digest> = (0..n).map(|i| hash_leaf(&i.to_le_bytes(), HashMode::PlainConcat)).collect();
        let t = build_trim(&leaves, HashMode::PlainConcat).unwrap();
        for node in t.nodes() {
            if let Some((l, r)) = node.children {
                prop_assert_ne!(l, r);
            }
        }
    }
}
