//! Brute-force reference roots, computed with SHA-256 directly and plain
//! lists of digests. Shares no code with the library's tree builders.

#![allow(dead_code)]

use sha2::{Digest as _, Sha256};

pub type Raw = [u8; 32];

pub fn node(left: &Raw, right: &Raw, domsep: bool) -> Raw {
    let mut pre = Vec::with_capacity(65);
    if domsep {
        pre.push(1u8);
    }
    pre.extend_from_slice(left);
    pre.extend_from_slice(right);
    Sha256::digest(&pre).into()
}

pub fn leaf(payload: &[u8], domsep: bool) -> Raw {
    let mut pre = Vec::with_capacity(payload.len() + 1);
    if domsep {
        pre.push(0u8);
    }
    pre.extend_from_slice(payload);
    Sha256::digest(&pre).into()
}

/// Duplicate-last-node fold.
pub fn traditional_root(leaves: &[Raw], domsep: bool) -> Raw {
    let mut level = leaves.to_vec();
    while level.len() > 1 {
        if level.len() % 2 == 1 {
            let last = *level.last().unwrap();
            level.push(last);
        }
        let mut next = Vec::new();
        let mut i = 0;
        while i < level.len() {
            next.push(node(&level[i], &level[i + 1], domsep));
            i += 2;
        }
        level = next;
    }
    level[0]
}

/// Set-aside fold: an odd level either parks its head or takes the parked
/// digest back as a new head, then pairs everything.
pub fn trim_root(leaves: &[Raw], domsep: bool) -> Raw {
    let mut level = leaves.to_vec();
    let mut parked: Option<Raw> = None;
    loop {
        if level.len() == 1 {
            return match parked {
                Some(p) => node(&p, &level[0], domsep),
                None => level[0],
            };
        }
        if level.len() % 2 == 1 {
            match parked.take() {
                Some(p) => level.insert(0, p),
                None => parked = Some(level.remove(0)),
            }
        }
        let mut next = Vec::new();
        for i in (0..level.len()).step_by(2) {
            next.push(node(&level[i], &level[i + 1], domsep));
        }
        level = next;
    }
}
