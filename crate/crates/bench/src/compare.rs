use std::fmt::Write as _;

use serde::Serialize;
use trimtree_core::{structural_counts, HashMode, TreeVariant};

use crate::BenchError;

/// Structural comparison at one leaf count. Deltas are traditional minus trim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub trim_nodes: usize,
    pub traditional_nodes: usize,
    pub node_delta: usize,
    pub trim_internal_hashes: usize,
    pub traditional_internal_hashes: usize,
    pub hash_delta: usize,
    pub traditional_duplicated_pairings: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonTable {
    pub mode: HashMode,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>8} {:>10} {:>12} {:>10} {:>11} {:>13} {:>10} {:>12}",
            "n",
            "trim_nodes",
            "trad_nodes",
            "node_delta",
            "trim_hashes",
            "trad_hashes",
            "hash_delta",
            "trad_dups"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>8} {:>10} {:>12} {:>10} {:>11} {:>13} {:>10} {:>12}",
                r.n,
                r.trim_nodes,
                r.traditional_nodes,
                r.node_delta,
                r.trim_internal_hashes,
                r.traditional_internal_hashes,
                r.hash_delta,
                r.traditional_duplicated_pairings
            );
        }
        out
    }
}

/// Node and hash counts for both variants at every `n` in `from..=to`.
/// Counts do not depend on the hash mode; it is carried for labelling.
pub fn compare_variants(
    from: usize,
    to: usize,
    mode: HashMode,
) -> Result<ComparisonTable, BenchError> {
    if from == 0 || from > to {
        return Err(BenchError::InvalidRange { from, to });
    }
    let rows = (from..=to)
        .map(|n| {
            let trim = structural_counts(n, TreeVariant::Trim)?;
            let trad = structural_counts(n, TreeVariant::Traditional)?;
            Ok(ComparisonRow {
                n,
                trim_nodes: trim.total_nodes,
                traditional_nodes: trad.total_nodes,
                node_delta: trad.total_nodes - trim.total_nodes,
                trim_internal_hashes: trim.internal_hashes,
                traditional_internal_hashes: trad.internal_hashes,
                hash_delta: trad.internal_hashes - trim.internal_hashes,
                traditional_duplicated_pairings: trad.duplicated_pairings,
            })
        })
        .collect::<Result<Vec<_>, BenchError>>()?;
    Ok(ComparisonTable { mode, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rows() {
        let t = compare_variants(1, 8, HashMode::DomainSeparated).unwrap();
        assert_eq!(t.rows.len(), 8);
        for r in &t.rows {
            assert_eq!(r.node_delta == 0, r.n.is_power_of_two(), "n={}", r.n);
        }
        let r3 = &t.rows[2];
        assert_eq!(r3.trim_nodes, 5);
        assert_eq!(r3.traditional_duplicated_pairings, 1);
        assert_eq!(r3.traditional_internal_hashes, 3);
        let r4 = &t.rows[3];
        assert_eq!(
            (
                r4.trim_internal_hashes,
                r4.traditional_internal_hashes,
                r4.hash_delta
            ),
            (3, 3, 0)
        );
        let r5 = &t.rows[4];
        assert_eq!(
            (r5.trim_internal_hashes, r5.traditional_internal_hashes),
            (4, 6)
        );
    }

    #[test]
    fn bad_ranges() {
        assert!(matches!(
            compare_variants(0, 3, HashMode::PlainConcat),
            Err(BenchError::InvalidRange { .. })
        ));
        assert!(compare_variants(5, 4, HashMode::PlainConcat).is_err());
        assert_eq!(
            compare_variants(4, 4, HashMode::PlainConcat)
                .unwrap()
                .rows
                .len(),
            1
        );
    }

    #[test]
    fn render_has_header_and_rows() {
        let text = compare_variants(1, 3, HashMode::PlainConcat)
            .unwrap()
            .render();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().next().unwrap().contains("trim_nodes"));
    }
}
