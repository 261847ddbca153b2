#![allow(dead_code)]

use std::collections::BTreeSet;

use roommates::embedding::BitMatrix;
use roommates::{Pair, SrInstance};

/// Matrix from 1-based cells.
pub fn cells(n: usize, ones: &[(usize, usize)]) -> BitMatrix {
    BitMatrix::from_cells(n, &ones.iter().map(|&(i, j)| (i - 1, j - 1)).collect::<Vec<_>>())
}

pub fn disjoint3() -> (BitMatrix, BitMatrix) {
    (cells(3, &[(1, 1), (1, 2), (3, 2)]), cells(3, &[(2, 2), (3, 3)]))
}

pub fn crossing3() -> (BitMatrix, BitMatrix) {
    (cells(3, &[(1, 1), (2, 2), (3, 2)]), cells(3, &[(2, 2), (3, 3)]))
}

/// The directed-triangle instance; `d`'s list is fixed to `a b c`.
pub fn triangle() -> SrInstance {
    SrInstance::from_named_rows(
        &["a", "b", "c", "d"],
        &[
            ("a", vec!["b", "c", "d"]),
            ("b", vec!["c", "a", "d"]),
            ("c", vec!["a", "b", "d"]),
            ("d", vec!["a", "b", "c"]),
        ],
    )
    .unwrap()
}

/// Pairs given by agent names, e.g. `"a1b2"` or `"a b"`.
pub fn named_pairs(inst: &SrInstance, spec: &[(&str, &str)]) -> BTreeSet<Pair> {
    spec.iter()
        .map(|&(u, v)| {
            let id = |s: &str| inst.agent_by_name(s).unwrap_or_else(|| panic!("no agent {s}"));
            Pair::new(id(u), id(v))
        })
        .collect()
}

pub fn rows(inst: &SrInstance) -> Vec<Vec<usize>> {
    inst.agents().map(|a| inst.pref_list(a).iter().map(|b| b.index()).collect()).collect()
}

pub fn double_factorial(k: usize) -> usize {
    (1..=k).rev().step_by(2).product()
}
