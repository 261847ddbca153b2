//! The disjointness embedding against brute force.

mod common;

use common::cells;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roommates::embedding::{agent, build_embedding_with_tiebreak, sample_promise_input, BitMatrix, Block, PromiseKind};
use roommates::{
    brute_force_stable_set, build_embedding, canonical_matching, decide_solvability, disj, intersection_count, AgentId,
    Matching, SrInstance, DEFAULT_CAP,
};

/// Which rows of the instance differ.
fn changed_rows(p: &SrInstance, q: &SrInstance) -> Vec<AgentId> {
    p.agents().filter(|&a| p.pref_list(a) != q.pref_list(a)).collect()
}

/// Solvability of a uniquely intersecting input under the id tie-break:
/// some `j < l` has `y[k][j] = 1`, where `(k, l)` is the common cell.
fn intersecting_solvable(x: &BitMatrix, y: &BitMatrix) -> bool {
    let n = x.n();
    let (k, l) = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| x.get(i, j) && y.get(i, j))
        .expect("one common cell");
    (0..l).any(|j| y.get(k, j))
}

fn promise_pairs(n: usize) -> Vec<(BitMatrix, BitMatrix)> {
    let all: Vec<BitMatrix> = BitMatrix::all(n).collect();
    let mut out = Vec::new();
    for x in &all {
        for y in &all {
            if intersection_count(x, y).unwrap() <= 1 {
                out.push((x.clone(), y.clone()));
            }
        }
    }
    out
}

#[test]
fn flipping_a_bit_touches_one_row() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=4 {
        for _ in 0..10 {
            let (x, y) = sample_promise_input(n, PromiseKind::Disjoint, 0.4, rand::Rng::gen(&mut rng));
            let base = build_embedding(&x, &y).unwrap().instance;
            for i in 0..n {
                for j in 0..n {
                    let mut x2 = x.clone();
                    x2.flip(i, j);
                    let other = build_embedding(&x2, &y).unwrap().instance;
                    assert_eq!(changed_rows(&base, &other), vec![agent(Block::A, i, n)]);

                    let mut y2 = y.clone();
                    y2.flip(i, j);
                    let other = build_embedding(&x, &y2).unwrap().instance;
                    assert_eq!(changed_rows(&base, &other), vec![agent(Block::B, j, n)]);
                }
            }
        }
    }
}

#[test]
fn disjoint_inputs_have_only_the_canonical_matching_n2() {
    let mut count = 0;
    for (x, y) in promise_pairs(2) {
        if !disj(&x, &y).unwrap() {
            continue;
        }
        count += 1;
        let inst = build_embedding(&x, &y).unwrap().instance;
        assert_eq!(brute_force_stable_set(&inst, DEFAULT_CAP).unwrap(), vec![canonical_matching(2)]);
    }
    assert_eq!(count, 81);
}

#[test]
fn disjoint_inputs_have_only_the_canonical_matching_n3_sampled() {
    for seed in 0..12 {
        let (x, y) = sample_promise_input(3, PromiseKind::Disjoint, 0.4, seed);
        let inst = build_embedding(&x, &y).unwrap().instance;
        assert_eq!(brute_force_stable_set(&inst, DEFAULT_CAP).unwrap(), vec![canonical_matching(3)], "seed {seed}");
    }
}

#[test]
fn smallest_solvable_intersecting_input() {
    // Common cell (1,2); y also has (1,1), which c_1 ranks above b_2.
    let x = cells(2, &[(1, 2)]);
    let y = cells(2, &[(1, 1), (1, 2), (2, 2)]);
    assert_eq!(intersection_count(&x, &y).unwrap(), 1);
    let inst = build_embedding(&x, &y).unwrap().instance;
    let id = |s| inst.agent_by_name(s).unwrap();
    let expected = Matching::from_pairs(
        8,
        [(id("a1"), id("b2")), (id("a2"), id("c2")), (id("b1"), id("c1")), (id("d1"), id("d2"))],
    )
    .unwrap();
    assert_eq!(brute_force_stable_set(&inst, DEFAULT_CAP).unwrap(), vec![expected]);
    assert!(decide_solvability(&inst).unwrap().solvable);
}

#[test]
fn intersecting_solvability_is_characterized_n2() {
    let mut intersecting = 0;
    let mut solvable = 0;
    for (x, y) in promise_pairs(2) {
        if disj(&x, &y).unwrap() {
            continue;
        }
        intersecting += 1;
        let inst = build_embedding(&x, &y).unwrap().instance;
        let brute = !brute_force_stable_set(&inst, DEFAULT_CAP).unwrap().is_empty();
        assert_eq!(brute, intersecting_solvable(&x, &y), "x={x:?} y={y:?}");
        assert_eq!(decide_solvability(&inst).unwrap().solvable, brute);
        solvable += usize::from(brute);
    }
    assert_eq!(intersecting, 108);
    assert_eq!(solvable, 18);
}

#[test]
fn intersecting_solvability_is_characterized_n3_sampled() {
    let mut solvable = 0;
    for seed in 0..40 {
        let (x, y) = sample_promise_input(3, PromiseKind::UniquelyIntersecting, 0.5, seed);
        let inst = build_embedding(&x, &y).unwrap().instance;
        let brute = !brute_force_stable_set(&inst, DEFAULT_CAP).unwrap().is_empty();
        assert_eq!(brute, intersecting_solvable(&x, &y), "seed {seed}");
        solvable += usize::from(brute);
    }
    assert!(solvable > 0);
}

#[test]
fn intersecting_verdict_depends_on_the_tie_break() {
    let x = cells(2, &[(1, 2)]);
    let y = cells(2, &[(1, 1), (1, 2), (2, 2)]);
    let verdicts: std::collections::BTreeSet<bool> = (0..64)
        .map(|s| {
            let inst = build_embedding_with_tiebreak(&x, &y, &mut ChaCha8Rng::seed_from_u64(s)).unwrap().instance;
            decide_solvability(&inst).unwrap().solvable
        })
        .collect();
    assert_eq!(verdicts.len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disjoint_verdict_ignores_the_tie_break(seed in any::<u64>(), tb in any::<u64>(), n in 1usize..=3) {
        let (x, y) = sample_promise_input(n, PromiseKind::Disjoint, 0.4, seed);
        let inst = build_embedding_with_tiebreak(&x, &y, &mut ChaCha8Rng::seed_from_u64(tb)).unwrap().instance;
        let r = decide_solvability(&inst).unwrap();
        prop_assert!(r.solvable);
        prop_assert_eq!(r.witness, Some(canonical_matching(n)));
        if n <= 2 {
            prop_assert_eq!(brute_force_stable_set(&inst, DEFAULT_CAP).unwrap(), vec![canonical_matching(n)]);
        }
    }
}
