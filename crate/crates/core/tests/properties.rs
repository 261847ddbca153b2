//! Randomized properties of instances, stability, Phase 1 and the solver,
//! checked against the brute-force enumeration.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roommates::gen::random_instance;
use roommates::io::{parse_instance, write_instance};
use roommates::phase1::{Phase1Run, Phase1Stats};
use roommates::{
    brute_force_stable_set, check_stability, decide_solvability, enumerate_perfect_matchings, is_blocking_pair,
    is_stable, run_phase1, AgentId, Matching, OrderPolicy, Pair, Phase1Classification, SrInstance, Stability,
    DEFAULT_CAP,
};

fn instance(max_pairs: usize) -> impl Strategy<Value = SrInstance> {
    (1..=max_pairs, any::<u64>()).prop_map(|(k, seed)| random_instance(2 * k, &mut ChaCha8Rng::seed_from_u64(seed)))
}

/// Blocking test straight from the definition, using list positions only.
fn blocks_naive(inst: &SrInstance, m: &Matching, u: AgentId, v: AgentId) -> bool {
    let pos = |a: AgentId, b: AgentId| inst.pref_list(a).iter().position(|&c| c == b).unwrap();
    m.partner(u) != v && pos(u, v) < pos(u, m.partner(u)) && pos(v, u) < pos(v, m.partner(v))
}

fn policies(seed: u64) -> Vec<OrderPolicy> {
    let mut v = vec![OrderPolicy::Fifo, OrderPolicy::Lifo, OrderPolicy::MinId];
    v.extend((0..17).map(|k| OrderPolicy::Random(seed.wrapping_mul(31).wrapping_add(k))));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rank_matches_list_position(inst in instance(8)) {
        for a in inst.agents() {
            let list = inst.pref_list(a);
            prop_assert_eq!(list.len(), inst.num_agents() - 1);
            for (k, &b) in list.iter().enumerate() {
                prop_assert_eq!(inst.rank(a, b), k);
            }
            for w in list.windows(2) {
                prop_assert!(inst.prefers(a, w[0], w[1]).unwrap());
                prop_assert!(!inst.prefers(a, w[1], w[0]).unwrap());
            }
        }
    }

    #[test]
    fn text_format_round_trips(inst in instance(8)) {
        prop_assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn blocking_is_symmetric_and_matches_definition(inst in instance(4), pick in any::<prop::sample::Index>()) {
        let all: Vec<Matching> = enumerate_perfect_matchings(inst.num_agents(), DEFAULT_CAP).unwrap().collect();
        let m = pick.get(&all);
        for u in inst.agents() {
            for v in inst.agents().filter(|&v| v > u && m.partner(u) != v) {
                let p = Pair::new(u, v);
                let q = Pair::new(v, u);
                let b = is_blocking_pair(&inst, m, p).unwrap();
                prop_assert_eq!(b, is_blocking_pair(&inst, m, q).unwrap());
                prop_assert_eq!(b, blocks_naive(&inst, m, u, v));
            }
        }
    }

    #[test]
    fn order_independence(inst in instance(6), seed in any::<u64>()) {
        let reference = run_phase1(&inst, &OrderPolicy::Fifo);
        let pairs = reference.table.present_pairs();
        for policy in policies(seed) {
            let r = run_phase1(&inst, &policy);
            prop_assert_eq!(r.table.present_pairs(), pairs.clone(), "{:?}", policy);
            prop_assert_eq!(r.classify(), reference.classify());
        }
    }

    #[test]
    fn table_shrinks_monotonically_and_terminates(inst in instance(6), seed in any::<u64>()) {
        let m = inst.num_agents();
        let mut run = Phase1Run::new(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut prev = run.table().present_pairs();
        let mut steps = 0usize;
        loop {
            let active = run.active_agents();
            if active.is_empty() {
                break;
            }
            let x = active[rand::Rng::gen_range(&mut rng, 0..active.len())];
            run.propose(x).unwrap();
            let now = run.table().present_pairs();
            prop_assert!(now.is_subset(&prev));
            for a in inst.agents() {
                // Reduced lists keep the original relative order.
                let ranks: Vec<usize> = run.table().reduced_list(a).map(|b| inst.rank(a, b)).collect();
                prop_assert!(ranks.windows(2).all(|w| w[0] < w[1]));
            }
            prev = now;
            steps += 1;
            prop_assert!(steps <= m * (m - 1));
        }
        let s: Phase1Stats = run.stats();
        prop_assert_eq!(s.proposals as usize, steps);
        let removed = m * (m - 1) / 2 - prev.len();
        prop_assert_eq!(s.removals as usize, removed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn stability_matches_oracle(inst in instance(4)) {
        for m in enumerate_perfect_matchings(inst.num_agents(), DEFAULT_CAP).unwrap() {
            let naive_first = inst.agents().flat_map(|u| inst.agents().map(move |v| (u, v)))
                .find(|&(u, v)| u < v && blocks_naive(&inst, &m, u, v));
            match check_stability(&inst, &m).unwrap() {
                Stability::Stable => prop_assert!(naive_first.is_none()),
                Stability::Unstable(w) => {
                    let (u, v) = naive_first.expect("oracle finds a blocking pair");
                    prop_assert_eq!(w.pair, Pair::new(u, v));
                    prop_assert_eq!(w.partner_of_first, m.partner(u));
                    prop_assert_eq!(w.partner_of_second, m.partner(v));
                }
            }
        }
    }

    #[test]
    fn removed_pairs_are_in_no_stable_matching(inst in instance(5)) {
        let r = run_phase1(&inst, &OrderPolicy::Fifo);
        let present = r.table.present_pairs();
        for m in brute_force_stable_set(&inst, DEFAULT_CAP).unwrap() {
            for p in m.pairs() {
                prop_assert!(present.contains(&p), "stable pair {:?} was removed", p);
            }
        }
    }

    #[test]
    fn solver_agrees_with_oracle(inst in instance(6)) {
        let stable = brute_force_stable_set(&inst, DEFAULT_CAP).unwrap();
        let r = decide_solvability(&inst).unwrap();
        prop_assert_eq!(r.solvable, !stable.is_empty());
        if let Some(w) = &r.witness {
            prop_assert!(is_stable(&inst, w).unwrap());
            prop_assert!(stable.contains(w));
        }
    }

    #[test]
    fn phase1_verdicts_are_sound(inst in instance(5)) {
        let r = run_phase1(&inst, &OrderPolicy::Fifo);
        let stable = brute_force_stable_set(&inst, DEFAULT_CAP).unwrap();
        match r.classify() {
            Phase1Classification::Unsolvable { agent } => {
                prop_assert_eq!(r.table.list_len(agent), 0);
                prop_assert!(stable.is_empty());
            }
            Phase1Classification::UniqueStable(m) => prop_assert_eq!(stable, vec![m]),
            Phase1Classification::Inconclusive => {}
        }
    }

    #[test]
    fn solver_witness_uses_table_pairs(inst in instance(6)) {
        let present = run_phase1(&inst, &OrderPolicy::Fifo).table.present_pairs();
        if let Some(w) = decide_solvability(&inst).unwrap().witness {
            let pairs: BTreeSet<Pair> = w.pairs().collect();
            prop_assert!(pairs.is_subset(&present));
        }
    }
}

#[test]
fn two_agents_everywhere() {
    let inst = SrInstance::new(vec![vec![1], vec![0]]).unwrap();
    let m = Matching::from_pairs(2, [(AgentId(0), AgentId(1))]).unwrap();
    assert!(is_stable(&inst, &m).unwrap());
    assert!(is_blocking_pair(&inst, &m, Pair::new(AgentId(0), AgentId(1))).is_err());
    assert_eq!(brute_force_stable_set(&inst, DEFAULT_CAP).unwrap(), vec![m.clone()]);
    assert_eq!(run_phase1(&inst, &OrderPolicy::Fifo).classify(), Phase1Classification::UniqueStable(m));
}
