//! Two-party simulation: routing, accounting and knowledge separation.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roommates::embedding::{sample_promise_input, BitMatrix, Block, PromiseKind, Role};
use roommates::protocol::{
    simulate, BatchPartition, DirectOracle, Party, PartyKnowledge, QueryAlgorithm, QueryOracle, ReferenceSolver,
    ReplayOracle, TwoPartyOracle,
};
use roommates::{build_embedding, decide_solvability};

/// `count` seeded promise inputs with `n` in `2..=5`, alternating kinds.
fn inputs(count: usize, seed: u64) -> Vec<(BitMatrix, BitMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let kind = if k % 2 == 0 { PromiseKind::Disjoint } else { PromiseKind::UniquelyIntersecting };
            sample_promise_input(rng.gen_range(2..=5), kind, 0.35, rng.gen())
        })
        .collect()
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> BitMatrix {
    BitMatrix::from_bits(n, (0..n * n).map(|_| rng.gen_bool(0.5)).collect())
}

#[test]
fn knowledge_separation_and_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (x, y) in inputs(120, 1) {
        let n = x.n();
        let partition = BatchPartition::default_for(n);
        let mut solver = ReferenceSolver::new();
        let t = simulate(&mut solver, &x, &y, &partition).unwrap();
        assert_eq!(t.bits_exchanged, t.records.len() as u64);
        assert_eq!(t.bits_exchanged, solver.tally().total());

        // Each party's bits depend on its own input only.
        let alice = PartyKnowledge::alice(&x);
        let bob = PartyKnowledge::bob(&y);
        let mut other_y = TwoPartyOracle::new(&x, &random_matrix(n, &mut rng), partition.clone()).unwrap();
        let mut other_x = TwoPartyOracle::new(&random_matrix(n, &mut rng), &y, partition.clone()).unwrap();
        for r in &t.records {
            let block = Role::of(n, r.query.kind.subject()).block;
            match r.responder {
                Party::Alice => {
                    assert_ne!(block, Block::B);
                    assert_eq!(alice.answer(&r.query.kind).unwrap(), r.bit);
                    assert_eq!(other_y.ask(r.query).unwrap(), r.bit);
                }
                Party::Bob => {
                    assert_eq!(block, Block::B);
                    assert_eq!(bob.answer(&r.query.kind).unwrap(), r.bit);
                    assert_eq!(other_x.ask(r.query).unwrap(), r.bit);
                }
            }
        }

        // The transcript alone determines the output.
        let mut replay = ReplayOracle::new(&partition, &t.records);
        let again = ReferenceSolver::new().decide(&mut replay).unwrap();
        assert_eq!(again, t.answer);
        assert_eq!(replay.consumed(), t.records.len());
    }
}

#[test]
fn simulation_matches_the_full_instance() {
    for (x, y) in inputs(60, 2) {
        let inst = build_embedding(&x, &y).unwrap().instance;
        let partition = BatchPartition::default_for(x.n());
        let t = simulate(&mut ReferenceSolver::new(), &x, &y, &partition).unwrap();

        let mut direct = DirectOracle::with_partition(&inst, partition.clone());
        let mut solver = ReferenceSolver::new();
        assert_eq!(solver.decide(&mut direct).unwrap(), t.answer);
        assert_eq!(direct.queries, t.bits_exchanged);
        assert_eq!(t.answer, decide_solvability(&inst).unwrap().solvable);
    }
}

#[test]
fn disjoint_inputs_are_accepted_by_the_protocol() {
    for seed in 0..50 {
        let (x, y) = sample_promise_input(2 + (seed as usize % 5), PromiseKind::Disjoint, 0.3, seed);
        let t = simulate(&mut ReferenceSolver::new(), &x, &y, &BatchPartition::default_for(x.n())).unwrap();
        assert!(t.answer, "seed {seed}");
    }
}

#[test]
fn reference_solver_matches_direct_solver_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let inst = roommates::gen::random_instance_up_to(10, &mut rng);
        let mut oracle = DirectOracle::new(&inst);
        let mut solver = ReferenceSolver::new();
        let answer = solver.decide(&mut oracle).unwrap();
        let report = decide_solvability(&inst).unwrap();
        assert_eq!(answer, report.solvable);
        assert_eq!(solver.path(), Some(report.path));
        assert_eq!(oracle.partition().num_agents(), inst.num_agents());
    }
}
