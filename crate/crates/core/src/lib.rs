//! Stable roommates toolkit.
//!
//! - [`instance`] and [`matching`]: instances, perfect matchings, blocking
//!   pairs and stability.
//! - [`brute`]: exhaustive enumeration, the reference oracle for everything else.
//! - [`phase1`]: the proposal/rejection reduction and what its final table proves.
//! - [`solver`]: complete solvability decision on top of Phase 1.
//! - [`embedding`]: set disjointness inputs mapped to roommates instances.
//! - [`protocol`]: two-party simulation of a query-driven solver over an
//!   embedded instance, with one bit of communication per query.
//! - [`experiment`]: seeded protocol runs collected into CSV rows.
//! - [`io`]: text formats for instances and matchings.

pub mod brute;
pub mod embedding;
pub mod experiment;
pub mod gen;
pub mod instance;
pub mod io;
pub mod matching;
pub mod phase1;
pub mod protocol;
pub mod solver;

pub use brute::{brute_force_stable_set, enumerate_perfect_matchings, DEFAULT_CAP};
pub use embedding::{build_embedding, canonical_matching, disj, intersection_count, BitMatrix, PromiseKind};
pub use instance::{AgentId, SrError, SrInstance};
pub use matching::{check_stability, is_blocking_pair, is_stable, BlockingPairReport, Matching, Pair, Stability};
pub use phase1::{classify, run_phase1, OrderPolicy, Phase1Classification, Phase1Outcome, Phase1Result};
pub use solver::{decide_solvability, find_stable_matching, DecisionPath, SolveReport};
