//! The proposal/rejection reduction of Irving's algorithm (Phase 1).
//!
//! Free agents propose to the head of their reduced list. A proposee keeps
//! the new proposer, frees whoever it held before, and deletes every pair
//! formed with agents it ranks below the new proposer. When no free agent
//! has a nonempty list the table is final. The final table does not depend
//! on the proposal order; [`OrderPolicy`] exists so that claim can be
//! exercised.
//!
//! Outcomes are read off the final table:
//! - some list empty: no stable matching exists;
//! - every list a singleton and the singletons pair up: that matching is
//!   the unique stable matching;
//! - anything else is left undecided here (see [`crate::solver`]).

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{AgentId, SrInstance};
use crate::matching::{Matching, Pair};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Phase1Error {
    #[error("pair {0} is not in the preference table")]
    PairAbsent(Pair),
    #[error("agent {0} is not free")]
    NotFree(AgentId),
    #[error("agent {0} has an empty list")]
    EmptyList(AgentId),
}

/// Reduced preference table maintained during Phase 1.
///
/// Each agent's reduced list is the subsequence of its original list whose
/// pairs are still present. `head`/`tail` bracket the live window so that
/// the head lookup and the successor truncation are amortized O(1).
#[derive(Clone, Debug)]
pub struct PreferenceTable<'a> {
    inst: &'a SrInstance,
    present: Vec<bool>,
    head: Vec<usize>,
    tail: Vec<usize>,
    len: Vec<usize>,
    semiengaged_to: Vec<Option<AgentId>>,
    holds_proposal_from: Vec<Option<AgentId>>,
    removals: u64,
}

impl<'a> PreferenceTable<'a> {
    pub fn new(inst: &'a SrInstance) -> Self {
        let m = inst.num_agents();
        let mut present = vec![true; m * m];
        for a in 0..m {
            present[a * m + a] = false;
        }
        PreferenceTable {
            inst,
            present,
            head: vec![0; m],
            tail: vec![m - 1; m],
            len: vec![m - 1; m],
            semiengaged_to: vec![None; m],
            holds_proposal_from: vec![None; m],
            removals: 0,
        }
    }

    pub fn instance(&self) -> &'a SrInstance {
        self.inst
    }

    #[inline]
    fn slot(&self, u: AgentId, v: AgentId) -> usize {
        u.0 * self.inst.num_agents() + v.0
    }

    #[inline]
    pub fn is_present(&self, u: AgentId, v: AgentId) -> bool {
        self.present[self.slot(u, v)]
    }

    /// Deletes `p` from both members' lists.
    pub fn remove_pair(&mut self, p: Pair) -> Result<(), Phase1Error> {
        let (u, v) = (p.first(), p.second());
        if u.0 >= self.inst.num_agents() || v.0 >= self.inst.num_agents() || !self.is_present(u, v) {
            return Err(Phase1Error::PairAbsent(p));
        }
        let (uv, vu) = (self.slot(u, v), self.slot(v, u));
        self.present[uv] = false;
        self.present[vu] = false;
        self.len[u.0] -= 1;
        self.len[v.0] -= 1;
        self.removals += 1;
        self.tighten(u);
        self.tighten(v);
        Ok(())
    }

    fn tighten(&mut self, a: AgentId) {
        let list = self.inst.pref_list(a);
        while self.head[a.0] < self.tail[a.0] && !self.is_present(a, list[self.head[a.0]]) {
            self.head[a.0] += 1;
        }
        while self.tail[a.0] > self.head[a.0] && !self.is_present(a, list[self.tail[a.0] - 1]) {
            self.tail[a.0] -= 1;
        }
    }

    /// Removes `{x', y}` for every `x'` after `x` on `y`'s reduced list.
    fn remove_successors(&mut self, y: AgentId, x: AgentId) {
        let cut = self.inst.rank(y, x) + 1;
        while self.tail[y.0] > cut {
            let last = self.inst.pref_list(y)[self.tail[y.0] - 1];
            if self.is_present(y, last) {
                self.remove_pair(Pair::new(y, last)).expect("present pair");
            } else {
                self.tail[y.0] -= 1;
            }
        }
    }

    /// First agent on `a`'s reduced list.
    pub fn first(&self, a: AgentId) -> Option<AgentId> {
        (self.len[a.0] > 0).then(|| self.inst.pref_list(a)[self.head[a.0]])
    }

    /// Last agent on `a`'s reduced list.
    pub fn last(&self, a: AgentId) -> Option<AgentId> {
        (self.len[a.0] > 0).then(|| self.inst.pref_list(a)[self.tail[a.0] - 1])
    }

    pub fn list_len(&self, a: AgentId) -> usize {
        self.len[a.0]
    }

    pub fn reduced_list(&self, a: AgentId) -> impl Iterator<Item = AgentId> + '_ {
        self.inst.pref_list(a)[self.head[a.0]..self.tail[a.0]].iter().copied().filter(move |&b| self.is_present(a, b))
    }

    /// All pairs still in the table, sorted.
    pub fn present_pairs(&self) -> BTreeSet<Pair> {
        let m = self.inst.num_agents();
        let mut out = BTreeSet::new();
        for u in 0..m {
            for v in u + 1..m {
                if self.present[u * m + v] {
                    out.insert(Pair::new(AgentId(u), AgentId(v)));
                }
            }
        }
        out
    }

    pub fn semiengaged_to(&self, a: AgentId) -> Option<AgentId> {
        self.semiengaged_to[a.0]
    }

    pub fn holds_proposal_from(&self, a: AgentId) -> Option<AgentId> {
        self.holds_proposal_from[a.0]
    }

    pub fn is_free(&self, a: AgentId) -> bool {
        self.semiengaged_to[a.0].is_none()
    }

    pub fn removals(&self) -> u64 {
        self.removals
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Phase1Stats {
    pub proposals: u64,
    pub rejections: u64,
    pub removals: u64,
    /// Boolean queries spent, when the run went through a query oracle.
    pub queries: u64,
}

/// Which free agent proposes next.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum OrderPolicy {
    /// Queue of free agents, initially in id order; rejected agents join the back.
    #[default]
    Fifo,
    /// Stack of free agents; rejected agents propose again immediately.
    Lifo,
    /// Always the lowest-id free agent.
    MinId,
    /// A uniformly random free agent, from a seeded generator.
    Random(u64),
    /// The free agent that appears earliest in the script; unlisted agents
    /// come after all listed ones, by id.
    Scripted(Vec<AgentId>),
}

impl OrderPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            OrderPolicy::Fifo => "fifo",
            OrderPolicy::Lifo => "lifo",
            OrderPolicy::MinId => "minid",
            OrderPolicy::Random(_) => "random",
            OrderPolicy::Scripted(_) => "scripted",
        }
    }
}

pub(crate) enum Scheduler {
    Queue(VecDeque<AgentId>),
    Stack(Vec<AgentId>),
    Ordered { key: Vec<usize>, set: BTreeSet<(usize, AgentId)> },
    Random { rng: Box<ChaCha8Rng>, pool: Vec<AgentId> },
}

impl Scheduler {
    pub(crate) fn new(policy: &OrderPolicy, m: usize) -> Self {
        let all = (0..m).map(AgentId);
        match policy {
            OrderPolicy::Fifo => Scheduler::Queue(all.collect()),
            OrderPolicy::Lifo => Scheduler::Stack(all.rev().collect()),
            OrderPolicy::MinId => Scheduler::Ordered { key: (0..m).collect(), set: all.map(|a| (a.0, a)).collect() },
            OrderPolicy::Scripted(script) => {
                let mut key = vec![usize::MAX; m];
                for (pos, a) in script.iter().enumerate() {
                    if a.0 < m && key[a.0] == usize::MAX {
                        key[a.0] = pos;
                    }
                }
                for (a, k) in key.iter_mut().enumerate() {
                    if *k == usize::MAX {
                        *k = script.len() + a;
                    }
                }
                let set = all.map(|a| (key[a.0], a)).collect();
                Scheduler::Ordered { key, set }
            }
            OrderPolicy::Random(seed) => {
                Scheduler::Random { rng: Box::new(ChaCha8Rng::seed_from_u64(*seed)), pool: all.collect() }
            }
        }
    }

    pub(crate) fn push(&mut self, a: AgentId) {
        match self {
            Scheduler::Queue(q) => q.push_back(a),
            Scheduler::Stack(s) => s.push(a),
            Scheduler::Ordered { key, set } => {
                set.insert((key[a.0], a));
            }
            Scheduler::Random { pool, .. } => pool.push(a),
        }
    }

    pub(crate) fn pop(&mut self) -> Option<AgentId> {
        match self {
            Scheduler::Queue(q) => q.pop_front(),
            Scheduler::Stack(s) => s.pop(),
            Scheduler::Ordered { set, .. } => set.pop_first().map(|(_, a)| a),
            Scheduler::Random { rng, pool } => {
                if pool.is_empty() {
                    None
                } else {
                    let i = rng.gen_range(0..pool.len());
                    Some(pool.swap_remove(i))
                }
            }
        }
    }
}

/// Result of one proposal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Proposal {
    pub proposer: AgentId,
    pub proposee: AgentId,
    /// Agent the proposee let go, now free again.
    pub rejected: Option<AgentId>,
}

/// A Phase 1 execution that can be driven one proposal at a time.
#[derive(Clone, Debug)]
pub struct Phase1Run<'a> {
    table: PreferenceTable<'a>,
    stats: Phase1Stats,
}

impl<'a> Phase1Run<'a> {
    pub fn new(inst: &'a SrInstance) -> Self {
        Phase1Run { table: PreferenceTable::new(inst), stats: Phase1Stats::default() }
    }

    pub fn table(&self) -> &PreferenceTable<'a> {
        &self.table
    }

    pub fn stats(&self) -> Phase1Stats {
        Phase1Stats { removals: self.table.removals, ..self.stats }
    }

    /// `x` proposes to the first agent on its reduced list.
    pub fn propose(&mut self, x: AgentId) -> Result<Proposal, Phase1Error> {
        if !self.table.is_free(x) {
            return Err(Phase1Error::NotFree(x));
        }
        let y = self.table.first(x).ok_or(Phase1Error::EmptyList(x))?;
        let rejected = self.table.holds_proposal_from[y.0].take();
        if let Some(z) = rejected {
            self.table.semiengaged_to[z.0] = None;
            self.stats.rejections += 1;
        }
        self.table.semiengaged_to[x.0] = Some(y);
        self.table.holds_proposal_from[y.0] = Some(x);
        self.table.remove_successors(y, x);
        self.stats.proposals += 1;
        Ok(Proposal { proposer: x, proposee: y, rejected })
    }

    /// Free agents with a nonempty list, in id order.
    pub fn active_agents(&self) -> Vec<AgentId> {
        self.table.inst.agents().filter(|&a| self.table.is_free(a) && self.table.list_len(a) > 0).collect()
    }

    /// Runs proposals under `policy` until no free agent has a nonempty list.
    pub fn run_to_completion(&mut self, policy: &OrderPolicy) {
        let mut sched = Scheduler::new(policy, self.table.inst.num_agents());
        while let Some(x) = sched.pop() {
            // Lists never grow, so an agent skipped here stays inactive.
            if !self.table.is_free(x) || self.table.list_len(x) == 0 {
                continue;
            }
            let prop = self.propose(x).expect("active agent can propose");
            if let Some(z) = prop.rejected {
                sched.push(z);
            }
        }
    }

    pub fn finish(self) -> Phase1Result<'a> {
        debug_assert!(self.active_agents().is_empty(), "finish called before completion");
        let stats = self.stats();
        // At termination every free agent has an empty list.
        let outcome = match self.table.inst.agents().find(|&a| self.table.is_free(a)) {
            Some(a) => Phase1Outcome::EmptyList(a),
            None => Phase1Outcome::AllSemiengaged,
        };
        Phase1Result { table: self.table, outcome, stats }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase1Outcome {
    /// Lowest-id free agent left with an empty list.
    EmptyList(AgentId),
    AllSemiengaged,
}

#[derive(Clone, Debug)]
pub struct Phase1Result<'a> {
    pub table: PreferenceTable<'a>,
    pub outcome: Phase1Outcome,
    pub stats: Phase1Stats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Phase1Classification {
    /// `agent`'s reduced list is empty.
    Unsolvable {
        agent: AgentId,
    },
    UniqueStable(Matching),
    Inconclusive,
}

impl<'a> Phase1Result<'a> {
    pub fn classify(&self) -> Phase1Classification {
        classify(self)
    }
}

/// Executes Phase 1 on `inst` with the given proposal order.
pub fn run_phase1<'a>(inst: &'a SrInstance, policy: &OrderPolicy) -> Phase1Result<'a> {
    let mut run = Phase1Run::new(inst);
    run.run_to_completion(policy);
    run.finish()
}

/// Reads the verdict that the final table licenses, if any.
pub fn classify(result: &Phase1Result<'_>) -> Phase1Classification {
    let t = &result.table;
    let inst = t.instance();
    if let Some(agent) = inst.agents().find(|&a| t.list_len(a) == 0) {
        return Phase1Classification::Unsolvable { agent };
    }
    if inst.agents().all(|a| t.list_len(a) == 1) {
        let partners: Vec<AgentId> = inst.agents().map(|a| t.first(a).expect("singleton")).collect();
        if let Ok(m) = Matching::from_partners(partners) {
            return Phase1Classification::UniqueStable(m);
        }
    }
    Phase1Classification::Inconclusive
}
