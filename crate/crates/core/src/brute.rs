//! Exhaustive enumeration of perfect matchings, used as the reference oracle.

use crate::instance::{AgentId, SrError, SrInstance};
use crate::matching::{is_stable, Matching};

/// Largest agent count enumerated unless the caller raises it.
/// 16 agents give 15!! = 2,027,025 matchings.
pub const DEFAULT_CAP: usize = 16;

/// Iterator over all perfect matchings of `0..num_agents`.
///
/// The lowest unmatched agent is paired with each remaining agent in
/// increasing order, recursively, so the sequence is deterministic.
pub struct PerfectMatchings {
    num_agents: usize,
    partner: Vec<usize>,
    // stack[d] = (agent fixed at depth d, its current partner)
    stack: Vec<(usize, usize)>,
    started: bool,
    done: bool,
}

const FREE: usize = usize::MAX;

impl PerfectMatchings {
    fn new(num_agents: usize) -> Self {
        PerfectMatchings {
            num_agents,
            partner: vec![FREE; num_agents],
            stack: Vec::with_capacity(num_agents / 2),
            started: false,
            done: false,
        }
    }

    fn lowest_free(&self, from: usize) -> Option<usize> {
        (from..self.num_agents).find(|&a| self.partner[a] == FREE)
    }

    fn next_free_after(&self, a: usize, after: usize) -> Option<usize> {
        (after + 1..self.num_agents).find(|&b| b != a && self.partner[b] == FREE)
    }

    /// Extends the partial matching greedily with the first choice at every depth.
    fn descend(&mut self) {
        while let Some(a) = self.lowest_free(0) {
            let b = self.next_free_after(a, a).expect("even agent count");
            self.partner[a] = b;
            self.partner[b] = a;
            self.stack.push((a, b));
        }
    }

    /// Moves to the next leaf; returns false when exhausted.
    fn advance(&mut self) -> bool {
        while let Some((a, b)) = self.stack.pop() {
            self.partner[a] = FREE;
            self.partner[b] = FREE;
            if let Some(c) = self.next_free_after(a, b) {
                self.partner[a] = c;
                self.partner[c] = a;
                self.stack.push((a, c));
                self.descend();
                return true;
            }
        }
        false
    }

    fn current(&self) -> Matching {
        Matching::from_partners(self.partner.iter().map(|&p| AgentId(p)).collect())
            .expect("enumerator produces perfect matchings")
    }
}

impl Iterator for PerfectMatchings {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.descend();
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        Some(self.current())
    }
}

fn check_cap(num_agents: usize, cap: usize) -> Result<(), SrError> {
    if num_agents > cap {
        Err(SrError::CapExceeded { num_agents, cap })
    } else {
        Ok(())
    }
}

/// Streams each of the `(num_agents - 1)!!` perfect matchings exactly once.
pub fn enumerate_perfect_matchings(num_agents: usize, cap: usize) -> Result<PerfectMatchings, SrError> {
    if num_agents < 2 {
        return Err(SrError::TooFewAgents);
    }
    if num_agents % 2 == 1 {
        return Err(SrError::OddAgentCount(num_agents));
    }
    check_cap(num_agents, cap)?;
    Ok(PerfectMatchings::new(num_agents))
}

/// Every stable matching of `inst`, in enumeration order. Empty iff the
/// instance is unsolvable.
pub fn brute_force_stable_set(inst: &SrInstance, cap: usize) -> Result<Vec<Matching>, SrError> {
    let all = enumerate_perfect_matchings(inst.num_agents(), cap)?;
    let mut stable = Vec::new();
    for m in all {
        if is_stable(inst, &m)? {
            stable.push(m);
        }
    }
    Ok(stable)
}
