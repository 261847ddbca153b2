//! Perfect matchings and the stability predicates.

use std::fmt;

use crate::instance::{AgentId, SrError, SrInstance};

/// Unordered pair of distinct agents, stored with the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair(AgentId, AgentId);

impl Pair {
    /// Panics when `u == v`.
    pub fn new(u: AgentId, v: AgentId) -> Self {
        assert_ne!(u, v, "a pair needs two distinct agents");
        if u < v {
            Pair(u, v)
        } else {
            Pair(v, u)
        }
    }

    pub fn first(self) -> AgentId {
        self.0
    }

    pub fn second(self) -> AgentId {
        self.1
    }

    pub fn contains(self, a: AgentId) -> bool {
        self.0 == a || self.1 == a
    }

    /// The member that is not `a`.
    pub fn other(self, a: AgentId) -> AgentId {
        if self.0 == a {
            self.1
        } else {
            self.0
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.0 .0, self.1 .0)
    }
}

/// A perfect matching: a partition of the agent set into pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    partner: Vec<AgentId>,
}

impl Matching {
    /// Validates that `pairs` partition `0..num_agents`.
    pub fn from_pairs<I>(num_agents: usize, pairs: I) -> Result<Self, SrError>
    where
        I: IntoIterator<Item = (AgentId, AgentId)>,
    {
        const UNSET: usize = usize::MAX;
        let mut partner = vec![AgentId(UNSET); num_agents];
        let mut covered = 0;
        for (u, v) in pairs {
            for a in [u, v] {
                if a.0 >= num_agents {
                    return Err(SrError::AgentOutOfRange(a.0));
                }
            }
            if u == v {
                return Err(SrError::SelfPair(u.0));
            }
            for a in [u, v] {
                if partner[a.0].0 != UNSET {
                    return Err(SrError::AgentMatchedTwice(a.0));
                }
            }
            partner[u.0] = v;
            partner[v.0] = u;
            covered += 2;
        }
        if let Some(a) = partner.iter().position(|p| p.0 == UNSET) {
            return Err(SrError::AgentUnmatched(a));
        }
        debug_assert_eq!(covered, num_agents);
        Ok(Matching { partner })
    }

    /// Builds from a partner array; `partner[partner[a]] == a` is required.
    pub fn from_partners(partner: Vec<AgentId>) -> Result<Self, SrError> {
        let m = partner.len();
        let pairs: Vec<_> =
            partner.iter().enumerate().filter(|(a, p)| *a < p.0 || p.0 >= m).map(|(a, &p)| (AgentId(a), p)).collect();
        let matching = Self::from_pairs(m, pairs)?;
        if matching.partner != partner {
            // Some agent names a partner that does not name it back.
            let bad = (0..m).find(|&a| matching.partner[a] != partner[a]).unwrap_or(0);
            return Err(SrError::AgentMatchedTwice(bad));
        }
        Ok(matching)
    }

    pub fn num_agents(&self) -> usize {
        self.partner.len()
    }

    #[inline]
    pub fn partner(&self, a: AgentId) -> AgentId {
        self.partner[a.0]
    }

    pub fn contains(&self, p: Pair) -> bool {
        self.partner[p.0 .0] == p.1
    }

    /// Pairs sorted by their smaller member.
    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.partner.iter().enumerate().filter(|(a, p)| *a < p.0).map(|(a, &p)| Pair::new(AgentId(a), p))
    }
}

/// A pair outside the matching in which both members prefer each other to
/// their assigned partners.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockingPairReport {
    pub pair: Pair,
    pub partner_of_first: AgentId,
    pub partner_of_second: AgentId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable(BlockingPairReport),
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable)
    }

    pub fn witness(&self) -> Option<BlockingPairReport> {
        match self {
            Stability::Stable => None,
            Stability::Unstable(w) => Some(*w),
        }
    }
}

fn check_matching(inst: &SrInstance, m: &Matching) -> Result<(), SrError> {
    if m.num_agents() != inst.num_agents() {
        return Err(SrError::MatchingSize { expected: inst.num_agents(), found: m.num_agents() });
    }
    Ok(())
}

/// Whether `p` blocks `m`. `p` must lie outside the matching.
pub fn is_blocking_pair(inst: &SrInstance, m: &Matching, p: Pair) -> Result<bool, SrError> {
    check_matching(inst, m)?;
    inst.check_agent(p.1)?;
    if m.contains(p) {
        return Err(SrError::PairInMatching(p.0 .0, p.1 .0));
    }
    Ok(blocks(inst, m, p.0, p.1))
}

#[inline]
fn blocks(inst: &SrInstance, m: &Matching, u: AgentId, v: AgentId) -> bool {
    inst.prefers_unchecked(u, v, m.partner(u)) && inst.prefers_unchecked(v, u, m.partner(v))
}

/// Scans every pair outside `m` in lexicographic order and reports the first
/// blocking pair found.
pub fn check_stability(inst: &SrInstance, m: &Matching) -> Result<Stability, SrError> {
    check_matching(inst, m)?;
    let n = inst.num_agents();
    for u in (0..n).map(AgentId) {
        for v in (u.0 + 1..n).map(AgentId) {
            if v != m.partner(u) && blocks(inst, m, u, v) {
                return Ok(Stability::Unstable(BlockingPairReport {
                    pair: Pair::new(u, v),
                    partner_of_first: m.partner(u),
                    partner_of_second: m.partner(v),
                }));
            }
        }
    }
    Ok(Stability::Stable)
}

pub fn is_stable(inst: &SrInstance, m: &Matching) -> Result<bool, SrError> {
    Ok(check_stability(inst, m)?.is_stable())
}
