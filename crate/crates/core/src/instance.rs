//! Stable roommates instances: agents, full preference lists and the rank table.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Dense agent index in `[0, num_agents)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

impl AgentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SrError {
    #[error("agent count {0} is odd")]
    OddAgentCount(usize),
    #[error("an instance needs at least 2 agents")]
    TooFewAgents,
    #[error("expected {expected} preference rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("duplicate agent name `{0}`")]
    DuplicateName(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("agent {0} is out of range")]
    AgentOutOfRange(usize),
    #[error("row of `{agent}` lists `{entry}` more than once")]
    DuplicateEntry { agent: String, entry: String },
    #[error("row of `{0}` lists the agent itself")]
    SelfEntry(String),
    #[error("row of `{agent}` has {found} entries, expected {expected}")]
    RowLength { agent: String, expected: usize, found: usize },
    #[error("agents passed to a preference test must be distinct")]
    NotDistinct,
    #[error("matching covers {found} agents but the instance has {expected}")]
    MatchingSize { expected: usize, found: usize },
    #[error("agent {0} appears in more than one pair")]
    AgentMatchedTwice(usize),
    #[error("agent {0} is paired with itself")]
    SelfPair(usize),
    #[error("agent {0} is not covered by the matching")]
    AgentUnmatched(usize),
    #[error("pair {{{0}, {1}}} belongs to the matching")]
    PairInMatching(usize, usize),
    #[error("{num_agents} agents exceed the enumeration cap of {cap}")]
    CapExceeded { num_agents: usize, cap: usize },
}

/// A complete stable roommates instance.
///
/// Every agent ranks all other agents. The rank table answers "does `a`
/// prefer `b` to `c`" in constant time. Values are immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrInstance {
    names: Vec<String>,
    pref: Vec<Vec<AgentId>>,
    rank: Vec<Vec<u32>>,
}

impl SrInstance {
    /// Builds an instance from integer preference rows, naming agents `0..2n`.
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self, SrError> {
        let names = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::with_names(names, rows)
    }

    /// Builds an instance from integer rows with explicit display names.
    pub fn with_names(names: Vec<String>, rows: Vec<Vec<usize>>) -> Result<Self, SrError> {
        let m = names.len();
        check_count(m)?;
        if rows.len() != m {
            return Err(SrError::RowCount { expected: m, found: rows.len() });
        }
        let mut seen = HashMap::with_capacity(m);
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.as_str(), i).is_some() {
                return Err(SrError::DuplicateName(name.clone()));
            }
        }

        let mut rank = vec![vec![u32::MAX; m]; m];
        let mut pref = Vec::with_capacity(m);
        for (a, row) in rows.into_iter().enumerate() {
            if row.len() != m - 1 {
                // Check entries first so a duplicate in a short row is reported as such.
                check_entries(&names, a, &row, &mut rank[a])?;
                return Err(SrError::RowLength { agent: names[a].clone(), expected: m - 1, found: row.len() });
            }
            check_entries(&names, a, &row, &mut rank[a])?;
            pref.push(row.into_iter().map(AgentId).collect());
        }
        Ok(SrInstance { names, pref, rank })
    }

    /// Validates raw string rows: `rows[k]` is `(agent name, ordered list of names)`.
    ///
    /// The agent order is the order of `agents`; rows may come in any order
    /// but each agent needs exactly one.
    pub fn from_named_rows<S: AsRef<str>>(agents: &[S], rows: &[(S, Vec<S>)]) -> Result<Self, SrError> {
        let names: Vec<String> = agents.iter().map(|s| s.as_ref().to_string()).collect();
        check_count(names.len())?;
        let mut ids = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if ids.insert(name.clone(), i).is_some() {
                return Err(SrError::DuplicateName(name.clone()));
            }
        }
        let lookup = |s: &str| ids.get(s).copied().ok_or_else(|| SrError::UnknownAgent(s.to_string()));

        let mut int_rows: Vec<Option<Vec<usize>>> = vec![None; names.len()];
        for (owner, list) in rows {
            let a = lookup(owner.as_ref())?;
            if int_rows[a].is_some() {
                return Err(SrError::DuplicateName(owner.as_ref().to_string()));
            }
            let row = list.iter().map(|s| lookup(s.as_ref())).collect::<Result<Vec<_>, _>>()?;
            int_rows[a] = Some(row);
        }
        let found = int_rows.iter().filter(|r| r.is_some()).count();
        if found != names.len() {
            return Err(SrError::RowCount { expected: names.len(), found });
        }
        Self::with_names(names, int_rows.into_iter().map(Option::unwrap).collect())
    }

    #[inline]
    pub fn num_agents(&self) -> usize {
        self.pref.len()
    }

    pub fn agents(&self) -> impl ExactSizeIterator<Item = AgentId> + '_ {
        (0..self.num_agents()).map(AgentId)
    }

    /// `a`'s full preference list, most preferred first.
    #[inline]
    pub fn pref_list(&self, a: AgentId) -> &[AgentId] {
        &self.pref[a.0]
    }

    /// Position of `b` on `a`'s list. Panics if `a == b`.
    #[inline]
    pub fn rank(&self, a: AgentId, b: AgentId) -> usize {
        let r = self.rank[a.0][b.0];
        assert!(r != u32::MAX, "agent {} has no rank for itself", a.0);
        r as usize
    }

    /// Whether `a` ranks `b` above `c`.
    pub fn prefers(&self, a: AgentId, b: AgentId, c: AgentId) -> Result<bool, SrError> {
        for x in [a, b, c] {
            self.check_agent(x)?;
        }
        if a == b || a == c || b == c {
            return Err(SrError::NotDistinct);
        }
        Ok(self.prefers_unchecked(a, b, c))
    }

    #[inline]
    pub(crate) fn prefers_unchecked(&self, a: AgentId, b: AgentId, c: AgentId) -> bool {
        self.rank[a.0][b.0] < self.rank[a.0][c.0]
    }

    pub fn name(&self, a: AgentId) -> &str {
        &self.names[a.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn agent_by_name(&self, name: &str) -> Option<AgentId> {
        self.names.iter().position(|n| n == name).map(AgentId)
    }

    pub(crate) fn check_agent(&self, a: AgentId) -> Result<(), SrError> {
        if a.0 < self.num_agents() {
            Ok(())
        } else {
            Err(SrError::AgentOutOfRange(a.0))
        }
    }
}

fn check_count(m: usize) -> Result<(), SrError> {
    if m < 2 {
        Err(SrError::TooFewAgents)
    } else if m % 2 == 1 {
        Err(SrError::OddAgentCount(m))
    } else {
        Ok(())
    }
}

fn check_entries(names: &[String], a: usize, row: &[usize], rank_row: &mut [u32]) -> Result<(), SrError> {
    let m = names.len();
    for (k, &b) in row.iter().enumerate() {
        if b >= m {
            return Err(SrError::AgentOutOfRange(b));
        }
        if b == a {
            return Err(SrError::SelfEntry(names[a].clone()));
        }
        if rank_row[b] != u32::MAX {
            return Err(SrError::DuplicateEntry { agent: names[a].clone(), entry: names[b].clone() });
        }
        rank_row[b] = k as u32;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example_one() -> SrInstance {
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

    #[test]
    fn example_one_is_valid() {
        let inst = example_one();
        assert_eq!(inst.num_agents(), 4);
        let a = inst.agent_by_name("a").unwrap();
        let b = inst.agent_by_name("b").unwrap();
        let c = inst.agent_by_name("c").unwrap();
        let d = inst.agent_by_name("d").unwrap();
        assert!(inst.prefers(a, b, c).unwrap());
        assert!(!inst.prefers(a, d, b).unwrap());
        assert_eq!(inst.rank(b, d), 2);
    }

    #[test]
    fn smallest_instance() {
        let inst = SrInstance::new(vec![vec![1], vec![0]]).unwrap();
        assert_eq!(inst.num_agents(), 2);
    }

    #[test]
    fn duplicate_entry_rejected() {
        let err = SrInstance::from_named_rows(
            &["a", "b", "c", "d"],
            &[
                ("a", vec!["b", "b", "d"]),
                ("b", vec!["c", "a", "d"]),
                ("c", vec!["a", "b", "d"]),
                ("d", vec!["a", "b", "c"]),
            ],
        )
        .unwrap_err();
        assert_eq!(err, SrError::DuplicateEntry { agent: "a".into(), entry: "b".into() });
    }

    #[test]
    fn malformed_rows_rejected() {
        assert_eq!(SrInstance::new(vec![vec![1, 2], vec![0, 2], vec![0, 1]]).unwrap_err(), SrError::OddAgentCount(3));
        assert_eq!(SrInstance::new(vec![]).unwrap_err(), SrError::TooFewAgents);
        assert_eq!(SrInstance::new(vec![vec![0], vec![0]]).unwrap_err(), SrError::SelfEntry("0".into()));
        assert!(matches!(
            SrInstance::new(vec![vec![1, 2], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]]),
            Err(SrError::RowLength { .. })
        ));
        assert_eq!(SrInstance::new(vec![vec![5], vec![0]]).unwrap_err(), SrError::AgentOutOfRange(5));
        let err = SrInstance::from_named_rows(&["a", "b"], &[("a", vec!["z"]), ("b", vec!["a"])]).unwrap_err();
        assert_eq!(err, SrError::UnknownAgent("z".into()));
    }

    #[test]
    fn prefers_requires_distinct_agents() {
        let inst = example_one();
        assert_eq!(inst.prefers(AgentId(0), AgentId(1), AgentId(1)), Err(SrError::NotDistinct));
        assert_eq!(inst.prefers(AgentId(0), AgentId(0), AgentId(1)), Err(SrError::NotDistinct));
    }
}
