//! Two-party simulation of a query-driven solvability algorithm.
//!
//! Alice holds `x`, Bob holds `y`. Both know the fixed `C` and `D` rows of
//! the embedded instance. The algorithm sees the instance only through
//! Boolean queries, each declared against one batch of a
//! [`BatchPartition`]; the owner of that batch computes the answer from its
//! own rows and sends the single bit to the other party. The transcript is
//! therefore exactly one bit per query.
//!
//! Two query kinds are supported:
//! - `cmp u v w`: does `u` prefer `v` to `w`?
//! - `entry u k v`: is `v` at position `k` (0-based) of `u`'s original list?

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::embedding::{preference_row, BitMatrix, Block, EmbeddingError, Role};
use crate::instance::{AgentId, SrInstance};
use crate::phase1::{OrderPolicy, Phase1Stats, Scheduler};
use crate::solver::DecisionPath;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("batch `{0}` mixes agents of blocks A and B")]
    StraddlesAB(String),
    #[error("agent {0} is in more than one batch")]
    Overlap(usize),
    #[error("agent {0} is not in any batch")]
    Uncovered(usize),
    #[error("agent {0} is out of range")]
    OutOfRange(usize),
    #[error("batch `{name}` has {size} agents, above the cap of {cap}")]
    TooLarge { name: String, size: usize, cap: usize },
    #[error("batch `{0}` is empty")]
    Empty(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("no batch with id {0}")]
    InvalidBatch(usize),
    #[error("query about agent {agent} declared against batch {batch}, which does not contain it")]
    OutsideBatch { batch: usize, agent: usize },
    #[error("malformed query: {0}")]
    Malformed(String),
    #[error("{party:?} cannot see the preferences of agent {agent}")]
    Unknown { party: Party, agent: usize },
    #[error("{num_agents} agents exceed the search cap of {cap}")]
    CapExceeded { num_agents: usize, cap: usize },
    #[error("replay diverged at query {0}")]
    ReplayMismatch(usize),
    #[error("replay ran out of recorded answers")]
    ReplayExhausted,
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn as_str(self) -> &'static str {
        match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Owner {
    Alice,
    Bob,
    Either,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    pub name: String,
    pub agents: Vec<AgentId>,
    pub owner: Owner,
}

/// Fixed disjoint agent sets that queries are declared against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchPartition {
    batches: Vec<Batch>,
    batch_of: Vec<usize>,
}

impl BatchPartition {
    /// Validates a partition of the `4n` agents of an embedded instance.
    /// Owners follow from the blocks each batch touches.
    pub fn new(n: usize, groups: Vec<(String, Vec<AgentId>)>, cap: Option<usize>) -> Result<Self, PartitionError> {
        let m = 4 * n;
        let mut batch_of = vec![usize::MAX; m];
        let mut batches = Vec::with_capacity(groups.len());
        for (id, (name, agents)) in groups.into_iter().enumerate() {
            if agents.is_empty() {
                return Err(PartitionError::Empty(name));
            }
            if let Some(cap) = cap {
                if agents.len() > cap {
                    return Err(PartitionError::TooLarge { name, size: agents.len(), cap });
                }
            }
            let (mut has_a, mut has_b) = (false, false);
            for &a in &agents {
                if a.0 >= m {
                    return Err(PartitionError::OutOfRange(a.0));
                }
                if batch_of[a.0] != usize::MAX {
                    return Err(PartitionError::Overlap(a.0));
                }
                batch_of[a.0] = id;
                match Role::of(n, a).block {
                    Block::A => has_a = true,
                    Block::B => has_b = true,
                    _ => {}
                }
            }
            let owner = match (has_a, has_b) {
                (true, true) => return Err(PartitionError::StraddlesAB(name)),
                (true, false) => Owner::Alice,
                (false, true) => Owner::Bob,
                (false, false) => Owner::Either,
            };
            batches.push(Batch { name, agents, owner });
        }
        if let Some(a) = batch_of.iter().position(|&b| b == usize::MAX) {
            return Err(PartitionError::Uncovered(a));
        }
        Ok(BatchPartition { batches, batch_of })
    }

    /// Batches `A`, `B`, `C`, `D`, each of size `n`.
    pub fn default_for(n: usize) -> Self {
        let groups = Block::ALL
            .iter()
            .map(|&b| {
                (
                    b.letter().to_ascii_uppercase().to_string(),
                    (0..n).map(|i| Role { block: b, index: i }.agent(n)).collect(),
                )
            })
            .collect();
        Self::new(n, groups, Some(n)).expect("block partition is valid")
    }

    /// One batch per agent, all owned by either party. Used when the
    /// oracle is a plain instance rather than a two-party embedding.
    pub fn singletons(num_agents: usize) -> Self {
        let batches = (0..num_agents)
            .map(|a| Batch { name: a.to_string(), agents: vec![AgentId(a)], owner: Owner::Either })
            .collect();
        BatchPartition { batches, batch_of: (0..num_agents).collect() }
    }

    pub fn batches(&self) -> &[Batch] {
        &self.batches
    }

    pub fn batch(&self, id: usize) -> Option<&Batch> {
        self.batches.get(id)
    }

    pub fn batch_of(&self, a: AgentId) -> usize {
        self.batch_of[a.0]
    }

    pub fn num_agents(&self) -> usize {
        self.batch_of.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryKind {
    /// Does `agent` prefer `better` to `worse`?
    Prefers { agent: AgentId, better: AgentId, worse: AgentId },
    /// Is `candidate` at `position` on `agent`'s original list?
    ListEntry { agent: AgentId, position: usize, candidate: AgentId },
}

impl QueryKind {
    /// The agent whose preferences the predicate reads.
    pub fn subject(&self) -> AgentId {
        match *self {
            QueryKind::Prefers { agent, .. } | QueryKind::ListEntry { agent, .. } => agent,
        }
    }

    pub fn token(&self) -> &'static str {
        match self {
            QueryKind::Prefers { .. } => "cmp",
            QueryKind::ListEntry { .. } => "entry",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BooleanQuery {
    pub batch: usize,
    pub kind: QueryKind,
}

/// Owner of the batch; batches known to both parties go to Alice.
pub fn route_query(q: &BooleanQuery, p: &BatchPartition) -> Result<Party, ProtocolError> {
    let batch = p.batch(q.batch).ok_or(ProtocolError::InvalidBatch(q.batch))?;
    Ok(match batch.owner {
        Owner::Alice | Owner::Either => Party::Alice,
        Owner::Bob => Party::Bob,
    })
}

/// Source of answers for a query-driven algorithm.
pub trait QueryOracle {
    fn partition(&self) -> &BatchPartition;

    fn ask(&mut self, q: BooleanQuery) -> Result<bool, ProtocolError>;

    fn num_agents(&self) -> usize {
        self.partition().num_agents()
    }
}

/// A solvability procedure that reads preferences only through queries.
pub trait QueryAlgorithm {
    fn decide(&mut self, oracle: &mut dyn QueryOracle) -> Result<bool, ProtocolError>;
}

fn check_query(q: &BooleanQuery, p: &BatchPartition) -> Result<(), ProtocolError> {
    let m = p.num_agents();
    let batch = p.batch(q.batch).ok_or(ProtocolError::InvalidBatch(q.batch))?;
    let in_range = |a: AgentId| {
        if a.0 < m {
            Ok(())
        } else {
            Err(ProtocolError::Malformed(format!("agent {} out of range", a.0)))
        }
    };
    match q.kind {
        QueryKind::Prefers { agent, better, worse } => {
            in_range(agent)?;
            in_range(better)?;
            in_range(worse)?;
            if agent == better || agent == worse || better == worse {
                return Err(ProtocolError::Malformed("comparison needs three distinct agents".into()));
            }
        }
        QueryKind::ListEntry { agent, position, candidate } => {
            in_range(agent)?;
            in_range(candidate)?;
            if position + 1 >= m {
                return Err(ProtocolError::Malformed(format!("position {position} past the end of a list")));
            }
        }
    }
    let subject = q.kind.subject();
    if !batch.agents.contains(&subject) {
        return Err(ProtocolError::OutsideBatch { batch: q.batch, agent: subject.0 });
    }
    Ok(())
}

/// The rows one party can compute on its own.
#[derive(Clone, Debug)]
pub struct PartyKnowledge {
    party: Party,
    rows: Vec<Option<(Vec<AgentId>, Vec<u32>)>>,
}

impl PartyKnowledge {
    /// Alice: rows of `A` (from `x`), `C` and `D`.
    pub fn alice(x: &BitMatrix) -> Self {
        Self::build(Party::Alice, x.n(), |who| match who.block {
            Block::A => Some(preference_row(x.n(), who, Some(x), None)),
            Block::B => None,
            _ => Some(preference_row(x.n(), who, None, None)),
        })
    }

    /// Bob: rows of `B` (from `y`), `C` and `D`.
    pub fn bob(y: &BitMatrix) -> Self {
        Self::build(Party::Bob, y.n(), |who| match who.block {
            Block::B => Some(preference_row(y.n(), who, None, Some(y))),
            Block::A => None,
            _ => Some(preference_row(y.n(), who, None, None)),
        })
    }

    fn build(party: Party, n: usize, row: impl Fn(Role) -> Option<Vec<usize>>) -> Self {
        let m = 4 * n;
        let rows = (0..m)
            .map(|a| {
                row(Role::of(n, AgentId(a))).map(|r| {
                    let mut rank = vec![u32::MAX; m];
                    for (k, &b) in r.iter().enumerate() {
                        rank[b] = k as u32;
                    }
                    (r.into_iter().map(AgentId).collect(), rank)
                })
            })
            .collect();
        PartyKnowledge { party, rows }
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn answer(&self, kind: &QueryKind) -> Result<bool, ProtocolError> {
        let subject = kind.subject();
        let (list, rank) =
            self.rows[subject.0].as_ref().ok_or(ProtocolError::Unknown { party: self.party, agent: subject.0 })?;
        Ok(match *kind {
            QueryKind::Prefers { better, worse, .. } => rank[better.0] < rank[worse.0],
            QueryKind::ListEntry { position, candidate, .. } => list[position] == candidate,
        })
    }
}

fn answer_from_instance(inst: &SrInstance, kind: &QueryKind) -> bool {
    match *kind {
        QueryKind::Prefers { agent, better, worse } => inst.rank(agent, better) < inst.rank(agent, worse),
        QueryKind::ListEntry { agent, position, candidate } => inst.pref_list(agent)[position] == candidate,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryRecord {
    pub query: BooleanQuery,
    pub responder: Party,
    pub bit: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolTranscript {
    pub records: Vec<QueryRecord>,
    pub answer: bool,
    pub bits_exchanged: u64,
}

impl ProtocolTranscript {
    /// One line per query, `<seq> <batch> <kind> <args> <responder> <bit>`,
    /// then `ANSWER <0|1> BITS <count>`. `name` renders agent ids.
    pub fn to_text(&self, partition: &BatchPartition, name: impl Fn(AgentId) -> String) -> String {
        let mut out = String::new();
        for (seq, r) in self.records.iter().enumerate() {
            let batch = partition.batch(r.query.batch).map_or("?", |b| b.name.as_str());
            let args = match r.query.kind {
                QueryKind::Prefers { agent, better, worse } => {
                    format!("{},{},{}", name(agent), name(better), name(worse))
                }
                QueryKind::ListEntry { agent, position, candidate } => {
                    format!("{},{},{}", name(agent), position, name(candidate))
                }
            };
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                seq + 1,
                batch,
                r.query.kind.token(),
                args,
                r.responder.as_str(),
                u8::from(r.bit)
            );
        }
        let _ = writeln!(out, "ANSWER {} BITS {}", u8::from(self.answer), self.bits_exchanged);
        out
    }

    pub fn count_by(&self, party: Party) -> usize {
        self.records.iter().filter(|r| r.responder == party).count()
    }
}

/// Routes each query to the owning party and records the exchanged bit.
pub struct TwoPartyOracle {
    partition: BatchPartition,
    alice: PartyKnowledge,
    bob: PartyKnowledge,
    records: Vec<QueryRecord>,
}

impl TwoPartyOracle {
    pub fn new(x: &BitMatrix, y: &BitMatrix, partition: BatchPartition) -> Result<Self, ProtocolError> {
        if x.n() != y.n() {
            return Err(EmbeddingError::DimensionMismatch(x.n(), y.n()).into());
        }
        if partition.num_agents() != 4 * x.n() {
            return Err(ProtocolError::Malformed(format!(
                "partition covers {} agents, embedding has {}",
                partition.num_agents(),
                4 * x.n()
            )));
        }
        Ok(TwoPartyOracle {
            partition,
            alice: PartyKnowledge::alice(x),
            bob: PartyKnowledge::bob(y),
            records: Vec::new(),
        })
    }

    pub fn records(&self) -> &[QueryRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<QueryRecord> {
        self.records
    }
}

impl QueryOracle for TwoPartyOracle {
    fn partition(&self) -> &BatchPartition {
        &self.partition
    }

    fn ask(&mut self, q: BooleanQuery) -> Result<bool, ProtocolError> {
        check_query(&q, &self.partition)?;
        let responder = route_query(&q, &self.partition)?;
        let bit = match responder {
            Party::Alice => self.alice.answer(&q.kind)?,
            Party::Bob => self.bob.answer(&q.kind)?,
        };
        self.records.push(QueryRecord { query: q, responder, bit });
        Ok(bit)
    }
}

/// Runs `algorithm` against the two parties holding `x` and `y`.
pub fn simulate(
    algorithm: &mut dyn QueryAlgorithm,
    x: &BitMatrix,
    y: &BitMatrix,
    partition: &BatchPartition,
) -> Result<ProtocolTranscript, ProtocolError> {
    let mut oracle = TwoPartyOracle::new(x, y, partition.clone())?;
    let answer = algorithm.decide(&mut oracle)?;
    let records = oracle.into_records();
    let bits_exchanged = records.len() as u64;
    Ok(ProtocolTranscript { records, answer, bits_exchanged })
}

/// Answers from a fully known instance and counts queries.
pub struct DirectOracle<'a> {
    inst: &'a SrInstance,
    partition: BatchPartition,
    pub queries: u64,
}

impl<'a> DirectOracle<'a> {
    pub fn new(inst: &'a SrInstance) -> Self {
        DirectOracle { inst, partition: BatchPartition::singletons(inst.num_agents()), queries: 0 }
    }

    pub fn with_partition(inst: &'a SrInstance, partition: BatchPartition) -> Self {
        DirectOracle { inst, partition, queries: 0 }
    }
}

impl QueryOracle for DirectOracle<'_> {
    fn partition(&self) -> &BatchPartition {
        &self.partition
    }

    fn ask(&mut self, q: BooleanQuery) -> Result<bool, ProtocolError> {
        check_query(&q, &self.partition)?;
        self.queries += 1;
        Ok(answer_from_instance(self.inst, &q.kind))
    }
}

/// Feeds back the bits of a recorded transcript, checking that the same
/// queries are asked in the same order.
pub struct ReplayOracle<'a> {
    partition: &'a BatchPartition,
    records: &'a [QueryRecord],
    pos: usize,
}

impl<'a> ReplayOracle<'a> {
    pub fn new(partition: &'a BatchPartition, records: &'a [QueryRecord]) -> Self {
        ReplayOracle { partition, records, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl QueryOracle for ReplayOracle<'_> {
    fn partition(&self) -> &BatchPartition {
        self.partition
    }

    fn ask(&mut self, q: BooleanQuery) -> Result<bool, ProtocolError> {
        let rec = self.records.get(self.pos).ok_or(ProtocolError::ReplayExhausted)?;
        if rec.query != q {
            return Err(ProtocolError::ReplayMismatch(self.pos + 1));
        }
        self.pos += 1;
        Ok(rec.bit)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryTally {
    pub comparisons: u64,
    pub list_entries: u64,
}

impl QueryTally {
    pub fn total(&self) -> u64 {
        self.comparisons + self.list_entries
    }
}

/// Phase 1 followed by classification, reading preferences only through
/// comparison queries.
///
/// Pair removals are never materialized. Since the proposal an agent holds
/// only improves, `{u, v}` has been removed exactly when `u` holds a
/// proposal it prefers to `v` or `v` holds one it prefers to `u`. The head
/// of a reduced list is the best present candidate, found by a linear
/// tournament. Comparison answers are cached, so no query is asked twice.
///
/// When Phase 1 is inconclusive the present table is read out and a
/// backtracking search checks candidate matchings against all pairs, again
/// through queries. That branch is limited to `cap` agents.
pub struct ReferenceSolver {
    order: OrderPolicy,
    cap: usize,
    tally: QueryTally,
    stats: Phase1Stats,
    path: Option<DecisionPath>,
    state: Option<SolverState>,
}

struct SolverState {
    m: usize,
    holder: Vec<Option<AgentId>>,
    semiengaged_to: Vec<Option<AgentId>>,
    removed: Vec<bool>,
    cmp_cache: HashMap<(AgentId, AgentId, AgentId), bool>,
}

impl Default for ReferenceSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl ReferenceSolver {
    pub fn new() -> Self {
        Self::with_order(OrderPolicy::Fifo)
    }

    pub fn with_order(order: OrderPolicy) -> Self {
        ReferenceSolver {
            order,
            cap: crate::brute::DEFAULT_CAP,
            tally: QueryTally::default(),
            stats: Phase1Stats::default(),
            path: None,
            state: None,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn tally(&self) -> QueryTally {
        self.tally
    }

    /// Proposal counters of the last run; `removals` stays 0 because
    /// removals are implicit here.
    pub fn stats(&self) -> Phase1Stats {
        Phase1Stats { queries: self.tally.total(), ..self.stats }
    }

    pub fn path(&self) -> Option<DecisionPath> {
        self.path
    }

    fn prefers(
        &mut self,
        oracle: &mut dyn QueryOracle,
        u: AgentId,
        v: AgentId,
        w: AgentId,
    ) -> Result<bool, ProtocolError> {
        let st = self.state.as_mut().expect("state");
        if let Some(&b) = st.cmp_cache.get(&(u, v, w)) {
            return Ok(b);
        }
        if let Some(&b) = st.cmp_cache.get(&(u, w, v)) {
            return Ok(!b);
        }
        let batch = oracle.partition().batch_of(u);
        let bit = oracle.ask(BooleanQuery { batch, kind: QueryKind::Prefers { agent: u, better: v, worse: w } })?;
        self.tally.comparisons += 1;
        self.state.as_mut().expect("state").cmp_cache.insert((u, v, w), bit);
        Ok(bit)
    }

    fn present(&mut self, oracle: &mut dyn QueryOracle, u: AgentId, v: AgentId) -> Result<bool, ProtocolError> {
        let (m, hu, hv) = {
            let st = self.state.as_ref().expect("state");
            if st.removed[u.0 * st.m + v.0] {
                return Ok(false);
            }
            (st.m, st.holder[u.0], st.holder[v.0])
        };
        let mut gone = false;
        if let Some(h) = hu.filter(|&h| h != v) {
            gone = self.prefers(oracle, u, h, v)?;
        }
        if !gone {
            if let Some(h) = hv.filter(|&h| h != u) {
                gone = self.prefers(oracle, v, h, u)?;
            }
        }
        if gone {
            let st = self.state.as_mut().expect("state");
            st.removed[u.0 * m + v.0] = true;
            st.removed[v.0 * m + u.0] = true;
        }
        Ok(!gone)
    }

    fn head(&mut self, oracle: &mut dyn QueryOracle, x: AgentId) -> Result<Option<AgentId>, ProtocolError> {
        let m = self.state.as_ref().expect("state").m;
        let mut best: Option<AgentId> = None;
        for v in (0..m).map(AgentId).filter(|&v| v != x) {
            if !self.present(oracle, x, v)? {
                continue;
            }
            best = match best {
                None => Some(v),
                Some(b) if self.prefers(oracle, x, v, b)? => Some(v),
                keep => keep,
            };
        }
        Ok(best)
    }

    fn run_phase1(&mut self, oracle: &mut dyn QueryOracle) -> Result<(), ProtocolError> {
        let m = self.state.as_ref().expect("state").m;
        let mut sched = Scheduler::new(&self.order, m);
        let mut exhausted = vec![false; m];
        while let Some(x) = sched.pop() {
            if exhausted[x.0] || self.state.as_ref().expect("state").semiengaged_to[x.0].is_some() {
                continue;
            }
            let Some(y) = self.head(oracle, x)? else {
                exhausted[x.0] = true;
                continue;
            };
            let st = self.state.as_mut().expect("state");
            if let Some(z) = st.holder[y.0] {
                st.semiengaged_to[z.0] = None;
                self.stats.rejections += 1;
                sched.push(z);
            }
            st.semiengaged_to[x.0] = Some(y);
            st.holder[y.0] = Some(x);
            self.stats.proposals += 1;
        }
        Ok(())
    }

    /// Pairs present in the final table, read through queries.
    pub fn present_pairs(&mut self, oracle: &mut dyn QueryOracle) -> Result<Vec<(AgentId, AgentId)>, ProtocolError> {
        let m = self.state.as_ref().map(|s| s.m).unwrap_or(0);
        let mut out = Vec::new();
        for u in 0..m {
            for v in u + 1..m {
                if self.present(oracle, AgentId(u), AgentId(v))? {
                    out.push((AgentId(u), AgentId(v)));
                }
            }
        }
        Ok(out)
    }

    fn search(&mut self, oracle: &mut dyn QueryOracle) -> Result<bool, ProtocolError> {
        let m = self.state.as_ref().expect("state").m;
        if m > self.cap {
            return Err(ProtocolError::CapExceeded { num_agents: m, cap: self.cap });
        }
        let mut adj = vec![Vec::new(); m];
        for (u, v) in self.present_pairs(oracle)? {
            adj[u.0].push(v);
            adj[v.0].push(u);
        }
        let mut partner = vec![None; m];
        self.extend(oracle, &adj, &mut partner)
    }

    fn extend(
        &mut self,
        oracle: &mut dyn QueryOracle,
        adj: &[Vec<AgentId>],
        partner: &mut Vec<Option<AgentId>>,
    ) -> Result<bool, ProtocolError> {
        let Some(a) = partner.iter().position(Option::is_none).map(AgentId) else {
            let full: Vec<AgentId> = partner.iter().map(|p| p.expect("complete")).collect();
            return self.is_stable(oracle, &full);
        };
        for &b in &adj[a.0] {
            if partner[b.0].is_some() {
                continue;
            }
            partner[a.0] = Some(b);
            partner[b.0] = Some(a);
            if self.extend(oracle, adj, partner)? {
                return Ok(true);
            }
            partner[a.0] = None;
            partner[b.0] = None;
        }
        Ok(false)
    }

    fn is_stable(&mut self, oracle: &mut dyn QueryOracle, partner: &[AgentId]) -> Result<bool, ProtocolError> {
        let m = partner.len();
        for u in (0..m).map(AgentId) {
            for v in (u.0 + 1..m).map(AgentId) {
                if partner[u.0] == v {
                    continue;
                }
                if self.prefers(oracle, u, v, partner[u.0])? && self.prefers(oracle, v, u, partner[v.0])? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

impl QueryAlgorithm for ReferenceSolver {
    fn decide(&mut self, oracle: &mut dyn QueryOracle) -> Result<bool, ProtocolError> {
        let m = oracle.num_agents();
        self.tally = QueryTally::default();
        self.stats = Phase1Stats::default();
        self.path = None;
        self.state = Some(SolverState {
            m,
            holder: vec![None; m],
            semiengaged_to: vec![None; m],
            removed: vec![false; m * m],
            cmp_cache: HashMap::new(),
        });
        self.run_phase1(oracle)?;

        let st = self.state.as_ref().expect("state");
        let (path, answer) = if st.semiengaged_to.iter().any(Option::is_none) {
            // A free agent at termination has an empty list.
            (DecisionPath::Phase1Empty, false)
        } else if (0..m).all(|a| st.semiengaged_to[a] == st.holder[a]) {
            // Each list runs from the proposee to the held proposer.
            (DecisionPath::Phase1Perfect, true)
        } else {
            (DecisionPath::Exhaustive, self.search(oracle)?)
        };
        self.path = Some(path);
        Ok(answer)
    }
}
