//! Solvability decision: Phase 1, then a backtracking search over the
//! reduced table when Phase 1 alone does not settle the question.

use std::fmt;

use crate::brute::DEFAULT_CAP;
use crate::instance::{AgentId, SrError, SrInstance};
use crate::matching::{is_stable, Matching};
use crate::phase1::{run_phase1, OrderPolicy, Phase1Classification, Phase1Stats, PreferenceTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecisionPath {
    Phase1Empty,
    Phase1Perfect,
    Exhaustive,
}

impl DecisionPath {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionPath::Phase1Empty => "phase1-empty",
            DecisionPath::Phase1Perfect => "phase1-perfect",
            DecisionPath::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for DecisionPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub phase1: Phase1Stats,
    /// Partial matchings visited by the exhaustive search.
    pub search_nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub solvable: bool,
    pub witness: Option<Matching>,
    pub path: DecisionPath,
    pub stats: SolveStats,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Agent limit for the exhaustive branch.
    pub cap: usize,
    pub order: OrderPolicy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { cap: DEFAULT_CAP, order: OrderPolicy::Fifo }
    }
}

pub fn decide_solvability(inst: &SrInstance) -> Result<SolveReport, SrError> {
    decide_solvability_with(inst, &SolveOptions::default())
}

pub fn decide_solvability_with(inst: &SrInstance, opts: &SolveOptions) -> Result<SolveReport, SrError> {
    let result = run_phase1(inst, &opts.order);
    let mut stats = SolveStats { phase1: result.stats, search_nodes: 0 };
    match result.classify() {
        Phase1Classification::Unsolvable { .. } => {
            Ok(SolveReport { solvable: false, witness: None, path: DecisionPath::Phase1Empty, stats })
        }
        Phase1Classification::UniqueStable(m) => {
            Ok(SolveReport { solvable: true, witness: Some(m), path: DecisionPath::Phase1Perfect, stats })
        }
        Phase1Classification::Inconclusive => {
            if inst.num_agents() > opts.cap {
                return Err(SrError::CapExceeded { num_agents: inst.num_agents(), cap: opts.cap });
            }
            let witness = search_reduced(&result.table, &mut stats.search_nodes)?;
            Ok(SolveReport { solvable: witness.is_some(), witness, path: DecisionPath::Exhaustive, stats })
        }
    }
}

pub fn find_stable_matching(inst: &SrInstance) -> Result<Option<Matching>, SrError> {
    Ok(decide_solvability(inst)?.witness)
}

/// Depth-first search over perfect matchings that use only table pairs.
/// Candidates are checked against the full instance.
fn search_reduced(table: &PreferenceTable<'_>, nodes: &mut u64) -> Result<Option<Matching>, SrError> {
    let inst = table.instance();
    let lists: Vec<Vec<AgentId>> = inst.agents().map(|a| table.reduced_list(a).collect()).collect();
    let mut partner: Vec<Option<AgentId>> = vec![None; inst.num_agents()];
    search(inst, &lists, &mut partner, nodes)
}

fn search(
    inst: &SrInstance,
    lists: &[Vec<AgentId>],
    partner: &mut Vec<Option<AgentId>>,
    nodes: &mut u64,
) -> Result<Option<Matching>, SrError> {
    *nodes += 1;
    let Some(a) = partner.iter().position(Option::is_none).map(AgentId) else {
        let m = Matching::from_partners(partner.iter().map(|p| p.expect("complete")).collect())?;
        return Ok(if is_stable(inst, &m)? { Some(m) } else { None });
    };
    for &b in &lists[a.0] {
        if partner[b.0].is_some() {
            continue;
        }
        partner[a.0] = Some(b);
        partner[b.0] = Some(a);
        if let Some(m) = search(inst, lists, partner, nodes)? {
            return Ok(Some(m));
        }
        partner[a.0] = None;
        partner[b.0] = None;
    }
    Ok(None)
}
