//! Embedding of set disjointness into stable roommates.
//!
//! Inputs are two `n x n` bit matrices `x` (Alice) and `y` (Bob). The
//! instance has `4n` agents in four blocks `A`, `B`, `C`, `D`:
//!
//! | agent | preference list |
//! |-------|-----------------|
//! | `a_i` | `b_j` with `x[i][j] = 1`, then `c_i`, then everyone else |
//! | `b_j` | `c_i` with `y[i][j] = 1`, then `a_i` with `y[i][j] = 1`, then `d_j`, then everyone else |
//! | `c_i` | `a_i`, then all of `B`, then everyone else |
//! | `d_j` | `b_j`, then everyone else |
//!
//! Ties inside a tier are broken by agent id, which orders blocks
//! `A < B < C < D` and then by index. Agent ids are `a_i = i`, `b_j = n + j`,
//! `c_i = 2n + i`, `d_j = 3n + j` with 0-based `i`, `j`.
//!
//! Disjoint inputs give a solvable instance whose only stable matching is
//! `{a_i, c_i}`, `{b_j, d_j}` ([`canonical_matching`]).
//!
//! Uniquely intersecting inputs are *not* always unsolvable. With the
//! intersection at `(k, l)`, `a_k` proposes to `b_l` rather than `c_k`, so
//! `c_k` keeps all of `B` on its list and may end up holding some `b_j`
//! with `y[k][j] = 1`. With the id tie-break the instance is solvable
//! exactly when such a `j < l` exists; the tests pin this down against
//! brute force.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{AgentId, SrInstance};
use crate::matching::Matching;

/// Sampling density used when none is given.
pub const DEFAULT_DENSITY: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbeddingError {
    #[error("matrix dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix dimension must be positive")]
    EmptyMatrix,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Square Boolean matrix, 0-based `(row, column)` indexing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        BitMatrix { n, bits: vec![false; n * n] }
    }

    pub fn ones(n: usize) -> Self {
        BitMatrix { n, bits: vec![true; n * n] }
    }

    /// Matrix with ones exactly at the listed 0-based cells.
    pub fn from_cells(n: usize, cells: &[(usize, usize)]) -> Self {
        let mut m = Self::zeros(n);
        for &(i, j) in cells {
            m.set(i, j, true);
        }
        m
    }

    /// Row-major bits of an `n x n` matrix; panics on length mismatch.
    pub fn from_bits(n: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), n * n, "expected {} bits", n * n);
        BitMatrix { n, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.n + j] = v;
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        let k = i * self.n + j;
        self.bits[k] = !self.bits[k];
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Every `n x n` matrix, in binary counting order of the row-major bits.
    pub fn all(n: usize) -> impl Iterator<Item = BitMatrix> {
        let cells = n * n;
        assert!(cells < 32, "enumeration limited to 31 cells");
        (0u32..(1 << cells)).map(move |mask| BitMatrix { n, bits: (0..cells).map(|k| mask >> k & 1 == 1).collect() })
    }
}

impl fmt::Display for BitMatrix {
    /// Text format: `n=<n>` then one line of `0`/`1` per row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        for i in 0..self.n {
            for j in 0..self.n {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for BitMatrix {
    type Err = EmbeddingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines =
            s.lines().enumerate().map(|(k, l)| (k + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |line, msg: &str| EmbeddingError::Parse { line, msg: msg.to_string() };
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing `n=<int>` header"))?;
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| err(hl, "expected `n=<int>`"))?;
        if n == 0 {
            return Err(EmbeddingError::EmptyMatrix);
        }
        let mut bits = Vec::with_capacity(n * n);
        let mut last = hl;
        for row in 0..n {
            let (ln, text) = lines.next().ok_or_else(|| err(last + 1, &format!("missing row {}", row + 1)))?;
            last = ln;
            if text.len() != n {
                return Err(err(ln, &format!("row has {} cells, expected {n}", text.len())));
            }
            for ch in text.chars() {
                match ch {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    _ => return Err(err(ln, &format!("unexpected character `{ch}`"))),
                }
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(err(ln, "trailing content after the last row"));
        }
        Ok(BitMatrix { n, bits })
    }
}

fn check_dims(x: &BitMatrix, y: &BitMatrix) -> Result<usize, EmbeddingError> {
    if x.n != y.n {
        return Err(EmbeddingError::DimensionMismatch(x.n, y.n));
    }
    Ok(x.n)
}

/// Number of cells set in both matrices.
pub fn intersection_count(x: &BitMatrix, y: &BitMatrix) -> Result<usize, EmbeddingError> {
    check_dims(x, y)?;
    Ok(x.bits.iter().zip(&y.bits).filter(|(&a, &b)| a && b).count())
}

/// True iff no cell is set in both matrices.
pub fn disj(x: &BitMatrix, y: &BitMatrix) -> Result<bool, EmbeddingError> {
    Ok(intersection_count(x, y)? == 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    A,
    B,
    C,
    D,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::A, Block::B, Block::C, Block::D];

    pub fn letter(self) -> char {
        match self {
            Block::A => 'a',
            Block::B => 'b',
            Block::C => 'c',
            Block::D => 'd',
        }
    }

    fn offset(self) -> usize {
        self as usize
    }
}

/// Block and 0-based index of an embedded agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Role {
    pub block: Block,
    pub index: usize,
}

impl Role {
    pub fn of(n: usize, a: AgentId) -> Role {
        Role { block: Block::ALL[a.0 / n], index: a.0 % n }
    }

    pub fn agent(self, n: usize) -> AgentId {
        AgentId(self.block.offset() * n + self.index)
    }

    /// Name such as `a1` (1-based index).
    pub fn name(self) -> String {
        format!("{}{}", self.block.letter(), self.index + 1)
    }
}

pub fn agent(block: Block, index: usize, n: usize) -> AgentId {
    Role { block, index }.agent(n)
}

/// Names `a1..an, b1..bn, c1..cn, d1..dn` in id order.
pub fn role_names(n: usize) -> Vec<String> {
    (0..4 * n).map(|a| Role::of(n, AgentId(a)).name()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddedInstance {
    pub n: usize,
    pub instance: SrInstance,
}

impl EmbeddedInstance {
    pub fn role(&self, a: AgentId) -> Role {
        Role::of(self.n, a)
    }

    pub fn agent(&self, block: Block, index: usize) -> AgentId {
        agent(block, index, self.n)
    }
}

/// Tiers of one agent's list before "everyone else"; the rest follows in id
/// order. Each tier is already in id order.
fn tiers(n: usize, who: Role, x: Option<&BitMatrix>, y: Option<&BitMatrix>) -> Vec<Vec<AgentId>> {
    let id = |b, i| agent(b, i, n);
    match who.block {
        Block::A => {
            let x = x.expect("a-rows need x");
            let i = who.index;
            vec![(0..n).filter(|&j| x.get(i, j)).map(|j| id(Block::B, j)).collect(), vec![id(Block::C, i)]]
        }
        Block::B => {
            let y = y.expect("b-rows need y");
            let j = who.index;
            let hits: Vec<usize> = (0..n).filter(|&i| y.get(i, j)).collect();
            vec![
                hits.iter().map(|&i| id(Block::C, i)).collect(),
                hits.iter().map(|&i| id(Block::A, i)).collect(),
                vec![id(Block::D, j)],
            ]
        }
        Block::C => vec![vec![id(Block::A, who.index)], (0..n).map(|j| id(Block::B, j)).collect()],
        Block::D => vec![vec![id(Block::B, who.index)]],
    }
}

fn assemble(n: usize, who: Role, mut tiers: Vec<Vec<AgentId>>) -> Vec<usize> {
    let me = who.agent(n);
    let mut used = vec![false; 4 * n];
    used[me.0] = true;
    for t in &tiers {
        for a in t {
            used[a.0] = true;
        }
    }
    tiers.push((0..4 * n).filter(|&a| !used[a]).map(AgentId).collect());
    tiers.into_iter().flatten().map(|a| a.0).collect()
}

/// Preference row of one agent. `a`-rows read only `x`, `b`-rows only `y`,
/// `c`/`d`-rows neither.
pub fn preference_row(n: usize, who: Role, x: Option<&BitMatrix>, y: Option<&BitMatrix>) -> Vec<usize> {
    assemble(n, who, tiers(n, who, x, y))
}

pub fn build_embedding(x: &BitMatrix, y: &BitMatrix) -> Result<EmbeddedInstance, EmbeddingError> {
    let n = check_dims(x, y)?;
    let rows = (0..4 * n).map(|a| preference_row(n, Role::of(n, AgentId(a)), Some(x), Some(y))).collect();
    finish(n, rows)
}

/// Same construction with every tier shuffled by `rng`, the trailing
/// "everyone else" tier included.
pub fn build_embedding_with_tiebreak<R: Rng>(
    x: &BitMatrix,
    y: &BitMatrix,
    rng: &mut R,
) -> Result<EmbeddedInstance, EmbeddingError> {
    let n = check_dims(x, y)?;
    let rows = (0..4 * n)
        .map(|a| {
            let who = Role::of(n, AgentId(a));
            let mut t = tiers(n, who, Some(x), Some(y));
            let row = assemble(n, who, t.clone());
            let listed: usize = t.iter().map(Vec::len).sum();
            t.push(row[listed..].iter().map(|&b| AgentId(b)).collect());
            for tier in &mut t {
                tier.shuffle(rng);
            }
            t.into_iter().flatten().map(|a| a.0).collect()
        })
        .collect();
    finish(n, rows)
}

fn finish(n: usize, rows: Vec<Vec<usize>>) -> Result<EmbeddedInstance, EmbeddingError> {
    if n == 0 {
        return Err(EmbeddingError::EmptyMatrix);
    }
    let instance = SrInstance::with_names(role_names(n), rows).expect("embedding rows are permutations");
    Ok(EmbeddedInstance { n, instance })
}

/// `{a_i, c_i}` for every `i` and `{b_j, d_j}` for every `j`.
pub fn canonical_matching(n: usize) -> Matching {
    let pairs = (0..n)
        .flat_map(|i| [(agent(Block::A, i, n), agent(Block::C, i, n)), (agent(Block::B, i, n), agent(Block::D, i, n))]);
    Matching::from_pairs(4 * n, pairs).expect("canonical pairs partition the agents")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PromiseKind {
    Disjoint,
    UniquelyIntersecting,
}

impl PromiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PromiseKind::Disjoint => "disjoint",
            PromiseKind::UniquelyIntersecting => "uniquely-intersecting",
        }
    }
}

impl FromStr for PromiseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "disjoint" | "d" => Ok(PromiseKind::Disjoint),
            "uniquely-intersecting" | "intersecting" | "u" => Ok(PromiseKind::UniquelyIntersecting),
            other => Err(format!("unknown kind `{other}`")),
        }
    }
}

/// Seeded sample of a promise input.
pub fn sample_promise_input(n: usize, kind: PromiseKind, density: f64, seed: u64) -> (BitMatrix, BitMatrix) {
    sample_promise_input_with(n, kind, density, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `x` has density `density`; `y` has the same density on `x`'s zero cells.
/// The intersecting kind then sets one uniform cell in both.
pub fn sample_promise_input_with<R: Rng>(
    n: usize,
    kind: PromiseKind,
    density: f64,
    rng: &mut R,
) -> (BitMatrix, BitMatrix) {
    assert!((0.0..=1.0).contains(&density), "density must lie in [0, 1]");
    let mut x = BitMatrix::zeros(n);
    let mut y = BitMatrix::zeros(n);
    for k in 0..n * n {
        x.bits[k] = rng.gen_bool(density);
    }
    for k in 0..n * n {
        y.bits[k] = !x.bits[k] && rng.gen_bool(density);
    }
    if kind == PromiseKind::UniquelyIntersecting {
        let k = rng.gen_range(0..n * n);
        x.bits[k] = true;
        y.bits[k] = true;
    }
    (x, y)
}
