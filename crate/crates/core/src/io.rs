//! Text formats for instances and matchings.
//!
//! An instance file names its agents on an `agents:` header and then gives
//! one preference row per agent, most preferred first:
//!
//! ```text
//! # Example instance
//! agents: a b c d
//! a: b c d
//! b: c a d
//! c: a b d
//! d: a b c
//! ```
//!
//! Entries are separated by whitespace and/or commas, and `#` starts a
//! comment. A matching file lists one pair per line, e.g. `a d`.

use std::collections::HashMap;

use thiserror::Error;

use crate::instance::{AgentId, SrError, SrInstance};
use crate::matching::Matching;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: SrError,
    },
}

impl FormatError {
    pub fn line(&self) -> usize {
        match self {
            FormatError::Syntax { line, .. } | FormatError::Invalid { line, .. } => *line,
        }
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

fn invalid(line: usize, source: SrError) -> FormatError {
    FormatError::Invalid { line, source }
}

/// Non-blank lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((k + 1, l))
    })
}

fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && !s.contains(|c: char| c == ',' || c == ':' || c == '#' || c.is_whitespace())
}

pub fn parse_instance(text: &str) -> Result<SrInstance, FormatError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| syntax(1, "missing `agents:` header"))?;
    let body = header.strip_prefix("agents:").ok_or_else(|| syntax(hl, "expected `agents:` header"))?;
    let names: Vec<&str> = tokens(body).collect();
    let m = names.len();
    if m < 2 {
        return Err(invalid(hl, SrError::TooFewAgents));
    }
    if m % 2 == 1 {
        return Err(invalid(hl, SrError::OddAgentCount(m)));
    }
    let mut ids: HashMap<&str, usize> = HashMap::with_capacity(m);
    for (i, name) in names.iter().enumerate() {
        if ids.insert(name, i).is_some() {
            return Err(invalid(hl, SrError::DuplicateName(name.to_string())));
        }
    }

    let mut rows: Vec<Option<Vec<usize>>> = vec![None; m];
    let mut last = hl;
    for (ln, line) in lines {
        last = ln;
        let (owner, rest) = line.split_once(':').ok_or_else(|| syntax(ln, "expected `<agent>: <list>`"))?;
        let owner = owner.trim();
        let a = *ids.get(owner).ok_or_else(|| invalid(ln, SrError::UnknownAgent(owner.to_string())))?;
        if rows[a].is_some() {
            return Err(syntax(ln, format!("second row for `{owner}`")));
        }
        let mut seen = vec![false; m];
        let mut row = Vec::with_capacity(m - 1);
        for t in tokens(rest) {
            let b = *ids.get(t).ok_or_else(|| invalid(ln, SrError::UnknownAgent(t.to_string())))?;
            if b == a {
                return Err(invalid(ln, SrError::SelfEntry(owner.to_string())));
            }
            if std::mem::replace(&mut seen[b], true) {
                return Err(invalid(ln, SrError::DuplicateEntry { agent: owner.to_string(), entry: t.to_string() }));
            }
            row.push(b);
        }
        if row.len() != m - 1 {
            return Err(invalid(
                ln,
                SrError::RowLength { agent: owner.to_string(), expected: m - 1, found: row.len() },
            ));
        }
        rows[a] = Some(row);
    }
    if let Some(a) = rows.iter().position(Option::is_none) {
        return Err(syntax(last + 1, format!("missing row for `{}`", names[a])));
    }
    let rows = rows.into_iter().map(Option::unwrap).collect();
    SrInstance::with_names(names.iter().map(|s| s.to_string()).collect(), rows).map_err(|e| invalid(hl, e))
}

/// Writes `inst` in the instance file format. Names that cannot be written
/// as tokens are replaced by agent indices.
pub fn write_instance(inst: &SrInstance) -> String {
    let usable = {
        let mut seen = std::collections::HashSet::new();
        inst.names().iter().all(|n| valid_name(n) && seen.insert(n.as_str()))
    };
    let name = |a: AgentId| if usable { inst.name(a).to_string() } else { a.0.to_string() };
    let mut out = String::from("agents:");
    for a in inst.agents() {
        out.push(' ');
        out.push_str(&name(a));
    }
    out.push('\n');
    for a in inst.agents() {
        out.push_str(&name(a));
        out.push(':');
        for &b in inst.pref_list(a) {
            out.push(' ');
            out.push_str(&name(b));
        }
        out.push('\n');
    }
    out
}

pub fn parse_matching(inst: &SrInstance, text: &str) -> Result<Matching, FormatError> {
    let m = inst.num_agents();
    let mut partner: Vec<Option<AgentId>> = vec![None; m];
    let mut last = 0;
    for (ln, line) in content_lines(text) {
        last = ln;
        let line = line.trim_start_matches('{').trim_end_matches('}');
        let toks: Vec<&str> = tokens(line).collect();
        let [u, v] = toks[..] else {
            return Err(syntax(ln, format!("expected two agents, found {}", toks.len())));
        };
        let lookup = |t: &str| inst.agent_by_name(t).ok_or_else(|| invalid(ln, SrError::UnknownAgent(t.to_string())));
        let (u, v) = (lookup(u)?, lookup(v)?);
        if u == v {
            return Err(invalid(ln, SrError::SelfPair(u.0)));
        }
        for a in [u, v] {
            if partner[a.0].is_some() {
                return Err(invalid(ln, SrError::AgentMatchedTwice(a.0)));
            }
        }
        partner[u.0] = Some(v);
        partner[v.0] = Some(u);
    }
    if let Some(a) = partner.iter().position(Option::is_none) {
        return Err(invalid(last + 1, SrError::AgentUnmatched(a)));
    }
    Matching::from_partners(partner.into_iter().map(Option::unwrap).collect()).map_err(|e| invalid(last, e))
}

pub fn write_matching(inst: &SrInstance, m: &Matching) -> String {
    m.pairs().map(|p| format!("{} {}\n", inst.name(p.first()), inst.name(p.second()))).collect()
}
