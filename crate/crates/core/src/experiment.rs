//! Protocol experiments: sample inputs, run the two-party simulation of
//! [`ReferenceSolver`], and collect one row per run.
//!
//! Rows come back sorted by `(n, seed)` whatever the worker count, and
//! `wall_time` is only measured on request, so a fixed seed reproduces the
//! CSV byte for byte.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::{
    build_embedding, intersection_count, sample_promise_input, BitMatrix, PromiseKind, DEFAULT_DENSITY,
};
use crate::phase1::{run_phase1, OrderPolicy};
use crate::protocol::{simulate, BatchPartition, ProtocolError, ReferenceSolver};

/// CSV header, fixed.
pub const CSV_HEADER: [&str; 9] =
    ["n", "seed", "kind", "answer", "bits_exchanged", "proposals", "removals", "path", "wall_time"];

/// One simulated run.
///
/// `proposals` and `bits_exchanged` come from the query-driven solver.
/// That solver never materializes removals, so `removals` counts the pairs
/// deleted by an explicit Phase 1 run on the same instance and order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub seed: u64,
    pub kind: String,
    pub answer: String,
    pub bits_exchanged: u64,
    pub proposals: u64,
    pub removals: u64,
    pub path: String,
    pub wall_time: f64,
}

impl ExperimentRow {
    pub fn solvable(&self) -> bool {
        self.answer == "solvable"
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub ns: Vec<usize>,
    pub trials: usize,
    pub kinds: Vec<PromiseKind>,
    pub seed: u64,
    pub density: f64,
    pub order: OrderPolicy,
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ns: vec![4, 8, 16],
            trials: 10,
            kinds: vec![PromiseKind::Disjoint, PromiseKind::UniquelyIntersecting],
            seed: 0,
            density: DEFAULT_DENSITY,
            order: OrderPolicy::Fifo,
            timing: false,
        }
    }
}

/// Label for the `kind` column: the promise kinds, or `intersecting` for
/// inputs sharing two or more cells.
pub fn kind_label(x: &BitMatrix, y: &BitMatrix) -> &'static str {
    match intersection_count(x, y).expect("equal dimensions") {
        0 => PromiseKind::Disjoint.as_str(),
        1 => PromiseKind::UniquelyIntersecting.as_str(),
        _ => "intersecting",
    }
}

/// Simulates one input and fills a row.
pub fn run_input(
    x: &BitMatrix,
    y: &BitMatrix,
    seed: u64,
    order: &OrderPolicy,
    timing: bool,
) -> Result<ExperimentRow, ProtocolError> {
    let n = x.n();
    let partition = BatchPartition::default_for(n);
    let mut solver = ReferenceSolver::with_order(order.clone());
    let start = Instant::now();
    let transcript = simulate(&mut solver, x, y, &partition)?;
    let elapsed = start.elapsed().as_secs_f64();
    let emb = build_embedding(x, y)?;
    let removals = run_phase1(&emb.instance, order).stats.removals;
    Ok(ExperimentRow {
        n,
        seed,
        kind: kind_label(x, y).to_string(),
        answer: if transcript.answer { "solvable" } else { "unsolvable" }.to_string(),
        bits_exchanged: transcript.bits_exchanged,
        proposals: solver.stats().proposals,
        removals,
        path: solver.path().map_or("", |p| p.as_str()).to_string(),
        wall_time: if timing { elapsed } else { 0.0 },
    })
}

/// For each `n`, `trials` runs of every kind. Run `t` of kind `k` uses seed
/// `cfg.seed + t * kinds.len() + k`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>, ProtocolError> {
    let per_n = cfg.trials * cfg.kinds.len();
    let jobs: Vec<(usize, u64, PromiseKind)> = cfg
        .ns
        .iter()
        .flat_map(|&n| (0..per_n).map(move |k| (n, cfg.seed.wrapping_add(k as u64), cfg.kinds[k % cfg.kinds.len()])))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(n, seed, kind)| {
            let (x, y) = sample_promise_input(n, kind, cfg.density, seed);
            run_input(&x, &y, seed, &cfg.order, cfg.timing)
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|r| (r.n, r.seed));
    Ok(rows)
}

/// Every pair of `n x n` matrices (`n <= 2`). The seed column holds the
/// pair index `xmask * 2^(n*n) + ymask`. Pairs outside the promise are
/// skipped unless `include_non_promise` is set.
pub fn run_exhaustive(
    n: usize,
    include_non_promise: bool,
    order: &OrderPolicy,
) -> Result<Vec<ExperimentRow>, ProtocolError> {
    assert!(n <= 2, "exhaustive sweep is limited to n <= 2");
    let all: Vec<BitMatrix> = BitMatrix::all(n).collect();
    let width = all.len() as u64;
    let jobs: Vec<(u64, &BitMatrix, &BitMatrix)> = all
        .iter()
        .enumerate()
        .flat_map(|(i, x)| all.iter().enumerate().map(move |(j, y)| (i as u64 * width + j as u64, x, y)))
        .filter(|(_, x, y)| include_non_promise || intersection_count(x, y).expect("same n") <= 1)
        .collect();
    let mut rows =
        jobs.par_iter().map(|&(seed, x, y)| run_input(x, y, seed, order, false)).collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|r| (r.n, r.seed));
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `(n, mean bits_exchanged)` for each `n`, ascending.
pub fn mean_bits_by_n(rows: &[ExperimentRow]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(n, _, _)| *n == r.n) {
            Some(e) => {
                e.1 += r.bits_exchanged as f64;
                e.2 += 1;
            }
            None => out.push((r.n, r.bits_exchanged as f64, 1)),
        }
    }
    out.sort_by_key(|e| e.0);
    out.into_iter().map(|(n, s, c)| (n, s / c as f64)).collect()
}

/// Log-log plot of mean bits against `n`, with a `c * n^2` reference line
/// through the first point.
#[cfg(feature = "plot")]
pub fn plot_svg(rows: &[ExperimentRow], path: &std::path::Path) -> Result<(), String> {
    use plotters::prelude::*;

    let means = mean_bits_by_n(rows);
    if means.is_empty() {
        return Err("no rows to plot".into());
    }
    let (n0, q0) = means[0];
    let c = q0 / (n0 as f64 * n0 as f64);
    let n_lo = means[0].0 as f64;
    let n_hi = means[means.len() - 1].0 as f64;
    let q_hi = means.iter().map(|m| m.1).fold(c * n_hi * n_hi, f64::max);
    let q_lo = means.iter().map(|m| m.1).fold(c * n_lo * n_lo, f64::min).max(1.0);

    let root = SVGBackend::new(path, (640, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .build_cartesian_2d((n_lo * 0.8..n_hi * 1.25).log_scale(), (q_lo * 0.5..q_hi * 2.0).log_scale())
        .map_err(|e| e.to_string())?;
    chart
        .draw_series(LineSeries::new(
            means.iter().map(|&(n, _)| (n as f64, c * (n as f64).powi(2))),
            BLUE.stroke_width(1),
        ))
        .map_err(|e| e.to_string())?;
    chart
        .draw_series(LineSeries::new(means.iter().map(|&(n, q)| (n as f64, q)), RED.stroke_width(2)))
        .map_err(|e| e.to_string())?;
    chart
        .draw_series(means.iter().map(|&(n, q)| Circle::new((n as f64, q), 4, RED.filled())))
        .map_err(|e| e.to_string())?;
    root.present().map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_sorted_and_reproducible() {
        let cfg = ExperimentConfig { ns: vec![3, 2], trials: 3, seed: 11, ..ExperimentConfig::default() };
        let a = run_experiment(&cfg).unwrap();
        assert_eq!(a.len(), 12);
        assert!(a.windows(2).all(|w| (w[0].n, w[0].seed) < (w[1].n, w[1].seed)));
        assert_eq!(a, run_experiment(&cfg).unwrap());
        let mut buf = Vec::new();
        write_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,seed,kind,answer,bits_exchanged,proposals,removals,path,wall_time\n"));
        assert_eq!(text.lines().count(), 13);
    }

    #[test]
    fn disjoint_rows_are_solvable() {
        let cfg =
            ExperimentConfig { ns: vec![2, 3, 4], trials: 5, kinds: vec![PromiseKind::Disjoint], ..Default::default() };
        for r in run_experiment(&cfg).unwrap() {
            assert_eq!(r.kind, "disjoint");
            assert!(r.solvable(), "{r:?}");
            assert_eq!(r.path, "phase1-perfect");
        }
    }

    #[test]
    fn exhaustive_sweep_sizes() {
        let promise = run_exhaustive(1, false, &OrderPolicy::Fifo).unwrap();
        assert_eq!(promise.len(), 4);
        assert_eq!(run_exhaustive(2, false, &OrderPolicy::Fifo).unwrap().len(), 189);
    }

    #[test]
    fn mean_bits_groups_by_n() {
        let row = |n, bits| ExperimentRow {
            n,
            seed: 0,
            kind: String::new(),
            answer: String::new(),
            bits_exchanged: bits,
            proposals: 0,
            removals: 0,
            path: String::new(),
            wall_time: 0.0,
        };
        let means = mean_bits_by_n(&[row(4, 10), row(2, 3), row(4, 20)]);
        assert_eq!(means, vec![(2, 3.0), (4, 15.0)]);
    }
}
