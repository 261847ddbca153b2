use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use roommates::embedding::{build_embedding, intersection_count, role_names, BitMatrix, PromiseKind, DEFAULT_DENSITY};
use roommates::experiment::{self, ExperimentConfig};
use roommates::io::{parse_instance, parse_matching, write_instance};
use roommates::matching::{check_stability, Stability};
use roommates::phase1::{run_phase1, OrderPolicy, Phase1Classification};
use roommates::protocol::{simulate, BatchPartition, ReferenceSolver};
use roommates::solver::{decide_solvability_with, SolveOptions};
use roommates::{AgentId, SrInstance, DEFAULT_CAP};

#[derive(Parser)]
#[command(name = "roommates", version)]
#[command(about = "Stable roommates: solve, verify, Phase 1 tables, disjointness embedding and protocol experiments")]
struct Cli {
    /// Seed for random proposal orders and experiment sampling
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Largest instance the exhaustive branch will search
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,

    /// Order in which free agents propose
    #[arg(long, global = true, value_enum, default_value_t = Order::Fifo)]
    order: Order,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Fifo,
    Lifo,
    Minid,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kinds {
    Both,
    Disjoint,
    UniquelyIntersecting,
}

#[derive(Subcommand)]
enum Command {
    /// Decide solvability; prints a stable matching when one exists
    Solve { instance: PathBuf },
    /// Check a matching for stability
    Verify { instance: PathBuf, matching: PathBuf },
    /// Print the table left by Phase 1 and what it shows
    Phase1 { instance: PathBuf },
    /// Build the roommates instance for a pair of bit matrices
    GenEmbedding {
        x: PathBuf,
        y: PathBuf,
        /// Output file (stdout if omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate set disjointness, optionally through the two-party protocol
    Disj {
        x: PathBuf,
        y: PathBuf,
        /// Print the protocol transcript
        #[arg(long)]
        transcript: bool,
    },
    /// Run seeded protocol simulations and write a CSV
    Experiment {
        /// Matrix sizes, comma separated
        #[arg(long = "n", value_delimiter = ',', default_values_t = [4usize, 8, 16])]
        ns: Vec<usize>,
        /// Runs per size and kind
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Kinds::Both)]
        kinds: Kinds,
        #[arg(long, default_value_t = DEFAULT_DENSITY)]
        density: f64,
        /// Sweep every input pair instead of sampling (n <= 2)
        #[arg(long)]
        exhaustive: bool,
        /// With --exhaustive, also run pairs that share two or more cells
        #[arg(long, requires = "exhaustive")]
        non_promise: bool,
        /// Record wall-clock time per run (makes the CSV non-reproducible)
        #[arg(long)]
        timing: bool,
        /// CSV output file (stdout if omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// SVG plot of mean bits against n
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

/// Exit status 2 with a message.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type CmdResult = Result<bool, InputError>;

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<SrInstance, InputError> {
    parse_instance(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Result<BitMatrix, InputError> {
    read(path)?.parse().map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn order_policy(order: Order, seed: u64) -> OrderPolicy {
    match order {
        Order::Fifo => OrderPolicy::Fifo,
        Order::Lifo => OrderPolicy::Lifo,
        Order::Minid => OrderPolicy::MinId,
        Order::Random => OrderPolicy::Random(seed),
    }
}

fn emit(out: &Option<PathBuf>, text: &[u8]) -> Result<(), InputError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| InputError(format!("{}: {e}", p.display()))),
        None => Ok(io::stdout().write_all(text)?),
    }
}

fn cmd_solve(path: &Path, opts: &SolveOptions) -> CmdResult {
    let inst = load_instance(path)?;
    let report = decide_solvability_with(&inst, opts)?;
    match &report.witness {
        Some(m) => {
            println!("SOLVABLE ({})", report.path);
            for p in m.pairs() {
                println!("{} {}", inst.name(p.first()), inst.name(p.second()));
            }
        }
        None => println!("UNSOLVABLE ({})", report.path),
    }
    Ok(report.solvable)
}

fn cmd_verify(inst_path: &Path, matching_path: &Path) -> CmdResult {
    let inst = load_instance(inst_path)?;
    let m = parse_matching(&inst, &read(matching_path)?)
        .map_err(|e| InputError(format!("{}: {e}", matching_path.display())))?;
    match check_stability(&inst, &m)? {
        Stability::Stable => {
            println!("STABLE");
            Ok(true)
        }
        Stability::Unstable(w) => {
            let (u, v) = (w.pair.first(), w.pair.second());
            println!("UNSTABLE blocking pair {{{}, {}}}", inst.name(u), inst.name(v));
            Ok(false)
        }
    }
}

fn cmd_phase1(path: &Path, order: &OrderPolicy) -> CmdResult {
    let inst = load_instance(path)?;
    let result = run_phase1(&inst, order);
    for a in inst.agents() {
        let list: Vec<&str> = result.table.reduced_list(a).map(|b| inst.name(b)).collect();
        println!("{}: {}", inst.name(a), list.join(" "));
    }
    let s = result.stats;
    println!("proposals {} rejections {} removals {}", s.proposals, s.rejections, s.removals);
    match result.classify() {
        Phase1Classification::Unsolvable { agent } => {
            println!("UNSOLVABLE: list of {} is empty", inst.name(agent));
            Ok(false)
        }
        Phase1Classification::UniqueStable(_) => {
            println!("UNIQUE STABLE MATCHING");
            Ok(true)
        }
        Phase1Classification::Inconclusive => {
            println!("INCONCLUSIVE");
            Ok(true)
        }
    }
}

fn cmd_gen_embedding(x: &Path, y: &Path, out: &Option<PathBuf>) -> CmdResult {
    let emb = build_embedding(&load_matrix(x)?, &load_matrix(y)?)?;
    emit(out, write_instance(&emb.instance).as_bytes())?;
    Ok(true)
}

fn cmd_disj(x: &Path, y: &Path, transcript: bool) -> CmdResult {
    let (x, y) = (load_matrix(x)?, load_matrix(y)?);
    let common = intersection_count(&x, &y)?;
    println!("DISJ={} common={common}", u8::from(common == 0));
    if transcript {
        let n = x.n();
        let partition = BatchPartition::default_for(n);
        let t = simulate(&mut ReferenceSolver::new(), &x, &y, &partition)?;
        let names = role_names(n);
        print!("{}", t.to_text(&partition, |a: AgentId| names[a.0].clone()));
    }
    Ok(common == 0)
}

fn cmd_experiment(
    cfg: ExperimentConfig,
    exhaustive: bool,
    non_promise: bool,
    out: &Option<PathBuf>,
    plot: &Option<PathBuf>,
) -> CmdResult {
    if cfg.trials == 0 {
        return Err(InputError("--trials must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.density) {
        return Err(InputError("--density must lie in [0, 1]".into()));
    }
    let rows = if exhaustive {
        let mut rows = Vec::new();
        for &n in &cfg.ns {
            if n > 2 {
                return Err(InputError(format!("--exhaustive supports n <= 2, got {n}")));
            }
            rows.extend(experiment::run_exhaustive(n, non_promise, &cfg.order)?);
        }
        rows
    } else {
        experiment::run_experiment(&cfg)?
    };
    let mut buf = Vec::new();
    experiment::write_csv(&rows, &mut buf)?;
    emit(out, &buf)?;
    if let Some(p) = plot {
        write_plot(&rows, p);
    }
    Ok(true)
}

#[cfg(feature = "plot")]
fn write_plot(rows: &[experiment::ExperimentRow], path: &Path) {
    if let Err(e) = experiment::plot_svg(rows, path) {
        eprintln!("warning: plot not written: {e}");
    }
}

#[cfg(not(feature = "plot"))]
fn write_plot(_: &[experiment::ExperimentRow], path: &Path) {
    eprintln!("warning: built without the `plot` feature; {} not written", path.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let order = order_policy(cli.order, cli.seed);
    let result = match &cli.command {
        Command::Solve { instance } => cmd_solve(instance, &SolveOptions { cap: cli.cap, order }),
        Command::Verify { instance, matching } => cmd_verify(instance, matching),
        Command::Phase1 { instance } => cmd_phase1(instance, &order),
        Command::GenEmbedding { x, y, out } => cmd_gen_embedding(x, y, out),
        Command::Disj { x, y, transcript } => cmd_disj(x, y, *transcript),
        Command::Experiment { ns, trials, kinds, density, exhaustive, non_promise, timing, out, plot } => {
            let kinds = match kinds {
                Kinds::Both => vec![PromiseKind::Disjoint, PromiseKind::UniquelyIntersecting],
                Kinds::Disjoint => vec![PromiseKind::Disjoint],
                Kinds::UniquelyIntersecting => vec![PromiseKind::UniquelyIntersecting],
            };
            let cfg = ExperimentConfig {
                ns: ns.clone(),
                trials: *trials,
                kinds,
                seed: cli.seed,
                density: *density,
                order,
                timing: *timing,
            };
            cmd_experiment(cfg, *exhaustive, *non_promise, out, plot)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
