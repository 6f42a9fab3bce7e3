//! `dmsoliton`: solve, map, verify, simulate and eval.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Case, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit status 2.
    Usage(String),
    /// The solver did not converge; exit status 3.
    NotConverged(String),
    /// Some verification check failed; exit status 1.
    ChecksFailed(usize),
    /// Anything else; exit status 1.
    Runtime(dmsoliton::Error),
}

impl From<dmsoliton::Error> for CliError {
    fn from(e: dmsoliton::Error) -> Self {
        use dmsoliton::Error as E;
        match e {
            E::Io(_) | E::Stalled | E::NormDrift { .. } => CliError::Runtime(e),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dmsoliton",
    version,
    about = "Dispersion-managed solitons: solver, simulator and checks"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML file with [problem], [solver], [dynamics] and [output] tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    case: Option<Case>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Average dispersion; a positive value switches solve to energy
    /// minimization.
    #[arg(long = "d-av", global = true, allow_hyphen_values = true)]
    d_av: Option<f64>,
    /// `N,L`
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<(usize, f64)>,
    /// Lattice half-width `M`.
    #[arg(long, global = true)]
    lattice: Option<usize>,
    /// `uniform01` or a measure file.
    #[arg(long, global = true)]
    measure: Option<String>,
    /// Profile file (TOML with `segments`, `d_av`, `eps`).
    #[arg(long, global = true)]
    profile: Option<PathBuf>,
    /// Quadrature nodes for the measure of a profile.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    /// `sr` (spectral renormalization) or `ascent`.
    #[arg(long, global = true)]
    method: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the node loops.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a maximizer (or an energy minimizer when d_av > 0).
    Solve,
    /// Write the measure and density table of a dispersion profile.
    Map,
    /// Run verification checks; no names runs all of them.
    Verify { names: Vec<String> },
    /// Run the modulated or averaged dynamics, or a breather study.
    Simulate(SimulateArgs),
    /// Evaluate Q, energy and residual of a stored field.
    Eval {
        #[arg(long)]
        field: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `split`, `averaged` or `breather`.
    #[arg(long)]
    mode: Option<String>,
    /// Initial field file; defaults to a Gaussian (split, averaged) or a
    /// freshly computed maximizer (breather).
    #[arg(long)]
    field: Option<PathBuf>,
    /// Comma-separated modulation scales for the breather study.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Breather study: `dt = eps / steps_per_eps`.
    #[arg(long = "steps-per-eps")]
    steps_per_eps: Option<usize>,
    #[arg(long)]
    snapshots: Option<usize>,
}

fn parse_grid(s: &str) -> Result<(usize, f64), String> {
    let (n, l) = s.split_once(',').ok_or("expected N,L")?;
    let n = n.trim().parse().map_err(|_| format!("bad N `{n}`"))?;
    let l = l.trim().parse().map_err(|_| format!("bad L `{l}`"))?;
    Ok((n, l))
}

fn merge(cfg: &mut RunConfig, g: &GlobalArgs) {
    let p = &mut cfg.problem;
    p.case = g.case.or(p.case);
    p.lambda = g.lambda.or(p.lambda);
    p.d_av = g.d_av.or(p.d_av);
    p.grid = g.grid.or(p.grid);
    p.lattice = g.lattice.or(p.lattice);
    p.nodes = g.nodes.or(p.nodes);
    if g.measure.is_some() || g.profile.is_some() {
        p.measure = g.measure.clone();
        p.profile = g.profile.clone();
    }
    let s = &mut cfg.solver;
    s.tol = g.tol.or(s.tol);
    s.max_iter = g.max_iter.or(s.max_iter);
    s.method = g.method.clone().or(s.method.take());
    cfg.seed = g.seed.or(cfg.seed);
    cfg.output.dir = g.out.clone().or(cfg.output.dir.take());
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.global.threads == 0 {
        return Err(CliError::Usage("threads: must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("threads: {e}")))?;
    let mut cfg = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    merge(&mut cfg, &cli.global);
    match cli.command {
        Command::Solve => commands::solve(&cfg),
        Command::Map => commands::map(&cfg),
        Command::Verify { names } => commands::verify(&cfg, &names),
        Command::Simulate(args) => commands::simulate(&cfg, &args),
        Command::Eval { field } => commands::eval(&cfg, &field),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::NotConverged(msg)) => {
            eprintln!("not converged: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::ChecksFailed(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
