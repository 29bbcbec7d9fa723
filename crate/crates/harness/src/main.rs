use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gentau::CornerScheme;
use gentau_harness::checks::run_checks;
use gentau_harness::config::{resolve, ConfigError, ExperimentConfig, Overrides, Reference};
use gentau_harness::experiment::{assemble_at, eigen_errors, error_norms, run_experiment, sample_grid, snapshot, solve_at, ExperimentError};
use gentau_harness::report;

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_CHECK: u8 = 4;

/// Generalized tau solver for Poisson and biharmonic problems.
#[derive(Parser)]
#[command(name = "gentau", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a config at a single N and write the solution snapshot.
    Solve(RunArgs),
    /// Run the N sweep and write the convergence CSV and SVG.
    Converge(RunArgs),
    /// Compute the finite spectrum of a config and write it as CSV.
    Eig(RunArgs),
    /// Run the invariant suite.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the assembled matrix in coordinate format.
    DumpMatrix(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Dihedral,
    Clockwise,
    Eastwest,
}

#[derive(Args)]
struct RunArgs {
    /// Config file, or the name of a bundled config.
    config: String,
    /// Truncation override.
    #[arg(long)]
    n: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum)]
    scheme: Option<Scheme>,
    /// Interior tau family index.
    #[arg(long)]
    alpha: Option<u32>,
    /// One tau per edge and no corner conditions.
    #[arg(long)]
    naive: bool,
}

enum Failure {
    Config(String),
    Solver(String),
    Check(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Expression(_) => Failure::Config(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = resolve(&args.config)?;
    let scheme = args.scheme.map(|s| match s {
        Scheme::Dihedral => CornerScheme::Dihedral,
        Scheme::Clockwise => CornerScheme::Clockwise,
        Scheme::Eastwest => CornerScheme::EastWest,
    });
    cfg.apply(&Overrides { n: args.n, scheme, alpha: args.alpha, naive: args.naive })?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn cmd_solve(args: &RunArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let n = *cfg.n.last().unwrap();
    let (sys, result, seconds) = solve_at(&cfg, n)?;
    println!("{}: N = {n}, {} unknowns, {seconds:.3} s", cfg.name, sys.size());
    println!("residual {:e}, condition estimate {:e}", result.residual_norm, result.condition_estimate);
    let snap = snapshot(&cfg, n, &result.u)?;
    if let Reference::Manufactured(exact) = &cfg.reference {
        let truth = sample_grid(exact, &snap.points).map_err(|e| Failure::Config(e.to_string()))?;
        let (inf, l2) = error_norms(&snap.values, &truth);
        println!("error vs exact: inf {inf:e}, rms {l2:e}");
    }
    let name = cfg.output.snapshot.clone().unwrap_or_else(|| format!("{}-solution.csv", cfg.name));
    write(&args.out, &name, &report::snapshot_csv(&snap))?;
    Ok(())
}

fn cmd_converge(args: &RunArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let out = run_experiment(&cfg)?;
    print!("{}", report::convergence_csv(&out.report));
    let csv = cfg.output.csv.clone().unwrap_or_else(|| format!("{}.csv", cfg.name));
    write(&args.out, &csv, &report::convergence_csv(&out.report))?;
    let svg = cfg.output.svg.clone().unwrap_or_else(|| format!("{}.svg", cfg.name));
    write(&args.out, &svg, &report::convergence_svg(&out.report))?;
    if let (Some(name), Some(last)) = (&cfg.output.snapshot, out.snapshots.last()) {
        write(&args.out, name, &report::snapshot_csv(last))?;
    }
    Ok(())
}

fn cmd_eig(args: &RunArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let n = *cfg.n.last().unwrap();
    let sys = assemble_at(&cfg, n)?;
    let spectrum = gentau::solve_eig(&sys).map_err(|e| Failure::Solver(format!("N = {n}: {e}")))?;
    let exact = match cfg.reference {
        Reference::EigenExact { formula, modes } => formula.lowest(&cfg.domain, modes),
        _ => Vec::new(),
    };
    println!("{}: N = {n}, {} finite and {} infinite eigenvalues", cfg.name, spectrum.finite_count, spectrum.infinite_count);
    for (k, (z, rel)) in spectrum.eigenvalues.iter().zip(eigen_errors(&spectrum, &exact)).enumerate() {
        println!("  σ_{k} = {:.12e}  (relative error {rel:.3e})", z.re);
    }
    write(&args.out, &format!("{}-N{n}-spectrum.csv", cfg.name), &report::spectrum_csv(&spectrum, &exact))?;
    Ok(())
}

fn cmd_dump(args: &RunArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let n = *cfg.n.last().unwrap();
    let sys = assemble_at(&cfg, n)?;
    let mut text = Vec::new();
    sys.matrix().write_coordinate(&mut text).expect("writing to memory");
    write(&args.out, &format!("{}-N{n}.mtx", cfg.name), &String::from_utf8(text).expect("ascii"))?;
    Ok(())
}

fn cmd_check(seed: u64) -> Result<(), Failure> {
    let outcomes = run_checks(seed);
    for o in &outcomes {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} check(s) failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Eig(a) => cmd_eig(a),
        Command::Check { seed } => cmd_check(*seed),
        Command::DumpMatrix(a) => cmd_dump(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Check(m)) => {
            eprintln!("{m}");
            ExitCode::from(EXIT_CHECK)
        }
    }
}
