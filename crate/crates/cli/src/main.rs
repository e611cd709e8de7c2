use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcascade_cli::run::{self, Report};
use qcascade_cli::{load_model, CliResult, RunConfig, Solver};

#[derive(Parser)]
#[command(name = "qcascade", version, about = "Zero-temperature open-system dynamics: cascade, oracle and quantum-jump solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Model file, or a builtin call such as 'two_atoms(gamma=1, gamma12=1)'
    #[arg(long, global = true)]
    model: Option<String>,

    /// Final time; defaults to 5 / (largest decay rate)
    #[arg(long, global = true)]
    t_max: Option<f64>,

    #[arg(long, global = true, default_value_t = 50)]
    points: usize,

    #[arg(long, global = true, value_enum, default_value_t = Solver::Nud)]
    solver: Solver,

    #[arg(long, global = true, default_value_t = 1000)]
    trajectories: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory for CSV files
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Use H_0 = H_S instead of H_S + H_LS in the cascade and trajectories
    #[arg(long, global = true)]
    drop_lamb_shift: bool,

    /// Allowed cascade-vs-oracle max-norm distance
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,

    /// Run the invariant suite and fail if any check fails
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model and run the invariant suite
    Validate,
    /// Propagate with the selected solver(s)
    Simulate,
    /// Run oracle, cascade and trajectories and compare them
    Compare,
    /// Quantum-jump trajectories with per-jump records
    Traj,
    /// Jump-count distribution
    Photocount,
    /// Decoherence-free subspace
    Dfs,
}

fn execute(cli: &Cli) -> CliResult<Report> {
    let source = cli
        .model
        .as_deref()
        .ok_or_else(|| qcascade_cli::CliError::Validation("--model is required".into()))?;
    let spec = load_model(source)?;
    let cfg = RunConfig {
        t_max: cli.t_max,
        points: cli.points,
        solver: cli.solver,
        trajectories: cli.trajectories,
        seed: cli.seed,
        include_lamb_shift: !cli.drop_lamb_shift,
        tol: cli.tol,
        check: cli.check,
        out: cli.out.clone(),
    };
    match cli.command {
        Command::Validate => run::validate(&spec, &cfg),
        Command::Simulate => run::simulate(&spec, &cfg),
        Command::Compare => run::compare(&spec, &cfg),
        Command::Traj => run::traj(&spec, &cfg),
        Command::Photocount => run::photocount(&spec, &cfg),
        Command::Dfs => run::dfs(&spec, &cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
