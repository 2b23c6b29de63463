use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::{CliError, Common};

/// Lattice reaction-diffusion experiments.
#[derive(Parser)]
#[command(name = "rdlattice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Root seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "RDLATTICE_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// Run even when the step size fails the stability gate.
    #[arg(long)]
    allow_unstable: bool,
    /// Override a config key, e.g. `--set k=0.001` or `--set psi.nu2=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation: trajectory CSV and summary JSON.
    Simulate(Shared),
    /// Mesh refinement study.
    Converge(Shared),
    /// Discrete heat kernel table.
    Kernel(Shared),
    /// Besov norms of the lattice Dirac mass over a mesh sweep.
    Besov(Shared),
    /// Feynman-Kac estimates against the deterministic heat solution.
    Fk(Shared),
}

impl From<Shared> for Common {
    fn from(s: Shared) -> Self {
        Common {
            config: s.config,
            seed: s.seed,
            out: s.out,
            allow_unstable: s.allow_unstable,
            set: s.set,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(s) => commands::simulate(&s.into()),
        Command::Converge(s) => commands::converge(&s.into()),
        Command::Kernel(s) => commands::kernel(&s.into()),
        Command::Besov(s) => commands::besov(&s.into()),
        Command::Fk(s) => commands::fk(&s.into()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(CliError { code, body }) => {
            eprintln!("{body}");
            ExitCode::from(code)
        }
    }
}
