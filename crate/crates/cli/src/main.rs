use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use popweave::{
    cmd_generate, cmd_stats, cmd_sweep, cmd_validate, thread_cap, GenerateArgs, GraphFormat, Outcome,
    StatsArgs, Status, SweepArgs,
};

/// Synthetic populations and typed social networks from Bayesian networks.
#[derive(Parser)]
#[command(name = "popweave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario and every file it references.
    Validate {
        scenario: PathBuf,
        /// Exit with status 1 when there are warnings.
        #[arg(long)]
        strict: bool,
    },
    /// Generate a population and its network.
    Generate {
        scenario: PathBuf,
        /// Number of agents (default: the scenario's population_size).
        #[arg(long)]
        size: Option<usize>,
        /// Random seed (default: the scenario's seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Graphml)]
        format: GraphFormat,
    },
    /// Network statistics of generated files.
    Stats {
        /// Directory written by `generate`.
        dir: Option<PathBuf>,
        /// Node file (instead of a directory).
        #[arg(long, conflicts_with = "dir", requires = "edges")]
        nodes: Option<PathBuf>,
        /// Edge files (with --nodes).
        #[arg(long, num_args = 1..)]
        edges: Vec<PathBuf>,
        /// Stats CSV to write (default: stats.csv in the directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// BFS sources for the path-length estimate.
        #[arg(long, default_value_t = 64)]
        path_sources: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Error and statistics table over population sizes and seeds.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [500, 1000, 2000, 5000, 10000, 20000])]
        sizes: Vec<usize>,
        /// Seeds per size.
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        path_sources: usize,
    },
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { scenario, strict } => cmd_validate(&scenario, strict),
        Command::Generate { scenario, size, seed, out, format } => {
            cmd_generate(&GenerateArgs { scenario, size, seed, out, format })
        }
        Command::Stats { dir, nodes, edges, out, path_sources, seed } => {
            cmd_stats(&StatsArgs { dir, nodes, edges, out, path_sources, seed })
        }
        Command::Sweep { scenario, sizes, seeds, out, path_sources } => {
            cmd_sweep(&SweepArgs { scenario, sizes, seeds, out, path_sources })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::InputError as u8 } else { 0 });
        }
    };
    match thread_cap(std::env::var("POPWEAVE_THREADS").ok().as_deref()) {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(Status::RuntimeFailure as u8);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::InputError as u8);
        }
    }
    let outcome = run(cli);
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.status as u8)
}
