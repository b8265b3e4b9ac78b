use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use graphpas::commands::{cmd_compare, cmd_enumerate, cmd_random, cmd_search};
use graphpas::exec::{with_threads, Parallelism};
use graphpas::space::DEFAULT_ENUMERATION_CAP;

#[derive(Parser)]
#[command(
    name = "graphpas",
    version,
    about = "Parallel entropy-guided GNN architecture search"
)]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a search and write its history, epoch table and best architecture.
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run search and random search at equal unique-evaluation budgets.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        budget: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score every architecture of a small space with the synthetic landscape.
    Enumerate {
        #[arg(long)]
        layers: usize,
        #[arg(long)]
        evaluator_seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Uniform random search baseline.
    Random {
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Supplies the layer count and evaluator; defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let par = if cli.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    };
    with_threads(cli.threads, || match cli.command {
        Cmd::Search { config, out } => {
            let s = cmd_search(&config, &out, par)?;
            println!(
                "best {} fitness {} after {} unique evaluations",
                s.best_architecture,
                s.best.fitness,
                s.history.unique_evaluations()
            );
            Ok(())
        }
        Cmd::Compare {
            config,
            budget,
            seeds,
            out,
        } => {
            let s = cmd_compare(&config, budget, &seeds, &out, par)?;
            print!("{}", s.render_table());
            Ok(())
        }
        Cmd::Enumerate {
            layers,
            evaluator_seed,
            out,
            cap,
        } => {
            let s = cmd_enumerate(layers, evaluator_seed, &out, cap, par)?;
            print!("{}", s.render());
            Ok(())
        }
        Cmd::Random {
            budget,
            seed,
            out,
            config,
        } => {
            let s = cmd_random(config.as_deref(), budget, seed, &out, par)?;
            println!(
                "best {} fitness {} after {} unique evaluations",
                s.best_architecture,
                s.best.fitness,
                s.history.unique_evaluations()
            );
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
