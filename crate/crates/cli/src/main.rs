use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(name = "pipeflow", version, about = "Steady Navier-Stokes in distorted pipes")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(clap::Args)]
struct Common {
    /// Case file.
    case: PathBuf,
    /// Output directory, overriding the case file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Verb {
    /// Solve the case and write fields, energy balance and manifest.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Error norms and observed rates over successive mesh halvings.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Sweep the data scaling from 0 to 1.
    Continuation {
        #[command(flatten)]
        common: Common,
    },
    /// Solve with the directional do-nothing and the plain do-nothing outlet.
    CompareOutlet {
        #[command(flatten)]
        common: Common,
    },
    /// Mesh-dependent constants of the small-data theory.
    Constants {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Solve from several random starts and compare the limits.
    Uniqueness {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        starts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.verb {
        Verb::Solve { common } => commands::solve(&common.case, common.out),
        Verb::Converge { common, levels } => commands::converge(&common.case, common.out, levels),
        Verb::Continuation { common } => commands::continuation(&common.case, common.out),
        Verb::CompareOutlet { common } => commands::compare_outlet(&common.case, common.out),
        Verb::Constants { common, samples, seed } => commands::constants(&common.case, common.out, samples, seed),
        Verb::Uniqueness { common, starts, seed } => commands::uniqueness(&common.case, common.out, starts, seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
