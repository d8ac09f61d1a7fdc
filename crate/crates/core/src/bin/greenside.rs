use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use greenside::config::{Overrides, RunConfig};
use greenside::pipeline::{self, RunOptions, Step};

/// Optimal putting strategies for stroke and match play.
#[derive(Parser)]
#[command(name = "greenside", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit skills from raw putts, or copy parameter tables through.
    Fit(Common),
    /// Build and check per-player transition models.
    Transitions(Common),
    /// Solve stroke play for every player.
    SolveStroke(Common),
    /// Solve match play for every configured pair.
    SolveMatch(Common),
    /// Gap table, policy difference maps and capture rates.
    Analyze(Common),
    /// Monte Carlo play-out of the solved matches.
    Simulate(Common),
    /// Every stage.
    Pipeline(Common),
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Replace the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Use the 20 inch grid.
    #[arg(long)]
    coarse: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (step, args) = match cli.command {
        Command::Fit(a) => (Step::Fit, a),
        Command::Transitions(a) => (Step::Transitions, a),
        Command::SolveStroke(a) => (Step::Stroke, a),
        Command::SolveMatch(a) => (Step::Match, a),
        Command::Analyze(a) => (Step::Analyze, a),
        Command::Simulate(a) => (Step::Simulate, a),
        Command::Pipeline(a) => (Step::All, a),
    };
    let overrides = Overrides {
        seed: args.seed,
        coarse: args.coarse,
        out: args.out,
    };
    let result =
        RunConfig::load(&args.config, &overrides).and_then(|cfg| pipeline::run(&cfg, step, RunOptions { echo: true }));
    match result {
        Ok(out) => {
            eprintln!("wrote {}", out.out_dir.join("manifest.txt").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
