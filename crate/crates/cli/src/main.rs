//! `mdlab`: batch front end for the exact mean-dimension experiments.
//!
//! Exit codes: 0 ok, 1 a check failed, 2 invalid configuration or input.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "mdlab", version, about = "Exact experiments on mean dimension lower bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Realization budget of the independence search.
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build or load a tiling and verify it.
    Tile {
        /// Tiling document (JSON) to verify instead of building one.
        input: Option<PathBuf>,
    },
    /// Følner defects, temperedness and entropy quotients.
    Folner,
    /// Independence sets along the Følner sequence.
    Independence,
    /// W by flow and by duality, plus W_F when actions are given.
    Transport {
        /// Measure file (TOML).
        input: Option<PathBuf>,
    },
    /// Separating covers of simplex products and the boundary claim.
    Lebesgue,
    /// The lower-bound chain and its growth table.
    Bound,
    /// Lemma checks on a generated instance.
    Check,
}

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
}

pub struct Ctx {
    pub cfg: RunConfig,
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig::load(cli.config.as_deref()).and_then(|mut cfg| {
        if let Some(out) = cli.out.clone() {
            cfg.out = Some(out);
        }
        if let Some(b) = cli.budget {
            cfg.budget = b;
        }
        cfg.validate()?;
        Ok(cfg)
    });
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let ctx = Ctx { cfg, seed: cli.seed };
    let run = match &cli.command {
        Command::Tile { input } => commands::tile::run(&ctx, input.as_deref()),
        Command::Folner => commands::folner::run(&ctx),
        Command::Independence => commands::independence::run(&ctx),
        Command::Transport { input } => commands::transport::run(&ctx, input.as_deref()),
        Command::Lebesgue => commands::lebesgue::run(&ctx),
        Command::Bound => commands::bound::run(&ctx),
        Command::Check => commands::check::run(&ctx),
    };
    match run {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
