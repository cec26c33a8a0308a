mod config;
mod error;
mod output;
mod run;
mod summarize;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliResult;

/// Generalized multiple-try reversible jump experiments.
#[derive(Debug, Parser)]
#[command(name = "gmtrj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every cell of an experiment config.
    Run {
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of processors.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory; overrides the config's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check detailed balance and reduction on the bundled toy spaces.
    Verify,
    /// Recompute diagnostics and summary tables from trace files.
    Summarize {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long, default_value = "summary")]
        out: PathBuf,
        /// Pool traces that share a label.
        #[arg(long)]
        pool: bool,
        /// Collapse models numbered at least this into one tail row.
        #[arg(long)]
        tail_from: Option<u32>,
        /// Spacing of the occupancy series.
        #[arg(long, default_value_t = 1000)]
        stride: usize,
        /// Number of post-burn-in iterations in the path series.
        #[arg(long, default_value_t = 40_000)]
        path_length: usize,
        /// Accepted for interface symmetry; summaries are single-threaded.
        #[arg(long)]
        workers: Option<usize>,
        /// Accepted for interface symmetry; seeds come from the traces.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            out,
        } => {
            let cfg = config::load(&config, seed)?;
            let out = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
                .max(1);
            let results = run::run_grid(&cfg, workers)?;
            run::write_outputs(&cfg, &out, &results)?;
            eprintln!("{} runs written to {}", results.len(), out.display());
            Ok(())
        }
        Command::Verify => verify::verify(),
        Command::Summarize {
            traces,
            out,
            pool,
            tail_from,
            stride,
            path_length,
            ..
        } => {
            let opts = summarize::SummarizeOptions {
                pool,
                tail_from,
                stride,
                path_length,
            };
            let s = summarize::summarize(&traces, &out, &opts)?;
            eprintln!("{} summaries written to {}", s.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gmtrj: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
