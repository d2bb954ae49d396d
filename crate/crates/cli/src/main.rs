// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! `ftps`: threshold calibration, post-selection runs, buffer sizing and
//! geometry checks for magic-state preparation blocks.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ftps_core::exec::Execution;
use ftps_core::geometry::BlockKind;

use failure::{Failure, FailureKind};

#[derive(Debug, Parser)]
#[command(
    name = "ftps",
    version,
    about = "Post-selection simulator for surface-code magic-state preparation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a memory-block threshold from the [calibration] table.
    Calibrate(RunArgs),
    /// Sample, decode and score preparation blocks; write curves and summary.
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Comma-separated keep fractions replacing the default grid.
        #[arg(long, value_delimiter = ',')]
        kappa_grid: Option<Vec<f64>>,
    },
    /// Size a flush buffer and chain distillation rounds from a JSON spec.
    Buffer {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a block and run its structural checks.
    Validate {
        /// Config whose [block] table is checked.
        #[arg(long, conflicts_with_all = ["distance", "depth"])]
        config: Option<PathBuf>,
        #[arg(long)]
        distance: Option<usize>,
        /// Defaults to the distance.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_parser = parse_kind, default_value = "preparation")]
        kind: BlockKind,
        /// Directory for the report and the graph JSON files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "FTPS_THREADS")]
    threads: Option<usize>,
}

fn parse_kind(s: &str) -> Result<BlockKind, String> {
    match s {
        "preparation" | "prep" => Ok(BlockKind::Preparation),
        "memory" => Ok(BlockKind::Memory),
        _ => Err(format!("unknown block kind {s:?}")),
    }
}

fn execution(threads: Option<usize>) -> Result<Execution, Failure> {
    match threads {
        None => Ok(Execution::Parallel),
        Some(0) => Err(Failure::new(FailureKind::Usage, "--threads must be positive")),
        Some(n) => Ok(Execution::Threads(n)),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Calibrate(a) => {
            let exec = execution(a.threads)?;
            commands::calibrate(&a.config, a.seed, a.out, exec)
        }
        Command::Run { args: a, kappa_grid } => {
            let exec = execution(a.threads)?;
            commands::run(&a.config, a.seed, a.out, kappa_grid, exec)
        }
        Command::Buffer { config, out } => commands::buffer(&config, out),
        Command::Validate {
            config,
            distance,
            depth,
            kind,
            out,
        } => commands::validate(config, distance, depth, kind, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::new(FailureKind::Usage, e.render().to_string().trim());
            eprintln!("{}", f.to_json());
            return ExitCode::from(f.exit_code() as u8);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
