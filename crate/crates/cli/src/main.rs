// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dqs_cli::Command;

/// Damped quantum oscillator toolkit.
#[derive(Debug, Parser)]
#[command(name = "dqs", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for randomized checks (tfd-check).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match dqs_cli::run(args.command, &args.config, &args.out, args.seed) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dqs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
