// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Batch front-end for `dqs-core`: JSON config in, CSV/JSON out.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

pub use commands::Command;
pub use config::ExperimentConfig;
pub use error::CliError;

/// Loads `config`, runs `command` and writes its outputs into `out_dir`.
pub fn run(command: Command, config: &Path, out_dir: &Path, seed: Option<u64>) -> Result<Vec<PathBuf>, CliError> {
    let (cfg, bytes) = ExperimentConfig::load(config)?;
    let report = commands::execute(command, &cfg, seed)?;
    let seed = match command {
        Command::TfdCheck => Some(seed.unwrap_or(0)),
        _ => seed,
    };
    let stamp = output::Stamp::new(&bytes, seed);
    output::write(
        &report,
        &stamp,
        out_dir,
        cfg.output_stem(command.name()),
        cfg.output.format,
    )
}
