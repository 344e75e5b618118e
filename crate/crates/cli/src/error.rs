// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or out-of-range configuration.
    #[error("config error: {0}")]
    Config(String),
    /// A computation refused its input or failed numerically.
    #[error("numerical error: {0}")]
    Numerical(#[from] dqs_core::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Output(_) => 1,
        }
    }
}
