// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("dimension {requested} exceeds the configured cap {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown basis label {0}")]
    UnknownLabel(String),

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("operator is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("no resonant modes: omega0 = {omega0} lies outside the mode band [{min}, {max}]")]
    NoResonantModes { omega0: f64, min: f64, max: f64 },

    #[error("steady state is not unique: {count} singular values below {threshold:e} (smallest {smallest:e}, next {next:e})")]
    DegenerateNullSpace {
        count: usize,
        threshold: f64,
        smallest: f64,
        next: f64,
    },

    #[error("integration aborted at t = {time}: trace drift {trace_drift:e}, min eigenvalue {min_eigenvalue:e}")]
    IntegrationDiverged {
        time: f64,
        trace_drift: f64,
        min_eigenvalue: f64,
    },

    #[error("step size violates the stability bound: dt*(gamma + 2 gamma')*n_max = {value} >= {bound}")]
    StepTooLarge { value: f64, bound: f64 },

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
