// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Damped harmonic oscillator coupled to a bosonic reservoir, treated with
//! Schwinger's measurement algebra and the thermofield-dynamics thermal vacuum.
//!
//! The crate is layered bottom-up:
//!
//! - [`fock`]: truncated ladder operators, Kronecker products, partial traces.
//! - [`sma`]: measurement symbols `M(a′,b′) = |a′⟩⟨b′|`, operator reconstruction,
//!   density operators and statistical means.
//! - [`tfd`]: thermal weights, the doubled space and `|0(β)⟩`.
//! - [`reservoir`]: bath modes, the rates Γ, Γ′, shifts Δ, Δ′ and `g(τ)`.
//! - [`lindblad`]: the oscillator master equation, its integration and steady state.
//! - [`joint`]: exact unitary evolution of oscillator plus a few-mode bath,
//!   used as an independent check of the master equation.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod joint;
pub mod linalg;
pub mod lindblad;
pub mod reservoir;
pub mod sma;
pub mod tfd;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, C64};

use serde::{Deserialize, Serialize};

/// Physical constants used throughout; natural units by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub kb: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for Units {
    fn default() -> Self {
        Self { hbar: 1.0, kb: 1.0 }
    }
}

impl Units {
    /// `β = 1/(k_B T)`; infinite at `T = 0`.
    pub fn beta(&self, temperature: f64) -> f64 {
        if temperature <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / (self.kb * temperature)
        }
    }
}

/// Version string stamped into output files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
