// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON experiment configuration.
//!
//! Shared blocks (`units`, `system`, `reservoir`, `rates`, `thermal`,
//! `output`) are read by several commands; each command additionally owns at
//! most one command block (`evolve`, `steady`, `correlation`, `tfd_check`,
//! `joint`). A block belonging to another command is rejected.

use std::path::Path;

use dqs_core::fock::FockSpace;
use dqs_core::reservoir::{
    LinearGrid, Mode, Occupation, ReservoirSpec, DEFAULT_BROADENING_SPACINGS, DEFAULT_PV_EXCLUSION_SPACINGS,
};
use dqs_core::{Units, C64};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub units: Units,
    pub system: Option<SystemConfig>,
    pub reservoir: Option<ReservoirConfig>,
    pub rates: Option<RatesConfig>,
    pub thermal: Option<ThermalConfig>,
    pub evolve: Option<EvolveConfig>,
    pub steady: Option<SteadyConfig>,
    pub correlation: Option<CorrelationConfig>,
    pub tfd_check: Option<TfdCheckConfig>,
    pub joint: Option<JointConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub omega0: f64,
    /// Fock cutoff of the system oscillator; not needed by `rates` and `correlation`.
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReservoirConfig {
    /// Explicit mode list. Broadening and principal-value window default to
    /// 3 and 0.5 local energy spacings at ω₀.
    Modes {
        modes: Vec<Mode>,
        occupation: Occupation,
        broadening: Option<f64>,
        pv_exclusion: Option<f64>,
    },
    LinearGrid {
        omega_min: f64,
        omega_max: f64,
        count: usize,
        coupling_profile: dqs_core::reservoir::CouplingProfile,
        #[serde(default)]
        temperature: f64,
    },
}

/// Rates given directly. `n_bar` and `gamma_prime` are alternatives; with
/// neither, `n_bar` comes from the `thermal` block (or is zero without one).
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub gamma: f64,
    pub n_bar: Option<f64>,
    pub gamma_prime: Option<f64>,
    #[serde(default)]
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ThermalConfig {
    #[serde(rename = "temperature")]
    Temperature(f64),
    #[serde(rename = "beta")]
    Beta(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Fock {
        n: usize,
    },
    /// Truncated Gibbs state of the oscillator at `temperature`.
    Thermal {
        temperature: f64,
    },
    Coherent {
        alpha: C64,
    },
    /// Amplitudes in the number basis, normalized on load.
    Superposition {
        amplitudes: Vec<C64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "one_usize")]
    pub sample_every: usize,
    pub initial_state: InitialState,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyConfig {}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfdCheckConfig {
    #[serde(default = "default_observables")]
    pub observables: usize,
}

impl Default for TfdCheckConfig {
    fn default() -> Self {
        Self {
            observables: default_observables(),
        }
    }
}

/// Exact system-plus-bath run. Bath modes come from `reservoir`; their
/// initial states are truncated thermal states at the reservoir temperature.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConfig {
    pub t_final: f64,
    /// Sample spacing of both the exact and the master-equation runs.
    pub dt: f64,
    pub initial_state: InitialState,
    /// Per-mode Fock cutoff, one value for all modes or one per mode. Defaults
    /// to 1 at zero temperature, otherwise the smallest cutoff whose discarded
    /// thermal weight is below `1e-6`.
    pub mode_n_max: Option<ModeCutoff>,
    pub excitation_cap: Option<usize>,
    pub dim_cap: Option<usize>,
    /// RK4 steps per sample for the master-equation run.
    pub master_substeps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ModeCutoff {
    All(usize),
    PerMode(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem; defaults to the command name.
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

fn one_usize() -> usize {
    1
}

fn default_observables() -> usize {
    100
}

/// Discarded thermal weight allowed per bath mode when choosing a default cutoff.
pub const JOINT_MODE_TAIL: f64 = 1e-6;

impl ExperimentConfig {
    /// Parses JSON text. Errors carry the field path and the line number.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config(format!(
                "line {}, column {}: {}{}",
                inner.line(),
                inner.column(),
                if path == "." {
                    String::new()
                } else {
                    format!("at `{path}`: ")
                },
                strip_position(&inner.to_string())
            ))
        })?;
        cfg.check_numbers()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes =
            std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| CliError::Config(format!("{} is not UTF-8: {e}", path.display())))?;
        Ok((Self::parse(text)?, bytes))
    }

    /// Rejects command blocks that belong to a command other than `command`.
    pub fn check_blocks(&self, command: &str) -> Result<(), CliError> {
        let present = [
            ("evolve", self.evolve.is_some()),
            ("steady", self.steady.is_some()),
            ("correlation", self.correlation.is_some()),
            ("tfd-check", self.tfd_check.is_some()),
            ("validate-joint", self.joint.is_some()),
        ];
        for (owner, is_set) in present {
            if is_set && owner != command {
                return Err(CliError::Config(format!(
                    "block `{}` belongs to command `{owner}`, not `{command}`",
                    block_name(owner)
                )));
            }
        }
        Ok(())
    }

    pub fn system(&self) -> Result<SystemConfig, CliError> {
        let s = self.system.ok_or_else(|| missing("system"))?;
        if !(s.omega0 > 0.0) {
            return Err(field("system.omega0", "must be positive"));
        }
        Ok(s)
    }

    pub fn space(&self) -> Result<FockSpace, CliError> {
        let n_max = self.system()?.n_max.ok_or_else(|| missing("system.n_max"))?;
        FockSpace::new(n_max).map_err(|e| field("system.n_max", e))
    }

    /// Inverse temperature from the `thermal` block, if any.
    pub fn beta(&self) -> Result<Option<f64>, CliError> {
        match self.thermal {
            None => Ok(None),
            Some(ThermalConfig::Temperature(t)) if t >= 0.0 => Ok(Some(self.units.beta(t))),
            Some(ThermalConfig::Temperature(_)) => Err(field("thermal.temperature", "must be >= 0")),
            Some(ThermalConfig::Beta(b)) if b > 0.0 => Ok(Some(b)),
            Some(ThermalConfig::Beta(_)) => Err(field("thermal.beta", "must be positive")),
        }
    }

    /// Validated reservoir. Spacing-based defaults are evaluated at `omega0`,
    /// or at the band centre without one.
    pub fn reservoir(&self, omega0: Option<f64>) -> Result<ReservoirSpec, CliError> {
        let cfg = self.reservoir.as_ref().ok_or_else(|| missing("reservoir"))?;
        let spec = match cfg {
            ReservoirConfig::Modes {
                modes,
                occupation,
                broadening,
                pv_exclusion,
            } => {
                // Placeholder widths so the spacing can be read off the validated spec.
                let probe = ReservoirSpec::new(modes.clone(), occupation.clone(), 1.0, 0.0)
                    .map_err(|e| field("reservoir", e))?;
                let (lo, hi) = probe.band();
                let de = probe.local_spacing(omega0.unwrap_or(0.5 * (lo + hi)), self.units.hbar);
                let b = broadening.unwrap_or(DEFAULT_BROADENING_SPACINGS * de);
                let p = pv_exclusion.unwrap_or(DEFAULT_PV_EXCLUSION_SPACINGS * de);
                probe.with_broadening(b, p).map_err(|e| field("reservoir", e))?
            }
            ReservoirConfig::LinearGrid {
                omega_min,
                omega_max,
                count,
                coupling_profile,
                temperature,
            } => LinearGrid {
                omega_min: *omega_min,
                omega_max: *omega_max,
                count: *count,
                coupling_profile: *coupling_profile,
                temperature: *temperature,
            }
            .build(self.units)
            .map_err(|e| field("reservoir", e))?,
        };
        Ok(spec)
    }

    pub fn output_stem<'a>(&'a self, command: &'a str) -> &'a str {
        self.output.path.as_deref().unwrap_or(command)
    }

    fn check_numbers(&self) -> Result<(), CliError> {
        let u = self.units;
        if !(u.hbar > 0.0 && u.hbar.is_finite()) {
            return Err(field("units.hbar", "must be positive and finite"));
        }
        if !(u.kb > 0.0 && u.kb.is_finite()) {
            return Err(field("units.kb", "must be positive and finite"));
        }
        if let Some(r) = &self.rates {
            if r.n_bar.is_some() && r.gamma_prime.is_some() {
                return Err(field("rates", "give at most one of `n_bar` and `gamma_prime`"));
            }
        }
        if let Some(stem) = &self.output.path {
            if stem.is_empty() || stem.contains(['/', '\\']) {
                return Err(field("output.path", "must be a plain file stem"));
            }
        }
        Ok(())
    }
}

fn block_name(command: &str) -> &str {
    match command {
        "tfd-check" => "tfd_check",
        "validate-joint" => "joint",
        other => other,
    }
}

fn strip_position(msg: &str) -> &str {
    match msg.rfind(" at line ") {
        Some(k) => &msg[..k],
        None => msg,
    }
}

pub fn missing(block: &str) -> CliError {
    CliError::Config(format!("missing block `{block}`"))
}

pub fn field(name: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{name}`: {reason}"))
}
