// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Discretized bosonic reservoir: mode list, occupations, the rate constants
//! Γ and Γ′, the frequency shifts Δ and Δ′, and the two-time correlation
//! function of the bath coupling operator.
//!
//! Units: `η_i` is an energy, `σ_E` and `ε_PV` are energies, Γ and Γ′ come out
//! in 1/time and Δ, Δ′ in angular frequency. The energy delta `δ(ħω₀ − ħω_i)`
//! is replaced by a normalized Gaussian of width `σ_E`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::C64;
use crate::Units;

/// Default Gaussian width in units of the local mode energy spacing.
pub const DEFAULT_BROADENING_SPACINGS: f64 = 3.0;
/// Default principal-value half-window in units of the local mode energy spacing.
pub const DEFAULT_PV_EXCLUSION_SPACINGS: f64 = 0.5;

/// One bath oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub omega: f64,
    pub eta: C64,
}

/// How `⟨n_i⟩` is assigned to the modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Occupation {
    /// Explicit value per mode, aligned with the mode list.
    PerMode { values: Vec<f64> },
    /// Bose-Einstein law at temperature `temperature`.
    BoseEinstein { temperature: f64 },
    /// `⟨n(ω)⟩` by linear interpolation in a table of `(ω, n)` pairs; constant
    /// beyond the end points.
    Table { points: Vec<(f64, f64)> },
}

impl Occupation {
    /// Occupation as a function of frequency, if the law depends on ω alone.
    pub fn at(&self, omega: f64, units: Units) -> Option<f64> {
        match self {
            Occupation::PerMode { .. } => None,
            Occupation::BoseEinstein { temperature } => Some(bose_einstein(omega, *temperature, units.hbar, units.kb)),
            Occupation::Table { points } => Some(interpolate(points, omega)),
        }
    }

    /// `d⟨n⟩/dE` at ω by central differences, if the law depends on ω alone.
    pub fn energy_slope(&self, omega: f64, units: Units) -> Option<f64> {
        let h = 1e-6 * omega.max(1e-300);
        let hi = self.at(omega + h, units)?;
        let lo = self.at(omega - h, units)?;
        Some((hi - lo) / (2.0 * h * units.hbar))
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = points.partition_point(|p| p.0 <= x);
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Validated bath description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReservoirSpec {
    modes: Vec<Mode>,
    occupation: Occupation,
    broadening: f64,
    pv_exclusion: f64,
}

impl ReservoirSpec {
    pub fn new(modes: Vec<Mode>, occupation: Occupation, broadening: f64, pv_exclusion: f64) -> Result<Self> {
        if modes.is_empty() {
            return Err(invalid("modes", "reservoir needs at least one mode"));
        }
        for m in &modes {
            if !(m.omega > 0.0) || !m.omega.is_finite() {
                return Err(invalid("modes", format!("mode frequency {} must be positive", m.omega)));
            }
            if !(m.eta.re.is_finite() && m.eta.im.is_finite()) {
                return Err(invalid("modes", "coupling must be finite"));
            }
        }
        if modes.windows(2).any(|w| w[1].omega <= w[0].omega) {
            return Err(invalid("modes", "frequencies must be strictly increasing"));
        }
        match &occupation {
            Occupation::PerMode { values } => {
                if values.len() != modes.len() {
                    return Err(Error::DimensionMismatch {
                        context: "per-mode occupation",
                        expected: modes.len(),
                        found: values.len(),
                    });
                }
                if values.iter().any(|n| !(*n >= 0.0) || !n.is_finite()) {
                    return Err(invalid("occupation", "occupations must be finite and non-negative"));
                }
            }
            Occupation::BoseEinstein { temperature } => {
                if !(*temperature >= 0.0) || !temperature.is_finite() {
                    return Err(invalid(
                        "temperature",
                        format!("must be finite and >= 0, got {temperature}"),
                    ));
                }
            }
            Occupation::Table { points } => {
                if points.is_empty() || points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(invalid("occupation", "table needs strictly increasing frequencies"));
                }
                if points.iter().any(|p| !(p.1 >= 0.0)) {
                    return Err(invalid("occupation", "table occupations must be non-negative"));
                }
            }
        }
        if !(broadening > 0.0) || !broadening.is_finite() {
            return Err(invalid("broadening", format!("must be positive, got {broadening}")));
        }
        if !(pv_exclusion >= 0.0) || !pv_exclusion.is_finite() {
            return Err(invalid("pv_exclusion", format!("must be >= 0, got {pv_exclusion}")));
        }
        Ok(Self {
            modes,
            occupation,
            broadening,
            pv_exclusion,
        })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn occupation(&self) -> &Occupation {
        &self.occupation
    }

    pub fn broadening(&self) -> f64 {
        self.broadening
    }

    pub fn pv_exclusion(&self) -> f64 {
        self.pv_exclusion
    }

    pub fn band(&self) -> (f64, f64) {
        (self.modes[0].omega, self.modes[self.modes.len() - 1].omega)
    }

    /// `⟨n_i⟩` for every mode.
    pub fn occupations(&self, units: Units) -> Vec<f64> {
        match &self.occupation {
            Occupation::PerMode { values } => values.clone(),
            law => self
                .modes
                .iter()
                .map(|m| law.at(m.omega, units).expect("law depends on frequency"))
                .collect(),
        }
    }

    /// Same modes and occupations with every coupling multiplied by `factor`.
    pub fn scaled_couplings(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for m in &mut out.modes {
            m.eta *= factor;
        }
        out
    }

    pub fn with_broadening(mut self, broadening: f64, pv_exclusion: f64) -> Result<Self> {
        self = Self::new(self.modes, self.occupation, broadening, pv_exclusion)?;
        Ok(self)
    }

    /// Energy gap between the modes nearest to `omega` (the bracketing pair,
    /// or the outermost pair when `omega` is at a band edge).
    pub fn local_spacing(&self, omega: f64, hbar: f64) -> f64 {
        if self.modes.len() < 2 {
            return f64::INFINITY;
        }
        let k = self.modes.partition_point(|m| m.omega <= omega);
        let k = k.clamp(1, self.modes.len() - 1);
        hbar * (self.modes[k].omega - self.modes[k - 1].omega)
    }
}

/// How the mode couplings vary across a generated band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingProfile {
    /// Same `η` for every mode.
    Flat { eta: f64 },
    /// `|η_i|² = alpha · ω_i`.
    Ohmic { alpha: f64 },
    /// Flat profile with `|η|²` chosen so the continuum golden-rule rate is
    /// `gamma`: `|η|² = γ ħ² δω / (2π)`.
    FlatRate { gamma: f64 },
}

/// Evenly spaced band `omega_min ..= omega_max` with `count` modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub count: usize,
    pub coupling_profile: CouplingProfile,
    pub temperature: f64,
}

impl LinearGrid {
    pub fn spacing(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.omega_max - self.omega_min) / (self.count - 1) as f64
        }
    }

    /// Builds the spec with the default broadening (3 spacings) and
    /// principal-value window (half a spacing).
    pub fn build(&self, units: Units) -> Result<ReservoirSpec> {
        if self.count < 2 {
            return Err(invalid("count", "a linear grid needs at least two modes"));
        }
        if !(self.omega_min > 0.0) || !(self.omega_max > self.omega_min) {
            return Err(invalid("omega_min", "need 0 < omega_min < omega_max"));
        }
        let dw = self.spacing();
        let modes = (0..self.count)
            .map(|k| {
                let omega = self.omega_min + dw * k as f64;
                let eta = match self.coupling_profile {
                    CouplingProfile::Flat { eta } => eta,
                    CouplingProfile::Ohmic { alpha } => (alpha * omega).sqrt(),
                    CouplingProfile::FlatRate { gamma } => {
                        (gamma * units.hbar * units.hbar * dw / (2.0 * std::f64::consts::PI)).sqrt()
                    }
                };
                Mode {
                    omega,
                    eta: C64::new(eta, 0.0),
                }
            })
            .collect();
        let de = units.hbar * dw;
        ReservoirSpec::new(
            modes,
            Occupation::BoseEinstein {
                temperature: self.temperature,
            },
            DEFAULT_BROADENING_SPACINGS * de,
            DEFAULT_PV_EXCLUSION_SPACINGS * de,
        )
    }
}

/// Rate constants and shifts entering the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirRates {
    pub gamma: f64,
    pub gamma_prime: f64,
    pub delta: f64,
    pub delta_prime: f64,
    /// `⟨n(ω₀)⟩` when the occupation is a function of frequency.
    #[serde(default)]
    pub n_at_omega0: Option<f64>,
    /// Δ and Δ′ recomputed with twice the exclusion window.
    #[serde(default)]
    pub pv_check: Option<(f64, f64)>,
    /// Set when `σ_E` is below the local mode energy spacing.
    #[serde(default)]
    pub under_resolved: bool,
}

impl ReservoirRates {
    /// Rates set directly from `(Γ, n̄)` through `Γ′ = n̄ Γ`.
    pub fn from_detailed_balance(gamma: f64, n_bar: f64, delta: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !(n_bar >= 0.0) || !delta.is_finite() {
            return Err(invalid(
                "rates",
                format!("need gamma >= 0, n_bar >= 0, got {gamma}, {n_bar}"),
            ));
        }
        Ok(Self {
            gamma,
            gamma_prime: n_bar * gamma,
            delta,
            delta_prime: n_bar * delta,
            n_at_omega0: Some(n_bar),
            pv_check: None,
            under_resolved: false,
        })
    }

    pub fn direct(gamma: f64, gamma_prime: f64, delta: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !(gamma_prime >= 0.0) || !delta.is_finite() {
            return Err(invalid("rates", "need gamma >= 0 and gamma' >= 0"));
        }
        Ok(Self {
            gamma,
            gamma_prime,
            delta,
            delta_prime: 0.0,
            n_at_omega0: None,
            pv_check: None,
            under_resolved: false,
        })
    }
}

/// Pairwise (tree) summation; the association order depends only on length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn gaussian(x: f64, sigma: f64) -> f64 {
    (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn principal_value(spec: &ReservoirSpec, omega0: f64, hbar: f64, occ: &[f64], exclusion: f64) -> (f64, f64) {
    let e0 = hbar * omega0;
    let (plain, weighted): (Vec<f64>, Vec<f64>) = spec
        .modes
        .iter()
        .zip(occ)
        .map(|(m, n)| {
            let de = e0 - hbar * m.omega;
            if de.abs() > exclusion {
                let t = m.eta.norm_sqr() / de;
                (t, t * n)
            } else {
                (0.0, 0.0)
            }
        })
        .unzip();
    (pairwise_sum(&plain) / hbar, pairwise_sum(&weighted) / hbar)
}

/// Γ, Γ′ from broadened energy deltas and Δ, Δ′ from principal-value sums.
pub fn rates(spec: &ReservoirSpec, omega0: f64, units: Units) -> Result<ReservoirRates> {
    let hbar = units.hbar;
    let (lo, hi) = spec.band();
    if !(omega0 >= lo && omega0 <= hi) {
        return Err(Error::NoResonantModes {
            omega0,
            min: lo,
            max: hi,
        });
    }
    let occ = spec.occupations(units);
    let e0 = hbar * omega0;
    let (g, gp): (Vec<f64>, Vec<f64>) = spec
        .modes
        .iter()
        .zip(&occ)
        .map(|(m, n)| {
            let w = m.eta.norm_sqr() * gaussian(e0 - hbar * m.omega, spec.broadening);
            (w, w * n)
        })
        .unzip();
    let prefactor = 2.0 * std::f64::consts::PI / hbar;
    let (delta, delta_prime) = principal_value(spec, omega0, hbar, &occ, spec.pv_exclusion);
    let pv_check = principal_value(spec, omega0, hbar, &occ, 2.0 * spec.pv_exclusion);
    Ok(ReservoirRates {
        gamma: prefactor * pairwise_sum(&g),
        gamma_prime: prefactor * pairwise_sum(&gp),
        delta,
        delta_prime,
        n_at_omega0: spec.occupation.at(omega0, units),
        pv_check: Some(pv_check),
        under_resolved: spec.broadening < spec.local_spacing(omega0, hbar),
    })
}

/// `1 / (e^{ħω/k_BT} − 1)`, zero at `T = 0`.
pub fn bose_einstein(omega: f64, temperature: f64, hbar: f64, kb: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (hbar * omega / (kb * temperature)).exp_m1()
}

/// Stationary two-point function of `R = Σ_i (η_i a_i + η_i* a_i†)`:
/// `g(τ) = Σ_i |η_i|² [(⟨n_i⟩+1) e^{−iω_iτ} + ⟨n_i⟩ e^{+iω_iτ}]`.
pub fn correlation(spec: &ReservoirSpec, tau: f64, units: Units) -> C64 {
    let occ = spec.occupations(units);
    correlation_from(spec.modes(), &occ, tau)
}

pub fn correlation_from(modes: &[Mode], occupations: &[f64], tau: f64) -> C64 {
    let (re, im): (Vec<f64>, Vec<f64>) = modes
        .iter()
        .zip(occupations)
        .map(|(m, n)| {
            let phase = C64::new(0.0, -m.omega * tau).exp();
            let term = (phase * (n + 1.0) + phase.conj() * *n) * m.eta.norm_sqr();
            (term.re, term.im)
        })
        .unzip();
    C64::new(pairwise_sum(&re), pairwise_sum(&im))
}
