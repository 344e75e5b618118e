// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! One function per subcommand. Each turns the config into core objects
//! (failures there are config errors), runs the computation (failures there are
//! numerical errors) and returns a [`Report`].

use clap::ValueEnum;
use dqs_core::fock::FockSpace;
use dqs_core::joint::{
    compare_with_master, evolve_exact, product_initial_state, JointMode, JointSpec, DEFAULT_DIM_CAP,
};
use dqs_core::lindblad::{
    coherent_state, detailed_balance_populations, evolve, fock_state, pure_state, steady_state, MasterEquationSpec,
    STABILITY_BOUND,
};
use dqs_core::reservoir::{correlation, rates, Occupation, ReservoirRates, ReservoirSpec};
use dqs_core::sma::statistical_mean;
use dqs_core::tfd::{purify_check, tfd_expectation, thermal_vacuum, thermal_weights, truncation_deviation};
use dqs_core::{ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{field, missing, ExperimentConfig, InitialState, ModeCutoff, JOINT_MODE_TAIL};
use crate::error::CliError;
use crate::output::{Cell, Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Rates,
    Evolve,
    Steady,
    TfdCheck,
    Correlation,
    ValidateJoint,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Evolve => "evolve",
            Command::Steady => "steady",
            Command::TfdCheck => "tfd-check",
            Command::Correlation => "correlation",
            Command::ValidateJoint => "validate-joint",
        }
    }
}

pub fn execute(command: Command, cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Report, CliError> {
    cfg.check_blocks(command.name())?;
    match command {
        Command::Rates => run_rates(cfg),
        Command::Evolve => run_evolve(cfg),
        Command::Steady => run_steady(cfg),
        Command::TfdCheck => run_tfd_check(cfg, seed.unwrap_or(0)),
        Command::Correlation => run_correlation(cfg),
        Command::ValidateJoint => run_validate_joint(cfg),
    }
}

/// Rates from the `rates` block or, failing that, computed from `reservoir`.
pub fn master_rates(cfg: &ExperimentConfig) -> Result<ReservoirRates, CliError> {
    let omega0 = cfg.system()?.omega0;
    match (&cfg.rates, &cfg.reservoir) {
        (Some(_), Some(_)) => Err(CliError::Config("give either `rates` or `reservoir`, not both".into())),
        (None, None) => Err(missing("rates")),
        (None, Some(_)) => Ok(rates(&cfg.reservoir(Some(omega0))?, omega0, cfg.units)?),
        (Some(r), None) => {
            let built = match (r.gamma_prime, r.n_bar) {
                (Some(gp), _) => ReservoirRates::direct(r.gamma, gp, r.delta),
                (None, Some(n)) => ReservoirRates::from_detailed_balance(r.gamma, n, r.delta),
                (None, None) => {
                    let n = cfg.beta()?.map_or(0.0, |b| occupation(b * cfg.units.hbar * omega0));
                    ReservoirRates::from_detailed_balance(r.gamma, n, r.delta)
                }
            };
            built.map_err(|e| field("rates", e))
        }
    }
}

/// `1/(e^x − 1)`, zero for `x = ∞`.
fn occupation(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x.exp_m1()
    }
}

fn master_spec(cfg: &ExperimentConfig, space: FockSpace) -> Result<MasterEquationSpec, CliError> {
    let r = master_rates(cfg)?;
    MasterEquationSpec::new(space, cfg.system()?.omega0, r, cfg.units.hbar).map_err(|e| field("rates", e))
}

fn initial_state(
    cfg: &ExperimentConfig,
    state: &InitialState,
    space: FockSpace,
    block: &str,
) -> Result<ComplexMatrix, CliError> {
    let omega0 = cfg.system()?.omega0;
    let name = format!("{block}.initial_state");
    let built = match state {
        InitialState::Fock { n } => fock_state(space, *n),
        InitialState::Thermal { temperature } => {
            if !(*temperature >= 0.0) {
                return Err(field(&name, "temperature must be >= 0"));
            }
            thermal_weights(omega0, cfg.units.beta(*temperature), cfg.units.hbar, space.n_max())
                .map(|w| w.density_matrix())
        }
        InitialState::Coherent { alpha } => coherent_state(space, *alpha),
        InitialState::Superposition { amplitudes } => pure_state(space, amplitudes),
    };
    built.map_err(|e| field(&name, e))
}

fn rate_summary(report: Report, r: &ReservoirRates) -> Report {
    report
        .with("gamma", r.gamma)
        .with("gamma_prime", r.gamma_prime)
        .with("delta", r.delta)
}

fn run_rates(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let omega0 = cfg.system()?.omega0;
    let spec = cfg.reservoir(Some(omega0))?;
    let r = rates(&spec, omega0, cfg.units)?;
    let mut table = Table::new(&[
        "gamma",
        "gamma_prime",
        "delta",
        "delta_prime",
        "n_at_omega0",
        "gamma_prime_over_gamma",
        "delta_pv_check",
        "delta_prime_pv_check",
    ]);
    let (pv, pv_prime) = r.pv_check.unwrap_or((f64::NAN, f64::NAN));
    table.push(vec![
        r.gamma.into(),
        r.gamma_prime.into(),
        r.delta.into(),
        r.delta_prime.into(),
        r.n_at_omega0.unwrap_or(f64::NAN).into(),
        (r.gamma_prime / r.gamma).into(),
        pv.into(),
        pv_prime.into(),
    ]);
    Ok(Report::new("rates", table)
        .with("modes", spec.modes().len())
        .with("broadening", spec.broadening())
        .with("pv_exclusion", spec.pv_exclusion())
        .with("under_resolved", r.under_resolved))
}

fn run_evolve(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let ev = cfg.evolve.as_ref().ok_or_else(|| missing("evolve"))?;
    let space = cfg.space()?;
    let spec = master_spec(cfg, space)?;
    let sigma0 = initial_state(cfg, &ev.initial_state, space, "evolve")?;
    let traj = evolve(&spec, &sigma0, ev.t_final, ev.dt, ev.sample_every)?;
    let mut table = Table::new(&["time", "mean_n", "trace", "purity", "min_eig", "re_coh01", "im_coh01"]);
    for (t, o) in traj.times.iter().zip(&traj.observables) {
        table.push(vec![
            (*t).into(),
            o.mean_n.into(),
            o.trace.into(),
            o.purity.into(),
            o.min_eigenvalue.into(),
            o.coherence01.re.into(),
            o.coherence01.im.into(),
        ]);
    }
    let r = *spec.rates();
    Ok(rate_summary(Report::new("evolve", table), &r)
        .with("max_trace_drift", traj.max_trace_drift())
        .with("min_eigenvalue", traj.min_eigenvalue()))
}

/// Reference Bose-Einstein occupation at ω₀ from `thermal` or the reservoir law.
fn reference_occupation(cfg: &ExperimentConfig, omega0: f64) -> Result<Option<f64>, CliError> {
    if let Some(beta) = cfg.beta()? {
        return Ok(Some(occupation(beta * cfg.units.hbar * omega0)));
    }
    if cfg.reservoir.is_some() {
        let spec = cfg.reservoir(Some(omega0))?;
        if let Occupation::BoseEinstein { .. } = spec.occupation() {
            return Ok(spec.occupation().at(omega0, cfg.units));
        }
    }
    Ok(None)
}

fn run_steady(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let space = cfg.space()?;
    let spec = master_spec(cfg, space)?;
    let omega0 = cfg.system()?.omega0;
    let ss = steady_state(&spec)?;
    let db = detailed_balance_populations(spec.rates(), space);
    let mut table = Table::new(&["n", "population", "detailed_balance"]);
    for (n, (p, q)) in ss.populations().iter().zip(&db).enumerate() {
        table.push(vec![n.into(), (*p).into(), (*q).into()]);
    }
    let r = *spec.rates();
    let mean_n = ss.mean_n();
    let mut report = rate_summary(Report::new("steady", table), &r)
        .with("mean_n", mean_n)
        .with("residual", ss.residual)
        .with("smallest_singular_value", ss.smallest_singular_value)
        .with("next_singular_value", ss.next_singular_value);
    if r.gamma > 0.0 {
        report = report.with("n_bar_from_rates", r.gamma_prime / r.gamma);
    }
    if let Some(n_be) = reference_occupation(cfg, omega0)? {
        report = report.with("bose_einstein", n_be).with(
            "relative_error_vs_bose_einstein",
            (mean_n - n_be).abs() / n_be.max(f64::MIN_POSITIVE),
        );
    }
    Ok(report)
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

fn run_tfd_check(cfg: &ExperimentConfig, seed: u64) -> Result<Report, CliError> {
    let tc = cfg.tfd_check.unwrap_or_default();
    let space = cfg.space()?;
    let omega0 = cfg.system()?.omega0;
    let beta = cfg.beta()?.ok_or_else(|| missing("thermal"))?;
    let weights = thermal_weights(omega0, beta, cfg.units.hbar, space.n_max()).map_err(|e| field("thermal", e))?;
    let vac = thermal_vacuum(&weights);
    let purification = purify_check(&vac);
    let rho = weights.density_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(&["index", "tfd", "trace", "weighted_sum", "defect"]);
    let mut worst: f64 = 0.0;
    for k in 0..tc.observables {
        let f = random_hermitian(&mut rng, space.dim());
        let via_tfd = tfd_expectation(&vac, &f)?;
        let via_trace = statistical_mean(&rho, &f)?;
        let via_sum: f64 = weights
            .weights()
            .iter()
            .enumerate()
            .map(|(n, w)| w * f[(n, n)].re)
            .sum();
        let defect = (via_tfd - via_trace).abs().max((via_tfd - via_sum).abs());
        worst = worst.max(defect);
        table.push(vec![
            Cell::from(k),
            via_tfd.into(),
            via_trace.into(),
            via_sum.into(),
            defect.into(),
        ]);
    }
    Ok(Report::new("tfd-check", table)
        .with(
            "beta",
            if beta.is_finite() {
                beta.into()
            } else {
                serde_json::Value::from("inf")
            },
        )
        .with("projector_defect", purification.projector_defect)
        .with("reduction_defect", purification.reduction_defect)
        .with("vacuum_trace", purification.trace)
        .with("max_expectation_defect", worst)
        .with("mean_occupation", weights.mean_occupation())
        .with("truncation_deviation", truncation_deviation(&weights)))
}

fn run_correlation(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let cc = cfg.correlation.ok_or_else(|| missing("correlation"))?;
    if cc.count == 0 || !cc.tau_min.is_finite() || !cc.tau_max.is_finite() || cc.tau_max < cc.tau_min {
        return Err(field("correlation", "need count >= 1 and finite tau_min <= tau_max"));
    }
    let spec = reservoir_for_band(cfg)?;
    let step = if cc.count > 1 {
        (cc.tau_max - cc.tau_min) / (cc.count - 1) as f64
    } else {
        0.0
    };
    let mut table = Table::new(&["tau", "re_g", "im_g"]);
    for k in 0..cc.count {
        let tau = cc.tau_min + step * k as f64;
        let g = correlation(&spec, tau, cfg.units);
        table.push(vec![tau.into(), g.re.into(), g.im.into()]);
    }
    Ok(Report::new("correlation", table).with("modes", spec.modes().len()))
}

fn reservoir_for_band(cfg: &ExperimentConfig) -> Result<ReservoirSpec, CliError> {
    let omega0 = match cfg.system {
        Some(_) => Some(cfg.system()?.omega0),
        None => None,
    };
    cfg.reservoir(omega0)
}

fn mode_cutoffs(
    cutoff: &Option<ModeCutoff>,
    spec: &ReservoirSpec,
    beta: f64,
    hbar: f64,
) -> Result<Vec<usize>, CliError> {
    let n = spec.modes().len();
    match cutoff {
        Some(ModeCutoff::All(k)) => Ok(vec![*k; n]),
        Some(ModeCutoff::PerMode(v)) if v.len() == n => Ok(v.clone()),
        Some(ModeCutoff::PerMode(v)) => Err(field("joint.mode_n_max", format!("{} entries for {n} modes", v.len()))),
        None if beta.is_infinite() => Ok(vec![1; n]),
        None => spec
            .modes()
            .iter()
            .map(|m| {
                FockSpace::for_thermal_tail(m.omega, beta, hbar, JOINT_MODE_TAIL)
                    .map(|s| s.n_max())
                    .map_err(|e| field("joint.mode_n_max", e))
            })
            .collect(),
    }
}

/// RK4 steps per sample: keeps the stability number at half its bound and the
/// phase advance per step below 0.1 rad.
fn default_substeps(dt: f64, r: &ReservoirRates, omega: f64, n_max: usize) -> usize {
    let n = n_max.max(1) as f64;
    let damping = (r.gamma + 2.0 * r.gamma_prime) * n;
    let h_stab = if damping > 0.0 {
        0.5 * STABILITY_BOUND / damping
    } else {
        f64::INFINITY
    };
    let h_phase = if omega.abs() > 0.0 {
        0.1 / (omega.abs() * n)
    } else {
        f64::INFINITY
    };
    (dt / h_stab.min(h_phase)).ceil().max(1.0) as usize
}

fn run_validate_joint(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let jc = cfg.joint.as_ref().ok_or_else(|| missing("joint"))?;
    if cfg.rates.is_some() {
        return Err(CliError::Config(
            "validate-joint takes its rates from `reservoir`; remove the `rates` block".into(),
        ));
    }
    if !(jc.dt > 0.0) || !(jc.t_final > 0.0) {
        return Err(field("joint", "need dt > 0 and t_final > 0"));
    }
    let samples = jc.t_final / jc.dt;
    if (samples - samples.round()).abs() > 1e-9 * samples.max(1.0) {
        return Err(field("joint.t_final", "must be a whole number of dt"));
    }
    let space = cfg.space()?;
    let omega0 = cfg.system()?.omega0;
    let hbar = cfg.units.hbar;
    let res = cfg.reservoir(Some(omega0))?;
    let beta = match res.occupation() {
        Occupation::BoseEinstein { temperature } => cfg.units.beta(*temperature),
        _ => {
            return Err(field(
                "reservoir.occupation",
                "validate-joint needs a Bose-Einstein occupation",
            ))
        }
    };
    let cutoffs = mode_cutoffs(&jc.mode_n_max, &res, beta, hbar)?;
    let modes = res
        .modes()
        .iter()
        .zip(&cutoffs)
        .map(|(m, &k)| {
            Ok(JointMode {
                omega: m.omega,
                eta: m.eta,
                space: FockSpace::new(k).map_err(|e| field("joint.mode_n_max", e))?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let joint = JointSpec::new(
        space,
        modes,
        omega0,
        hbar,
        beta,
        jc.excitation_cap,
        jc.dim_cap.unwrap_or(DEFAULT_DIM_CAP),
    )?;
    let r = rates(&res, omega0, cfg.units)?;
    let master = MasterEquationSpec::new(space, omega0, r, hbar)?;
    let sigma0 = initial_state(cfg, &jc.initial_state, space, "joint")?;
    let rho0 = product_initial_state(&joint, &sigma0)?;
    let exact = evolve_exact(&joint, &rho0, jc.t_final, jc.dt)?;
    let substeps = jc
        .master_substeps
        .unwrap_or_else(|| default_substeps(jc.dt, &r, master.shifted_frequency(), space.n_max()));
    if substeps == 0 {
        return Err(field("joint.master_substeps", "must be at least 1"));
    }
    let model = evolve(&master, &sigma0, jc.t_final, jc.dt / substeps as f64, substeps)?;
    let cmp = compare_with_master(&joint, &master, &exact, &model)?;

    let mut table = Table::new(&[
        "time",
        "trace_distance",
        "exact_mean_n",
        "model_mean_n",
        "joint_purity",
        "total_excitation",
    ]);
    for k in 0..cmp.times.len() {
        table.push(vec![
            cmp.times[k].into(),
            cmp.trace_distance[k].into(),
            cmp.exact_mean_n[k].into(),
            cmp.model_mean_n[k].into(),
            exact.joint_purity[k].into(),
            exact.total_excitation[k].into(),
        ]);
    }
    Ok(rate_summary(Report::new("validate-joint", table), &r)
        .with("gamma_fit", cmp.gamma_fit)
        .with("gamma_fit_relative_error", cmp.gamma_fit / r.gamma - 1.0)
        .with("window_end", cmp.window_end)
        .with("max_trace_distance_in_window", cmp.max_error)
        .with("recurrence_time", cmp.recurrence_time_estimate)
        .with("joint_dim", joint.dim())
        .with("master_substeps", substeps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn rates_from_thermal_block() {
        let c = cfg(r#"{"system": {"omega0": 1.0}, "rates": {"gamma": 0.2}, "thermal": {"temperature": 1.0}}"#);
        let r = master_rates(&c).unwrap();
        let n = 1.0 / (1f64.exp() - 1.0);
        assert!((r.gamma_prime - 0.2 * n).abs() < 1e-15);
    }

    #[test]
    fn rates_default_to_zero_temperature() {
        let c = cfg(r#"{"system": {"omega0": 1.0}, "rates": {"gamma": 0.2, "delta": 0.01}}"#);
        let r = master_rates(&c).unwrap();
        assert_eq!((r.gamma, r.gamma_prime, r.delta), (0.2, 0.0, 0.01));
    }

    #[test]
    fn rates_and_reservoir_conflict() {
        let c = cfg(r#"{"system": {"omega0": 1.0}, "rates": {"gamma": 0.2},
            "reservoir": {"type": "linear_grid", "omega_min": 0.5, "omega_max": 1.5, "count": 11,
                          "coupling_profile": {"type": "flat", "eta": 0.01}}}"#);
        assert_eq!(master_rates(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn substeps_respect_stability() {
        let r = ReservoirRates::direct(0.5, 0.25, 0.0).unwrap();
        let s = default_substeps(0.1, &r, 1.0, 20);
        let h = 0.1 / s as f64;
        assert!(h * (r.gamma + 2.0 * r.gamma_prime) * 20.0 < STABILITY_BOUND);
        assert!(h * 20.0 <= 0.1 + 1e-15);
    }

    #[test]
    fn precondition_failures_exit_one() {
        let c = cfg(
            r#"{"system": {"omega0": 1.0, "n_max": 30}, "rates": {"gamma": 1.0, "n_bar": 1.0},
            "evolve": {"t_final": 1.0, "dt": 0.1, "initial_state": {"type": "fock", "n": 0}}}"#,
        );
        let err = execute(Command::Evolve, &c, None).unwrap_err();
        assert!(
            matches!(err, CliError::Numerical(dqs_core::Error::StepTooLarge { .. })),
            "{err}"
        );
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn initial_state_out_of_range_is_config_error() {
        let c = cfg(r#"{"system": {"omega0": 1.0, "n_max": 3}, "rates": {"gamma": 0.1},
            "evolve": {"t_final": 1.0, "dt": 0.01, "initial_state": {"type": "fock", "n": 4}}}"#);
        let err = execute(Command::Evolve, &c, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("evolve.initial_state"));
    }
}
