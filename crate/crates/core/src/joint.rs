// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact unitary evolution of the oscillator coupled to a few bath modes.
//!
//! `H = H_A + Σ_i ħω_i(a_i†a_i + ½) + Σ_i (η_i b†a_i + η_i* b a_i†)` conserves
//! the total excitation number, so the joint space may optionally be cut to
//! product states with at most `K` quanta in total. That cut is exact for
//! initial states supported inside it, which is what makes 15-mode baths
//! tractable at zero temperature.
//!
//! Basis ordering is row-major with the system first, i.e. the ordering of
//! `kron(system, kron(mode_1, …))` restricted to the retained states.

use std::collections::{BTreeMap, HashMap};

use nalgebra::SymmetricEigen;

use crate::error::{invalid, Error, Result};
use crate::fock::FockSpace;
use crate::linalg::{c, hermiticity_defect, purity, trace_distance, ComplexMatrix, C64};
use crate::lindblad::{linear_fit, MasterEquationSpec, Trajectory};
use crate::tfd::thermal_weights;

/// Default cap on the joint dimension.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Largest Hermiticity defect of `H` accepted before diagonalizing.
pub const HAMILTONIAN_HERMITICITY_TOL: f64 = 1e-10;
/// Largest weight of the initial state allowed to fall outside an
/// excitation-capped basis.
pub const DISCARDED_WEIGHT_TOL: f64 = 1e-12;
/// Fraction of the recurrence time used as the comparison window.
pub const WINDOW_FRACTION: f64 = 0.5;

/// One bath oscillator with its own truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMode {
    pub omega: f64,
    pub eta: C64,
    pub space: FockSpace,
}

/// Oscillator plus a finite set of bath modes at inverse temperature `beta`.
#[derive(Debug, Clone)]
pub struct JointSpec {
    system: FockSpace,
    modes: Vec<JointMode>,
    omega0: f64,
    hbar: f64,
    beta: f64,
    excitation_cap: Option<usize>,
    basis: JointBasis,
}

/// Retained product states `|n_sys, n_1, …, n_M⟩`.
#[derive(Debug, Clone)]
pub struct JointBasis {
    dims: Vec<usize>,
    states: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl JointBasis {
    fn build(dims: &[usize], cap: Option<usize>, dim_cap: usize) -> Result<Self> {
        let full = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if cap.is_none() {
            match full {
                Some(n) if n <= dim_cap => {}
                _ => {
                    return Err(Error::DimensionCap {
                        requested: full.unwrap_or(usize::MAX),
                        cap: dim_cap,
                    })
                }
            }
        }
        let mut states: Vec<Vec<usize>> = vec![Vec::new()];
        for &d in dims {
            let mut next = Vec::new();
            for s in &states {
                let used: usize = s.iter().sum();
                for k in 0..d {
                    if cap.is_some_and(|kmax| used + k > kmax) {
                        break;
                    }
                    let mut t = s.clone();
                    t.push(k);
                    next.push(t);
                }
            }
            if next.len() > dim_cap {
                return Err(Error::DimensionCap {
                    requested: next.len(),
                    cap: dim_cap,
                });
            }
            states = next;
        }
        let index = states.iter().enumerate().map(|(k, s)| (s.clone(), k)).collect();
        Ok(Self {
            dims: dims.to_vec(),
            states,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    /// Subsystem dimensions, system first.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn position(&self, occupations: &[usize]) -> Option<usize> {
        self.index.get(occupations).copied()
    }
}

impl JointSpec {
    pub fn new(
        system: FockSpace,
        modes: Vec<JointMode>,
        omega0: f64,
        hbar: f64,
        beta: f64,
        excitation_cap: Option<usize>,
        dim_cap: usize,
    ) -> Result<Self> {
        if modes.is_empty() {
            return Err(invalid("modes", "joint system needs at least one bath mode"));
        }
        if !(omega0 > 0.0) {
            return Err(invalid("omega0", "must be positive"));
        }
        if !(hbar > 0.0) {
            return Err(invalid("hbar", "must be positive"));
        }
        if !(beta > 0.0) {
            return Err(invalid("beta", "must be positive (use infinity for T = 0)"));
        }
        if modes.iter().any(|m| !(m.omega > 0.0)) {
            return Err(invalid("modes", "mode frequencies must be positive"));
        }
        let dims: Vec<usize> = std::iter::once(system.dim())
            .chain(modes.iter().map(|m| m.space.dim()))
            .collect();
        let basis = JointBasis::build(&dims, excitation_cap, dim_cap)?;
        Ok(Self {
            system,
            modes,
            omega0,
            hbar,
            beta,
            excitation_cap,
            basis,
        })
    }

    pub fn system(&self) -> FockSpace {
        self.system
    }

    pub fn modes(&self) -> &[JointMode] {
        &self.modes
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn excitation_cap(&self) -> Option<usize> {
        self.excitation_cap
    }

    pub fn basis(&self) -> &JointBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `2π / δω` with `δω` the smallest adjacent mode spacing; infinite for
    /// a single mode.
    pub fn recurrence_time(&self) -> f64 {
        let mut w: Vec<f64> = self.modes.iter().map(|m| m.omega).collect();
        w.sort_by(f64::total_cmp);
        let gap = w.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
        if gap.is_finite() && gap > 0.0 {
            2.0 * std::f64::consts::PI / gap
        } else {
            f64::INFINITY
        }
    }

    /// Same bath with every coupling multiplied by `factor`.
    pub fn scaled_couplings(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for m in &mut out.modes {
            m.eta *= factor;
        }
        out
    }
}

/// Joint Hamiltonian in the retained basis.
pub fn build_hamiltonian(spec: &JointSpec) -> Result<ComplexMatrix> {
    let basis = &spec.basis;
    let d = basis.len();
    let hbar = spec.hbar;
    let mut h = ComplexMatrix::zeros(d, d);
    for (k, s) in basis.states.iter().enumerate() {
        let mut e = hbar * spec.omega0 * (s[0] as f64 + 0.5);
        for (i, m) in spec.modes.iter().enumerate() {
            e += hbar * m.omega * (s[i + 1] as f64 + 0.5);
        }
        h[(k, k)] = c(e);
        // η_i b† a_i moves one quantum from mode i into the system.
        if s[0] < spec.system.n_max() {
            for (i, m) in spec.modes.iter().enumerate() {
                let ni = s[i + 1];
                if ni == 0 {
                    continue;
                }
                let mut t = s.clone();
                t[0] += 1;
                t[i + 1] -= 1;
                if let Some(j) = basis.position(&t) {
                    let amp = m.eta * ((s[0] as f64 + 1.0) * ni as f64).sqrt();
                    h[(j, k)] += amp;
                    h[(k, j)] += amp.conj();
                }
            }
        }
    }
    Ok(h)
}

/// Total excitation number `b†b + Σ a_i†a_i`, diagonal in the basis.
pub fn total_excitation(spec: &JointSpec) -> Vec<f64> {
    spec.basis
        .states
        .iter()
        .map(|s| s.iter().sum::<usize>() as f64)
        .collect()
}

/// `σ_A ⊗ ⊗_i ρ_th,i` with per-mode truncated thermal states at the spec's β.
///
/// Fails if more than [`DISCARDED_WEIGHT_TOL`] of the weight lies outside an
/// excitation-capped basis.
pub fn product_initial_state(spec: &JointSpec, sigma_a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let ds = spec.system.dim();
    if sigma_a.nrows() != ds || sigma_a.ncols() != ds {
        return Err(Error::DimensionMismatch {
            context: "product_initial_state",
            expected: ds,
            found: sigma_a.nrows(),
        });
    }
    let bath: Vec<Vec<f64>> = spec
        .modes
        .iter()
        .map(|m| thermal_weights(m.omega, spec.beta, spec.hbar, m.space.n_max()).map(|w| w.weights().to_vec()))
        .collect::<Result<_>>()?;
    let d = spec.dim();
    let mut rho = ComplexMatrix::zeros(d, d);
    for (k, s) in spec.basis.states.iter().enumerate() {
        let p: f64 = bath.iter().enumerate().map(|(i, w)| w[s[i + 1]]).product();
        if p == 0.0 {
            continue;
        }
        for (l, t) in spec.basis.states.iter().enumerate() {
            if s[1..] == t[1..] {
                rho[(k, l)] = sigma_a[(s[0], t[0])] * p;
            }
        }
    }
    let kept = rho.trace().re;
    let total = sigma_a.trace().re;
    if (total - kept).abs() > DISCARDED_WEIGHT_TOL {
        return Err(invalid(
            "initial state",
            format!(
                "{:e} of the weight lies outside the excitation-capped basis",
                total - kept
            ),
        ));
    }
    Ok(rho)
}

/// Reduced system state `Tr_R ρ`.
pub fn reduce_to_system(spec: &JointSpec, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = spec.dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "reduce_to_system",
            expected: d,
            found: rho.nrows(),
        });
    }
    let ds = spec.system.dim();
    // Ordered map: the summation order, and so the last bits, must not vary between runs.
    let mut groups: BTreeMap<&[usize], Vec<(usize, usize)>> = BTreeMap::new();
    for (k, s) in spec.basis.states.iter().enumerate() {
        groups.entry(&s[1..]).or_default().push((s[0], k));
    }
    let mut sigma = ComplexMatrix::zeros(ds, ds);
    for members in groups.values() {
        for &(n, k) in members {
            for &(m, l) in members {
                sigma[(n, m)] += rho[(k, l)];
            }
        }
    }
    Ok(sigma)
}

/// Output of an exact evolution.
#[derive(Debug, Clone, Default)]
pub struct ExactEvolution {
    pub times: Vec<f64>,
    /// `σ(t) = Tr_R ρ(t)`
    pub reduced: Vec<ComplexMatrix>,
    /// `Tr ρ(t)²` of the joint state.
    pub joint_purity: Vec<f64>,
    /// `⟨b†b + Σ a_i†a_i⟩`
    pub total_excitation: Vec<f64>,
    pub joint_trace: Vec<f64>,
}

impl ExactEvolution {
    pub fn mean_n(&self) -> Vec<f64> {
        self.reduced
            .iter()
            .map(|s| s.diagonal().iter().enumerate().map(|(n, p)| n as f64 * p.re).sum())
            .collect()
    }
}

/// `ρ(t) = e^{−iHt/ħ} ρ₀ e^{iHt/ħ}` on the grid `0, dt, …` up to `t_final`,
/// from a single eigendecomposition of `H`.
pub fn evolve_exact(spec: &JointSpec, rho0: &ComplexMatrix, t_final: f64, dt: f64) -> Result<ExactEvolution> {
    let d = spec.dim();
    if rho0.nrows() != d || rho0.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "evolve_exact",
            expected: d,
            found: rho0.nrows(),
        });
    }
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(invalid("dt", "need dt > 0 and t_final >= 0"));
    }
    let h = build_hamiltonian(spec)?;
    let defect = hermiticity_defect(&h);
    if defect > HAMILTONIAN_HERMITICITY_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let eig = SymmetricEigen::new(h);
    let u = eig.eigenvectors;
    let energies = eig.eigenvalues;
    let ud = u.adjoint();
    let rho_eig = &ud * rho0 * &u;
    let excitation = total_excitation(spec);

    let steps = (t_final / dt).round() as usize;
    let mut out = ExactEvolution::default();
    let mut phased = ComplexMatrix::zeros(d, d);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let phases: Vec<C64> = energies
            .iter()
            .map(|e| C64::new(0.0, -e * t / spec.hbar).exp())
            .collect();
        for j in 0..d {
            for l in 0..d {
                phased[(j, l)] = rho_eig[(j, l)] * phases[j] * phases[l].conj();
            }
        }
        let rho_t = &u * &phased * &ud;
        let n_tot: f64 = rho_t.diagonal().iter().zip(&excitation).map(|(p, n)| p.re * n).sum();
        out.times.push(t);
        out.joint_trace.push(rho_t.trace().re);
        out.joint_purity.push(purity(&rho_t));
        out.total_excitation.push(n_tot);
        out.reduced.push(reduce_to_system(spec, &rho_t)?);
    }
    Ok(out)
}

/// Exact-versus-master-equation comparison on a common time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub times: Vec<f64>,
    /// `½‖σ_exact − σ_model‖₁` per sample.
    pub trace_distance: Vec<f64>,
    pub exact_mean_n: Vec<f64>,
    pub model_mean_n: Vec<f64>,
    /// Samples with `t` inside the comparison window.
    pub window_end: f64,
    /// Max trace distance inside the window.
    pub max_error: f64,
    pub recurrence_time_estimate: f64,
    /// Exponential decay rate of `⟨n⟩ − n̄` fitted to the exact run inside the window.
    pub gamma_fit: f64,
}

/// Fitted `γ` in `⟨n⟩(t) − n̄ ≈ A e^{−γt}` over samples with `t ≤ t_max`.
/// Samples where `|⟨n⟩ − n̄|` has fallen below `1e-6` of its initial value are
/// dropped before taking logarithms.
pub fn fit_decay_rate(times: &[f64], mean_n: &[f64], n_inf: f64, t_max: f64) -> Result<f64> {
    let a0 = (mean_n.first().copied().unwrap_or(n_inf) - n_inf).abs();
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(mean_n)
        .filter(|(t, n)| **t <= t_max && (**n - n_inf).abs() > 1e-6 * a0)
        .map(|(t, n)| (*t, (n - n_inf).abs().ln()))
        .unzip();
    if x.len() < 3 {
        return Err(invalid("samples", "fewer than three usable samples for the decay fit"));
    }
    Ok(-linear_fit(&x, &y).0)
}

/// Trace distance per sample, the windowed maximum and the fitted decay rate.
///
/// `n̄ = Γ′/Γ` of the master equation is the asymptote used for the fit. The
/// window is `t ≤ WINDOW_FRACTION · 2π/δω`, capped by the last sample.
pub fn compare_with_master(
    spec: &JointSpec,
    master: &MasterEquationSpec,
    exact: &ExactEvolution,
    model: &Trajectory,
) -> Result<ComparisonReport> {
    if exact.times.len() != model.times.len() {
        return Err(Error::GridMismatch(format!(
            "{} exact samples vs {} model samples",
            exact.times.len(),
            model.times.len()
        )));
    }
    for (a, b) in exact.times.iter().zip(&model.times) {
        if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
            return Err(Error::GridMismatch(format!("sample times {a} and {b} differ")));
        }
    }
    if master.space() != spec.system() {
        return Err(Error::DimensionMismatch {
            context: "compare_with_master system space",
            expected: spec.system().dim(),
            found: master.space().dim(),
        });
    }
    let trace_dist: Vec<f64> = exact
        .reduced
        .iter()
        .zip(&model.states)
        .map(|(a, b)| trace_distance(a, b))
        .collect();
    let recurrence = spec.recurrence_time();
    let window_end = (WINDOW_FRACTION * recurrence).min(*exact.times.last().unwrap_or(&0.0));
    let max_error = exact
        .times
        .iter()
        .zip(&trace_dist)
        .filter(|(t, _)| **t <= window_end)
        .map(|(_, e)| *e)
        .fold(0.0, f64::max);
    let rates = master.rates();
    let n_inf = if rates.gamma > 0.0 {
        rates.gamma_prime / rates.gamma
    } else {
        0.0
    };
    let exact_mean_n = exact.mean_n();
    let gamma_fit = fit_decay_rate(&exact.times, &exact_mean_n, n_inf, window_end)?;
    Ok(ComparisonReport {
        times: exact.times.clone(),
        trace_distance: trace_dist,
        exact_mean_n,
        model_mean_n: model.mean_n(),
        window_end,
        max_error,
        recurrence_time_estimate: recurrence,
        gamma_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{embed, lowering, number};
    use crate::linalg::{hermitian_eigenvalues, max_abs, max_abs_diff};

    fn modes(list: &[(f64, f64)], n_max: usize) -> Vec<JointMode> {
        list.iter()
            .map(|&(omega, eta)| JointMode {
                omega,
                eta: C64::new(eta, 0.0),
                space: FockSpace::new(n_max).unwrap(),
            })
            .collect()
    }

    fn small_spec(cap: Option<usize>) -> JointSpec {
        JointSpec::new(
            FockSpace::new(2).unwrap(),
            modes(&[(0.9, 0.05), (1.1, 0.07)], 2),
            1.0,
            1.0,
            2.0,
            cap,
            DEFAULT_DIM_CAP,
        )
        .unwrap()
    }

    /// The same Hamiltonian assembled from Kronecker products.
    fn kron_hamiltonian(spec: &JointSpec) -> ComplexMatrix {
        let dims = spec.basis().dims().to_vec();
        let cap = DEFAULT_DIM_CAP;
        let b = lowering(spec.system());
        let mut h = embed(
            &(number(spec.system()) + ComplexMatrix::identity(dims[0], dims[0]) * c(0.5)),
            &dims,
            0,
            cap,
        )
        .unwrap()
            * c(spec.hbar() * spec.omega0());
        for (i, m) in spec.modes().iter().enumerate() {
            let a = lowering(m.space);
            let na = number(m.space) + ComplexMatrix::identity(dims[i + 1], dims[i + 1]) * c(0.5);
            h += embed(&na, &dims, i + 1, cap).unwrap() * c(spec.hbar() * m.omega);
            let bd_a = embed(&b.adjoint(), &dims, 0, cap).unwrap() * embed(&a, &dims, i + 1, cap).unwrap();
            h += &bd_a * m.eta + bd_a.adjoint() * m.eta.conj() * c(1.0);
        }
        h
    }

    #[test]
    fn hamiltonian_matches_kron_construction() {
        let spec = small_spec(None);
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h.nrows(), 27);
        assert!(max_abs_diff(&h, &kron_hamiltonian(&spec)) < 1e-14);
        assert!(hermiticity_defect(&h) == 0.0);
    }

    #[test]
    fn hamiltonian_commutes_with_excitation_number() {
        let spec = small_spec(None);
        let h = build_hamiltonian(&spec).unwrap();
        let n = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            spec.dim(),
            total_excitation(&spec).into_iter().map(c),
        ));
        assert!(max_abs(&(&h * &n - &n * &h)) < 1e-12);
    }

    #[test]
    fn decoupled_spectrum_is_sum_of_ladders() {
        let spec = JointSpec::new(
            FockSpace::new(1).unwrap(),
            modes(&[(1.3, 0.0)], 1),
            1.0,
            1.0,
            1.0,
            None,
            64,
        )
        .unwrap();
        let ev = hermitian_eigenvalues(&build_hamiltonian(&spec).unwrap());
        let mut expect = vec![0.5 + 0.65, 1.5 + 0.65, 0.5 + 1.95, 1.5 + 1.95];
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn resonant_single_excitation_splitting() {
        let eta = 0.04;
        let spec = JointSpec::new(
            FockSpace::new(1).unwrap(),
            modes(&[(1.0, eta)], 1),
            1.0,
            1.0,
            f64::INFINITY,
            Some(1),
            64,
        )
        .unwrap();
        assert_eq!(spec.dim(), 3);
        let ev = hermitian_eigenvalues(&build_hamiltonian(&spec).unwrap());
        // Ground |0,0⟩ at 1.0, then the split pair 2.0 ± η.
        assert!((ev[2] - ev[1] - 2.0 * eta).abs() < 1e-14);
    }

    #[test]
    fn excitation_cap_counts_states() {
        let spec = JointSpec::new(
            FockSpace::new(3).unwrap(),
            modes(&[(0.9, 0.1), (1.0, 0.1), (1.1, 0.1)], 3),
            1.0,
            1.0,
            1.0,
            Some(2),
            DEFAULT_DIM_CAP,
        )
        .unwrap();
        // States of four oscillators with at most two quanta: C(4+2, 2) = 15.
        assert_eq!(spec.dim(), 15);
        let err = JointSpec::new(
            FockSpace::new(3).unwrap(),
            modes(&[(1.0, 0.1); 6], 3),
            1.0,
            1.0,
            1.0,
            None,
            DEFAULT_DIM_CAP,
        );
        assert!(matches!(err, Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn capped_basis_reproduces_full_dynamics_at_zero_temperature() {
        let full = JointSpec::new(
            FockSpace::new(2).unwrap(),
            modes(&[(0.9, 0.05), (1.1, 0.07)], 2),
            1.0,
            1.0,
            f64::INFINITY,
            None,
            DEFAULT_DIM_CAP,
        )
        .unwrap();
        let capped = JointSpec::new(
            FockSpace::new(2).unwrap(),
            modes(&[(0.9, 0.05), (1.1, 0.07)], 2),
            1.0,
            1.0,
            f64::INFINITY,
            Some(2),
            DEFAULT_DIM_CAP,
        )
        .unwrap();
        let sigma_a = crate::lindblad::pure_state(FockSpace::new(2).unwrap(), &[c(1.0), c(0.5), c(0.3)]).unwrap();
        let a = evolve_exact(&full, &product_initial_state(&full, &sigma_a).unwrap(), 30.0, 1.0).unwrap();
        let b = evolve_exact(&capped, &product_initial_state(&capped, &sigma_a).unwrap(), 30.0, 1.0).unwrap();
        for (x, y) in a.reduced.iter().zip(&b.reduced) {
            assert!(max_abs_diff(x, y) < 1e-12);
        }
    }

    #[test]
    fn capped_basis_rejects_thermal_bath() {
        let spec = small_spec(Some(1));
        let sigma_a = crate::lindblad::fock_state(spec.system(), 0).unwrap();
        assert!(product_initial_state(&spec, &sigma_a).is_err());
    }

    #[test]
    fn reduce_matches_partial_trace_on_full_basis() {
        let spec = small_spec(None);
        let sigma_a = crate::lindblad::coherent_state(spec.system(), C64::new(0.4, 0.2)).unwrap();
        let rho = product_initial_state(&spec, &sigma_a).unwrap();
        let a = reduce_to_system(&spec, &rho).unwrap();
        let b = crate::fock::partial_trace(&rho, spec.basis().dims(), &[0]).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-15);
        assert!(max_abs_diff(&a, &sigma_a) < 1e-14);
    }

    #[test]
    fn decoupled_evolution_is_free_rotation() {
        let spec = JointSpec::new(
            FockSpace::new(3).unwrap(),
            modes(&[(0.8, 0.0), (1.2, 0.0)], 2),
            1.0,
            1.0,
            1.5,
            None,
            DEFAULT_DIM_CAP,
        )
        .unwrap();
        let sigma_a = crate::lindblad::pure_state(spec.system(), &[c(1.0), c(1.0)]).unwrap();
        let rho0 = product_initial_state(&spec, &sigma_a).unwrap();
        let ev = evolve_exact(&spec, &rho0, 5.0, 0.5).unwrap();
        for (t, s) in ev.times.iter().zip(&ev.reduced) {
            assert!((s[(0, 0)].re - 0.5).abs() < 1e-13);
            let expect = C64::new(0.0, *t).exp() * 0.5;
            assert!((s[(0, 1)] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn resonant_rabi_oscillation() {
        let eta = 0.05;
        let spec = JointSpec::new(
            FockSpace::new(1).unwrap(),
            modes(&[(1.0, eta)], 1),
            1.0,
            1.0,
            f64::INFINITY,
            Some(1),
            64,
        )
        .unwrap();
        let sigma_a = crate::lindblad::fock_state(spec.system(), 1).unwrap();
        let rho0 = product_initial_state(&spec, &sigma_a).unwrap();
        let ev = evolve_exact(&spec, &rho0, 100.0, 0.5).unwrap();
        for (t, s) in ev.times.iter().zip(&ev.reduced) {
            // P1 = cos²(|η|t/ħ): population oscillates at 2|η|/ħ.
            assert!((s[(1, 1)].re - (eta * t).cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn unitarity_witnesses() {
        let spec = small_spec(None);
        let sigma_a = crate::lindblad::coherent_state(spec.system(), C64::new(0.5, 0.0)).unwrap();
        let rho0 = product_initial_state(&spec, &sigma_a).unwrap();
        let ev = evolve_exact(&spec, &rho0, 40.0, 2.0).unwrap();
        for k in 0..ev.times.len() {
            assert!((ev.joint_purity[k] - ev.joint_purity[0]).abs() < 1e-10);
            assert!((ev.total_excitation[k] - ev.total_excitation[0]).abs() < 1e-10);
            assert!((ev.joint_trace[k] - 1.0).abs() < 1e-12);
            let s = &ev.reduced[k];
            assert!((s.trace().re - 1.0).abs() < 1e-12);
            assert!(hermitian_eigenvalues(s)[0] > -1e-10);
        }
    }

    #[test]
    fn comparison_rejects_mismatched_grids() {
        let spec = small_spec(None);
        let master = MasterEquationSpec::new(
            spec.system(),
            1.0,
            crate::reservoir::ReservoirRates::direct(0.01, 0.0, 0.0).unwrap(),
            1.0,
        )
        .unwrap();
        let exact = ExactEvolution {
            times: vec![0.0, 1.0],
            ..Default::default()
        };
        let model = Trajectory {
            times: vec![0.0],
            ..Default::default()
        };
        assert!(matches!(
            compare_with_master(&spec, &master, &exact, &model),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let n: Vec<f64> = t.iter().map(|x| 0.3 + 2.0 * (-0.7 * x).exp()).collect();
        assert!((fit_decay_rate(&t, &n, 0.3, 10.0).unwrap() - 0.7).abs() < 1e-12);
    }
}
