// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Master equation of the damped oscillator on a truncated Fock space:
//!
//! ```text
//! dσ/dt = −(Γ/2){σ, b†b} − Γ′{σ, b†b} − Γ′σ − i(ω₀+Δ)[b†b, σ]
//!         + Γ bσb† + Γ′(b†σb + bσb†)
//! ```
//!
//! With `bb† = b†b + 1` the anticommutator terms regroup into the standard
//! Lindblad form with lowering rate `Γ + Γ′` and raising rate `Γ′`:
//!
//! ```text
//! dσ/dt = −i(ω₀+Δ)[b†b, σ] + (Γ+Γ′) D[b]σ + Γ′ D[b†]σ,
//! D[L]σ = LσL† − ½{L†L, σ}.
//! ```
//!
//! On the truncated space `bb† = b†b + 1 − (n_max+1)|n_max⟩⟨n_max|`, so the
//! two forms differ by `−½Γ′(n_max+1){|n_max⟩⟨n_max|, σ}`. [`generator`]
//! implements the first form term by term; its trace defect is
//! `−Γ′(n_max+1)⟨n_max|σ|n_max⟩`, i.e. of the order of the top-level
//! population. [`lindblad_form`] is exactly trace preserving.
//!
//! Tracing `b†b` against the first form gives `d⟨n⟩/dt = −Γ⟨n⟩ + Γ′`, hence
//! `⟨n⟩(t) = n̄ + (n₀ − n̄)e^{−Γt}` with `n̄ = Γ′/Γ`; detailed balance of the
//! diagonal flow gives `σ_{n+1,n+1}/σ_{nn} = Γ′/(Γ+Γ′) = n̄/(n̄+1)`.

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::fock::{fock_projector, lowering, number, FockSpace};
use crate::linalg::{
    anticommutator, c, commutator, hermiticity_defect, max_abs, min_eigenvalue, purity, symmetrize, trace_of_product,
    unvectorize, vectorize, ComplexMatrix, ComplexVector, C64, I,
};
use crate::reservoir::ReservoirRates;
use crate::sma::check_density;

/// Bound on `dt (Γ + 2Γ′) n_max` for the fixed-step integrator.
pub const STABILITY_BOUND: f64 = 0.1;
/// Trace drift or negative eigenvalue beyond this aborts an integration.
pub const ABORT_TOL: f64 = 1e-6;
/// Acceptance tolerance for the initial density matrix.
pub const INITIAL_STATE_TOL: f64 = 1e-8;

/// Coefficients and operators of the master equation.
#[derive(Debug, Clone)]
pub struct MasterEquationSpec {
    space: FockSpace,
    omega0: f64,
    rates: ReservoirRates,
    hbar: f64,
    b: ComplexMatrix,
    b_dag: ComplexMatrix,
    n: ComplexMatrix,
}

impl MasterEquationSpec {
    pub fn new(space: FockSpace, omega0: f64, rates: ReservoirRates, hbar: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(invalid("omega0", format!("must be positive, got {omega0}")));
        }
        if !(rates.gamma >= 0.0) || !(rates.gamma_prime >= 0.0) {
            return Err(invalid(
                "rates",
                format!("gamma = {}, gamma' = {} must be >= 0", rates.gamma, rates.gamma_prime),
            ));
        }
        if !rates.delta.is_finite() {
            return Err(invalid("rates", "delta must be finite"));
        }
        if !(hbar > 0.0) {
            return Err(invalid("hbar", "must be positive"));
        }
        let b = lowering(space);
        Ok(Self {
            space,
            omega0,
            rates,
            hbar,
            b_dag: b.adjoint(),
            n: number(space),
            b,
        })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn rates(&self) -> &ReservoirRates {
        &self.rates
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `ω₀ + Δ`, the precession frequency of coherences.
    pub fn shifted_frequency(&self) -> f64 {
        self.omega0 + self.rates.delta
    }

    pub fn number_operator(&self) -> &ComplexMatrix {
        &self.n
    }

    fn check_dim(&self, sigma: &ComplexMatrix) -> Result<()> {
        let d = self.space.dim();
        if sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "master equation state",
                expected: d,
                found: sigma.nrows(),
            });
        }
        Ok(())
    }

    /// Elementwise evaluation; `b` only shifts indices, so every term is O(dim²):
    /// `{σ,N}_ij = (i+j)σ_ij`, `[N,σ]_ij = (i−j)σ_ij`,
    /// `(bσb†)_ij = √((i+1)(j+1)) σ_{i+1,j+1}`, `(b†σb)_ij = √(ij) σ_{i−1,j−1}`.
    fn apply(&self, sigma: &ComplexMatrix) -> ComplexMatrix {
        let ReservoirRates { gamma, gamma_prime, .. } = self.rates;
        let d = self.space.dim();
        let w = self.shifted_frequency();
        let down_rate = gamma + gamma_prime;
        let anti = 0.5 * gamma + gamma_prime;
        ComplexMatrix::from_fn(d, d, |i, j| {
            let (fi, fj) = (i as f64, j as f64);
            let s = sigma[(i, j)];
            let mut out = s * C64::new(-anti * (fi + fj) - gamma_prime, -w * (fi - fj));
            if i + 1 < d && j + 1 < d {
                out += sigma[(i + 1, j + 1)] * (down_rate * ((fi + 1.0) * (fj + 1.0)).sqrt());
            }
            if i > 0 && j > 0 {
                out += sigma[(i - 1, j - 1)] * (gamma_prime * (fi * fj).sqrt());
            }
            out
        })
    }

    /// The same right-hand side from dense operator products.
    #[cfg(test)]
    fn apply_dense(&self, sigma: &ComplexMatrix) -> ComplexMatrix {
        let ReservoirRates { gamma, gamma_prime, .. } = self.rates;
        let (b, bd, n) = (&self.b, &self.b_dag, &self.n);
        let mut out = anticommutator(sigma, n) * c(-(0.5 * gamma + gamma_prime));
        out -= sigma * c(gamma_prime);
        out -= commutator(n, sigma) * (I * self.shifted_frequency());
        out += b * sigma * bd * c(gamma + gamma_prime);
        out += bd * sigma * b * c(gamma_prime);
        out
    }
}

/// Right-hand side of the master equation, term by term as written above.
pub fn generator(spec: &MasterEquationSpec, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
    spec.check_dim(sigma)?;
    Ok(spec.apply(sigma))
}

/// `L σ L† − ½{L†L, σ}`
pub fn dissipator(l: &ComplexMatrix, sigma: &ComplexMatrix) -> ComplexMatrix {
    let ld = l.adjoint();
    let ldl = &ld * l;
    l * sigma * &ld - anticommutator(&ldl, sigma) * c(0.5)
}

/// The same dynamics written in standard Lindblad form.
pub fn lindblad_form(spec: &MasterEquationSpec, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
    spec.check_dim(sigma)?;
    let ReservoirRates { gamma, gamma_prime, .. } = spec.rates;
    Ok(commutator(&spec.n, sigma) * (-I * spec.shifted_frequency())
        + dissipator(&spec.b, sigma) * c(gamma + gamma_prime)
        + dissipator(&spec.b_dag, sigma) * c(gamma_prime))
}

/// `Tr(dσ/dt)` lost through the truncation boundary:
/// `−Γ′(n_max+1)⟨n_max|σ|n_max⟩`.
pub fn boundary_trace_defect(spec: &MasterEquationSpec, sigma: &ComplexMatrix) -> f64 {
    let top = spec.space.n_max();
    -spec.rates.gamma_prime * (top as f64 + 1.0) * sigma[(top, top)].re
}

/// Column-stacked superoperator: `vec(generator(σ)) = L vec(σ)`.
pub fn vectorized_generator(spec: &MasterEquationSpec) -> ComplexMatrix {
    let d = spec.space.dim();
    let mut l = ComplexMatrix::zeros(d * d, d * d);
    let mut unit = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            unit[(i, j)] = c(1.0);
            let col = vectorize(&spec.apply(&unit));
            l.set_column(i + d * j, &col);
            unit[(i, j)] = c(0.0);
        }
    }
    l
}

/// Samples of derived quantities along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub trace: f64,
    pub mean_n: f64,
    pub purity: f64,
    pub min_eigenvalue: f64,
    /// `⟨0|σ|1⟩`
    pub coherence01: C64,
}

impl Observables {
    pub fn of(sigma: &ComplexMatrix, n: &ComplexMatrix) -> Self {
        Self {
            trace: sigma.trace().re,
            mean_n: trace_of_product(sigma, n).re,
            purity: purity(sigma),
            min_eigenvalue: min_eigenvalue(sigma),
            coherence01: sigma[(0, 1)],
        }
    }
}

/// Time series of density matrices and their observables.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    pub observables: Vec<Observables>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mean_n(&self) -> Vec<f64> {
        self.observables.iter().map(|o| o.mean_n).collect()
    }

    pub fn final_state(&self) -> Option<&ComplexMatrix> {
        self.states.last()
    }

    /// Largest `|Tr σ − 1|` over the samples.
    pub fn max_trace_drift(&self) -> f64 {
        self.observables
            .iter()
            .map(|o| (o.trace - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.observables
            .iter()
            .map(|o| o.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

fn rk4_step(spec: &MasterEquationSpec, sigma: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let h = c(dt);
    let half = c(0.5 * dt);
    let k1 = spec.apply(sigma);
    let k2 = spec.apply(&(sigma + &k1 * half));
    let k3 = spec.apply(&(sigma + &k2 * half));
    let k4 = spec.apply(&(sigma + &k3 * h));
    sigma + (k1 + (k2 + k3) * c(2.0) + k4) * (h / c(6.0))
}

/// Fixed-step fourth-order Runge-Kutta integration.
///
/// Takes `round(t_final / dt)` steps; samples every `sample_every` steps and
/// always the final state. Each step is followed by `σ ← (σ + σ†)/2`.
pub fn evolve(
    spec: &MasterEquationSpec,
    sigma0: &ComplexMatrix,
    t_final: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    spec.check_dim(sigma0)?;
    check_density(sigma0, INITIAL_STATE_TOL)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(invalid("t_final", format!("must be >= 0, got {t_final}")));
    }
    if sample_every == 0 {
        return Err(invalid("sample_every", "must be at least 1"));
    }
    let stiffness = dt * (spec.rates.gamma + 2.0 * spec.rates.gamma_prime) * spec.space.n_max() as f64;
    if stiffness >= STABILITY_BOUND {
        return Err(Error::StepTooLarge {
            value: stiffness,
            bound: STABILITY_BOUND,
        });
    }

    let steps = (t_final / dt).round() as usize;
    let mut traj = Trajectory::default();
    let mut sigma = symmetrize(sigma0);
    record(&mut traj, spec, 0.0, &sigma)?;
    for k in 1..=steps {
        sigma = symmetrize(&rk4_step(spec, &sigma, dt));
        if k % sample_every == 0 || k == steps {
            record(&mut traj, spec, k as f64 * dt, &sigma)?;
        }
    }
    Ok(traj)
}

fn record(traj: &mut Trajectory, spec: &MasterEquationSpec, t: f64, sigma: &ComplexMatrix) -> Result<()> {
    if !crate::linalg::all_finite(sigma) {
        return Err(Error::NonFinite("master equation integration"));
    }
    let obs = Observables::of(sigma, &spec.n);
    let drift = (obs.trace - 1.0).abs();
    if drift > ABORT_TOL || obs.min_eigenvalue < -ABORT_TOL {
        return Err(Error::IntegrationDiverged {
            time: t,
            trace_drift: drift,
            min_eigenvalue: obs.min_eigenvalue,
        });
    }
    traj.times.push(t);
    traj.states.push(sigma.clone());
    traj.observables.push(obs);
    Ok(())
}

/// Steady state with the diagnostics of its null-space extraction.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub state: ComplexMatrix,
    /// `max |generator(σ_ss)|`
    pub residual: f64,
    pub smallest_singular_value: f64,
    pub next_singular_value: f64,
}

impl SteadyState {
    pub fn mean_n(&self) -> f64 {
        self.state
            .diagonal()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p.re)
            .sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.state.diagonal().iter().map(|p| p.re).collect()
    }
}

/// Relative singular-value threshold below which a direction counts as null.
pub const NULL_SPACE_RTOL: f64 = 1e-9;

/// Null vector of the vectorized generator, normalized to unit trace.
///
/// The generator maps each coherence order `k = m − n` of `|n⟩⟨m|` onto
/// itself, so after permuting the `dim²` basis by `k` the dense superoperator
/// is block diagonal and its singular values are the union of the blocks'
/// singular values. The block structure is verified on the dense matrix; if
/// it does not hold the whole matrix is decomposed instead.
pub fn steady_state(spec: &MasterEquationSpec) -> Result<SteadyState> {
    if !(spec.rates.gamma > 0.0) {
        return Err(invalid("gamma", "steady state requires gamma > 0"));
    }
    let d = spec.space.dim();
    let l = vectorized_generator(spec);
    let blocks = coherence_blocks(d);
    let candidates: Vec<(f64, ComplexVector)> = if is_block_diagonal(&l, &blocks, d) {
        blocks
            .iter()
            .flat_map(|idx| {
                let sub = ComplexMatrix::from_fn(idx.len(), idx.len(), |r, c| l[(idx[r], idx[c])]);
                singular_pairs(sub)
                    .into_iter()
                    .map(move |(s, v)| {
                        let mut full = ComplexVector::zeros(d * d);
                        for (k, &i) in idx.iter().enumerate() {
                            full[i] = v[k];
                        }
                        (s, full)
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    } else {
        singular_pairs(l)
    };

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[a].0.total_cmp(&candidates[b].0));
    let s_max = candidates[order[order.len() - 1]].0;
    let threshold = NULL_SPACE_RTOL * s_max;
    let smallest = candidates[order[0]].0;
    let next = candidates[order[1]].0;
    let count = order.iter().take_while(|&&k| candidates[k].0 <= threshold).count();
    if count > 1 {
        return Err(Error::DegenerateNullSpace {
            count,
            threshold,
            smallest,
            next,
        });
    }
    let raw = unvectorize(&candidates[order[0]].1, d);
    let tr = raw.trace();
    if tr.norm() < 1e-300 {
        return Err(invalid("steady state", "null vector has zero trace"));
    }
    let state = symmetrize(&(raw / tr));
    let residual = max_abs(&spec.apply(&state));
    Ok(SteadyState {
        state,
        residual,
        smallest_singular_value: smallest,
        next_singular_value: next,
    })
}

/// Singular values with their right singular vectors.
fn singular_pairs(m: ComplexMatrix) -> Vec<(f64, ComplexVector)> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    // Rows of v_t are v_k†.
    svd.singular_values
        .iter()
        .enumerate()
        .map(|(k, &s)| (s, v_t.row(k).adjoint()))
        .collect()
}

/// Column-stacked indices `i + d*j` grouped by coherence order `j − i`.
fn coherence_blocks(d: usize) -> Vec<Vec<usize>> {
    let mut blocks = vec![Vec::new(); 2 * d - 1];
    for j in 0..d {
        for i in 0..d {
            blocks[j + d - 1 - i].push(i + d * j);
        }
    }
    blocks
}

fn is_block_diagonal(l: &ComplexMatrix, blocks: &[Vec<usize>], d: usize) -> bool {
    let mut block_of = vec![0usize; d * d];
    for (b, idx) in blocks.iter().enumerate() {
        for &i in idx {
            block_of[i] = b;
        }
    }
    l.column_iter().enumerate().all(|(c, col)| {
        col.iter()
            .enumerate()
            .all(|(r, z)| block_of[r] == block_of[c] || *z == C64::new(0.0, 0.0))
    })
}

/// Detailed-balance populations of the untruncated flow,
/// `p_n ∝ (Γ′/(Γ+Γ′))ⁿ`, renormalized on the truncated ladder.
pub fn detailed_balance_populations(rates: &ReservoirRates, space: FockSpace) -> Vec<f64> {
    let r = rates.gamma_prime / (rates.gamma + rates.gamma_prime);
    let raw: Vec<f64> = (0..space.dim()).map(|n| r.powi(n as i32)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / s).collect()
}

/// `|n⟩⟨n|`
pub fn fock_state(space: FockSpace, n: usize) -> Result<ComplexMatrix> {
    if n > space.n_max() {
        return Err(invalid("n", format!("level {n} above n_max = {}", space.n_max())));
    }
    Ok(fock_projector(space, n))
}

/// Normalized pure state from (unnormalized) amplitudes in the number basis.
pub fn pure_state(space: FockSpace, amplitudes: &[C64]) -> Result<ComplexMatrix> {
    if amplitudes.len() > space.dim() {
        return Err(Error::DimensionMismatch {
            context: "pure_state amplitudes",
            expected: space.dim(),
            found: amplitudes.len(),
        });
    }
    let mut v = ComplexVector::zeros(space.dim());
    for (k, a) in amplitudes.iter().enumerate() {
        v[k] = *a;
    }
    let norm = v.norm();
    if !(norm > 0.0) {
        return Err(invalid("amplitudes", "state vector is zero"));
    }
    v /= c(norm);
    Ok(&v * v.adjoint())
}

/// Coherent state `|α⟩` truncated to the space and renormalized.
pub fn coherent_state(space: FockSpace, alpha: C64) -> Result<ComplexMatrix> {
    let mut amps = Vec::with_capacity(space.dim());
    let mut term = c((-0.5 * alpha.norm_sqr()).exp());
    for n in 0..space.dim() {
        if n > 0 {
            term *= alpha / c((n as f64).sqrt());
        }
        amps.push(term);
    }
    pure_state(space, &amps)
}

/// Least-squares slope of the unwrapped phase of `z(t)`, with the sign
/// flipped so that `z ∝ e^{+iωt}` reports `ω`.
pub fn precession_frequency(times: &[f64], z: &[C64]) -> Result<f64> {
    if times.len() != z.len() || times.len() < 3 {
        return Err(invalid("samples", "need at least three matching samples"));
    }
    let mut phases = Vec::with_capacity(z.len());
    let mut prev = z[0].arg();
    let mut offset = 0.0;
    for w in z {
        let mut p = w.arg() + offset;
        while p - prev > std::f64::consts::PI {
            p -= 2.0 * std::f64::consts::PI;
            offset -= 2.0 * std::f64::consts::PI;
        }
        while p - prev < -std::f64::consts::PI {
            p += 2.0 * std::f64::consts::PI;
            offset += 2.0 * std::f64::consts::PI;
        }
        phases.push(p);
        prev = p;
    }
    Ok(linear_fit(times, &phases).0)
}

/// Ordinary least squares `y ≈ slope·x + intercept`; returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Diagonal of `σ` as a real vector.
pub fn populations(sigma: &ComplexMatrix) -> DVector<f64> {
    DVector::from_iterator(sigma.nrows(), sigma.diagonal().iter().map(|p| p.re))
}

/// Hermiticity defect of the generator output, exposed for diagnostics.
pub fn generator_hermiticity_defect(spec: &MasterEquationSpec, sigma: &ComplexMatrix) -> Result<f64> {
    Ok(hermiticity_defect(&generator(spec, sigma)?))
}
