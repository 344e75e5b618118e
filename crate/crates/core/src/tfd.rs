// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Thermal weights, the doubled (tilde) Fock space and the thermal vacuum
//! `|0(β)⟩ = Σ_n √Π(E_n) |n, ñ⟩`.
//!
//! Doubled-space vectors are ordered non-tilde factor first: component
//! `n * dim + m` is the amplitude of `|n⟩ ⊗ |m̃⟩`. The partition sum runs over
//! the truncated ladder only, so the vacuum is exactly normalized in the
//! truncated space and `⟨b†b⟩` differs from the Bose-Einstein value by the
//! discarded tail.

use crate::error::{invalid, Error, Result};
use crate::fock::{partial_trace, FockSpace};
use crate::linalg::{basis_vector, c, hermiticity_defect, max_abs_diff, outer, ComplexMatrix, ComplexVector, C64};
use crate::sma::{density_operator, LabeledBasis, MeasurementSymbol, MixtureWeights, HERMITICITY_TOL};

/// Canonical weights `Π(E_n) = e^{−βE_n} / Z` on a truncated ladder with
/// `E_n = ħω₀(n + ½)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalWeights {
    beta: f64,
    omega0: f64,
    hbar: f64,
    energies: Vec<f64>,
    weights: Vec<f64>,
    log_partition_sum: f64,
}

impl ThermalWeights {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln Z`; `Z` itself underflows long before the weights do.
    pub fn log_partition_sum(&self) -> f64 {
        self.log_partition_sum
    }

    pub fn partition_sum(&self) -> f64 {
        self.log_partition_sum.exp()
    }

    pub fn space(&self) -> FockSpace {
        FockSpace::new(self.weights.len() - 1).expect("weights always span at least two levels")
    }

    pub fn mixture(&self) -> MixtureWeights {
        MixtureWeights::new(self.weights.clone()).expect("thermal weights are normalized")
    }

    /// `Σ_n n Π(E_n)`.
    pub fn mean_occupation(&self) -> f64 {
        self.weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum()
    }

    /// `ρ = Σ_n Π(E_n) |n⟩⟨n|`, built through the measurement algebra.
    pub fn density_matrix(&self) -> ComplexMatrix {
        let basis = LabeledBasis::standard(self.weights.len()).expect("standard basis");
        density_operator(&basis, &self.mixture()).expect("matching dimensions")
    }
}

/// Canonical weights for one oscillator. `beta = f64::INFINITY` puts all
/// weight on the ground state.
pub fn thermal_weights(omega0: f64, beta: f64, hbar: f64, n_max: usize) -> Result<ThermalWeights> {
    let space = FockSpace::new(n_max)?;
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(invalid("omega0", format!("must be positive and finite, got {omega0}")));
    }
    if !(hbar > 0.0) {
        return Err(invalid("hbar", format!("must be positive, got {hbar}")));
    }
    if !(beta > 0.0) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    let dim = space.dim();
    let energies: Vec<f64> = (0..dim).map(|n| hbar * omega0 * (n as f64 + 0.5)).collect();
    let (weights, log_z) = if beta.is_infinite() {
        let mut w = vec![0.0; dim];
        w[0] = 1.0;
        (w, f64::NEG_INFINITY)
    } else {
        // Shift by the ground energy so the largest exponent is zero.
        let x = beta * hbar * omega0;
        let unnorm: Vec<f64> = (0..dim).map(|n| (-x * n as f64).exp()).collect();
        let s: f64 = unnorm.iter().sum();
        (unnorm.iter().map(|u| u / s).collect(), -beta * energies[0] + s.ln())
    };
    Ok(ThermalWeights {
        beta,
        omega0,
        hbar,
        energies,
        weights,
        log_partition_sum: log_z,
    })
}

/// `|0(β)⟩` in the doubled space `H ⊗ H̃`.
#[derive(Debug, Clone)]
pub struct ThermalVacuum {
    weights: ThermalWeights,
    amplitudes: ComplexVector,
}

impl ThermalVacuum {
    pub fn weights(&self) -> &ThermalWeights {
        &self.weights
    }

    pub fn beta(&self) -> f64 {
        self.weights.beta
    }

    pub fn omega0(&self) -> f64 {
        self.weights.omega0
    }

    /// Single-copy space.
    pub fn space(&self) -> FockSpace {
        self.weights.space()
    }

    /// Dimension of one copy; the doubled space has `dim²` components.
    pub fn dim(&self) -> usize {
        self.weights.weights.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    /// Amplitudes as a `dim × dim` matrix, rows indexing the non-tilde factor.
    pub fn amplitude_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |n, m| self.amplitudes[n * d + m])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `P = |0(β)⟩⟨0(β)|`.
    pub fn projector(&self) -> ComplexMatrix {
        outer(&self.amplitudes, &self.amplitudes)
    }
}

pub fn thermal_vacuum(weights: &ThermalWeights) -> ThermalVacuum {
    let d = weights.weights.len();
    let mut amplitudes = ComplexVector::zeros(d * d);
    for (n, w) in weights.weights.iter().enumerate() {
        amplitudes[n * d + n] = c(w.sqrt());
    }
    ThermalVacuum {
        weights: weights.clone(),
        amplitudes,
    }
}

/// Reshape a doubled-space vector `v[n*d + m]` into the matrix `V[n, m]`.
fn as_matrix(v: &ComplexVector, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |n, m| v[n * d + m])
}

/// `⟨0(β)| F ⊗ I |0(β)⟩` for any (not necessarily Hermitian) `F`.
pub fn tfd_expectation_complex(vac: &ThermalVacuum, f: &ComplexMatrix) -> Result<C64> {
    let d = vac.dim();
    if f.nrows() != d || f.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "tfd_expectation",
            expected: d,
            found: f.nrows(),
        });
    }
    // (F ⊗ I) v  <->  F V
    let v = as_matrix(&vac.amplitudes, d);
    let fv = f * &v;
    Ok(v.iter().zip(fv.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// `⟨0(β)| F ⊗ I |0(β)⟩` for a Hermitian observable `F`.
pub fn tfd_expectation(vac: &ThermalVacuum, f: &ComplexMatrix) -> Result<f64> {
    let defect = hermiticity_defect(f);
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(tfd_expectation_complex(vac, f)?.re)
}

/// `⟨0(β)| I ⊗ G̃ |0(β)⟩`, an observable acting on the tilde copy.
pub fn tilde_expectation(vac: &ThermalVacuum, g: &ComplexMatrix) -> Result<C64> {
    let d = vac.dim();
    if g.nrows() != d || g.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "tilde_expectation",
            expected: d,
            found: g.nrows(),
        });
    }
    // (I ⊗ G) v  <->  V Gᵀ
    let v = as_matrix(&vac.amplitudes, d);
    let vg = &v * g.transpose();
    Ok(v.iter().zip(vg.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// Defects of the purification identities for one thermal vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurificationReport {
    /// max |P² − P|
    pub projector_defect: f64,
    /// max |Tr_tilde P − ρ_thermal|
    pub reduction_defect: f64,
    /// Tr P
    pub trace: f64,
}

impl PurificationReport {
    pub fn defect(&self) -> f64 {
        self.projector_defect.max(self.reduction_defect)
    }
}

/// Builds `P = |0(β)⟩⟨0(β)|` and checks `P² = P` and `Tr_tilde P = ρ`.
pub fn purify_check(vac: &ThermalVacuum) -> PurificationReport {
    let d = vac.dim();
    let p = vac.projector();
    let projector_defect = max_abs_diff(&(&p * &p), &p);
    let reduced = partial_trace(&p, &[d, d], &[0]).expect("doubled space dimensions");
    let rho = vac.weights.density_matrix();
    PurificationReport {
        projector_defect,
        reduction_defect: max_abs_diff(&reduced, &rho),
        trace: p.trace().re,
    }
}

/// Label of a vector in the direct sum `H ⊕ H̃` carrying both the physical
/// number states and their tilde copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TfdLabel {
    Physical(usize),
    Tilde(usize),
}

/// Physical and tilde number states as one orthonormal basis of `H ⊕ H̃`
/// (ambient dimension `2 * dim`). Tilde states are mutually orthonormal and
/// orthogonal to the physical ones, which makes `⟨ñ|m̃⟩ = δ_nm`.
pub fn tilde_pair_basis(space: FockSpace) -> LabeledBasis<TfdLabel> {
    let d = space.dim();
    let labels = (0..d)
        .map(TfdLabel::Physical)
        .chain((0..d).map(TfdLabel::Tilde))
        .collect();
    let vectors = (0..2 * d).map(|k| basis_vector(2 * d, k)).collect();
    LabeledBasis::new(labels, vectors).expect("standard vectors are orthonormal")
}

/// Mixed symbol `M(n, ñ) = |n⟩⟨ñ|` in `H ⊕ H̃`.
///
/// Under the vectorization `|n⟩⟨m̃| ↦ |n⟩ ⊗ |m̃⟩` (see [`symbol_to_doubled_ket`])
/// these symbols become the doubled-space kets out of which `|0(β)⟩` is
/// assembled, and `M(n,ñ) M(m̃,m) = ⟨ñ|m̃⟩ M(n,m) = δ_nm M(n,m)`.
pub fn tilde_symbol(basis: &LabeledBasis<TfdLabel>, n: usize) -> Result<MeasurementSymbol<TfdLabel>> {
    basis.symbol(&TfdLabel::Physical(n), &TfdLabel::Tilde(n))
}

/// Maps `|n⟩⟨m̃|` to the doubled-space ket `|n⟩ ⊗ |m̃⟩` of dimension `dim²`.
pub fn symbol_to_doubled_ket(symbol: &MeasurementSymbol<TfdLabel>, space: FockSpace) -> Result<ComplexVector> {
    let d = space.dim();
    match (symbol.left_label, symbol.right_label) {
        (TfdLabel::Physical(n), TfdLabel::Tilde(m)) if n < d && m < d => Ok(basis_vector(d * d, n * d + m)),
        (l, r) => Err(invalid(
            "symbol",
            format!("expected M(physical, tilde) within dim {d}, got M({l:?}, {r:?})"),
        )),
    }
}

/// `Σ_n √Π(E_n) M(n, ñ)` as a matrix on `H ⊕ H̃`; its product with its
/// adjoint is the thermal state embedded in the physical block.
pub fn vacuum_factor(weights: &ThermalWeights) -> ComplexMatrix {
    let basis = tilde_pair_basis(weights.space());
    let d = 2 * weights.weights.len();
    let mut k = ComplexMatrix::zeros(d, d);
    for (n, w) in weights.weights.iter().enumerate() {
        let m = tilde_symbol(&basis, n).expect("label in range");
        k += m.matrix() * c(w.sqrt());
    }
    k
}

/// Mean occupation of one oscillator evaluated as `⟨0(β)|a†a|0(β)⟩`.
pub fn tfd_occupation(omega: f64, beta: f64, hbar: f64, n_max: usize) -> Result<f64> {
    let w = thermal_weights(omega, beta, hbar, n_max)?;
    let vac = thermal_vacuum(&w);
    tfd_expectation(&vac, &crate::fock::number(w.space()))
}

/// Discarded-tail comparison of the truncated `⟨b†b⟩` with `1/(e^{βħω}−1)`.
pub fn truncation_deviation(weights: &ThermalWeights) -> f64 {
    let x = weights.beta * weights.hbar * weights.omega0;
    let untruncated = if x.is_infinite() { 0.0 } else { 1.0 / x.exp_m1() };
    weights.mean_occupation() - untruncated
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{kron, lowering, number};
    use crate::linalg::{identity, max_abs};
    use crate::sma::{compose, statistical_mean};

    #[test]
    fn ground_state_freeze_out() {
        let w = thermal_weights(1.0, 200.0, 1.0, 10).unwrap();
        assert!((w.weights()[0] - 1.0).abs() < 1e-15);
        let w = thermal_weights(1.0, f64::INFINITY, 1.0, 10).unwrap();
        assert_eq!(w.weights()[0], 1.0);
        assert_eq!(w.mean_occupation(), 0.0);
    }

    #[test]
    fn ln2_ladder_is_geometric() {
        // βħω₀ = ln 2: Π_n = 2^{-n} / Σ_{k≤N} 2^{-k}, and Π_0 → 1/2 as N grows.
        let w = thermal_weights(1.0, std::f64::consts::LN_2, 1.0, 60).unwrap();
        let s: f64 = (0..=60).map(|k| 0.5f64.powi(k)).sum();
        for n in 0..=60 {
            assert!((w.weights()[n] - 0.5f64.powi(n as i32) / s).abs() < 1e-16);
        }
        assert!((w.weights()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weights_are_normalized_and_monotone() {
        for &(omega, beta, n_max) in &[(1.0, 0.1, 5), (2.3, 0.7, 40), (0.4, 3.0, 12)] {
            let w = thermal_weights(omega, beta, 1.0, n_max).unwrap();
            assert!((w.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!(w.weights().windows(2).all(|p| p[1] < p[0]));
            let direct: f64 = w.energies().iter().map(|e| (-beta * e).exp()).sum();
            assert!((w.partition_sum() - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn weights_reject_bad_inputs() {
        assert!(thermal_weights(1.0, -1.0, 1.0, 5).is_err());
        assert!(thermal_weights(1.0, 0.0, 1.0, 5).is_err());
        assert!(thermal_weights(-1.0, 1.0, 1.0, 5).is_err());
        assert!(thermal_weights(1.0, f64::NAN, 1.0, 5).is_err());
    }

    #[test]
    fn vacuum_zero_temperature_and_norm() {
        let vac = thermal_vacuum(&thermal_weights(1.0, f64::INFINITY, 1.0, 4).unwrap());
        assert_eq!(vac.amplitudes()[0], c(1.0));
        assert_eq!(vac.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 1);
        let vac = thermal_vacuum(&thermal_weights(1.0, 0.3, 1.0, 25).unwrap());
        assert!((vac.norm() - 1.0).abs() < 1e-12);
        assert!(vac.amplitudes().iter().all(|z| z.im == 0.0 && z.re >= 0.0));
    }

    #[test]
    fn tilde_and_physical_occupations_agree() {
        let w = thermal_weights(1.2, 0.5, 1.0, 20).unwrap();
        let vac = thermal_vacuum(&w);
        let n = number(w.space());
        let phys = tfd_expectation(&vac, &n).unwrap();
        let tilde = tilde_expectation(&vac, &n).unwrap();
        assert!((phys - tilde.re).abs() < 1e-14 && tilde.im == 0.0);
        // Explicit doubled-space operators, non-tilde factor first.
        let id = identity(w.space().dim());
        let v = vac.amplitudes();
        let lhs = (v.adjoint() * kron(&n, &id).unwrap() * v)[(0, 0)];
        let rhs = (v.adjoint() * kron(&id, &n).unwrap() * v)[(0, 0)];
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn expectation_of_identity_and_number() {
        let w = thermal_weights(1.0, 1.0, 1.0, 60).unwrap();
        let vac = thermal_vacuum(&w);
        assert!((tfd_expectation(&vac, &identity(61)).unwrap() - 1.0).abs() < 1e-14);
        let n = tfd_expectation(&vac, &number(w.space())).unwrap();
        let direct: f64 = w.weights().iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((n - direct).abs() < 1e-14);
        assert!((n - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn expectation_rejects_wrong_dimension() {
        let vac = thermal_vacuum(&thermal_weights(1.0, 1.0, 1.0, 3).unwrap());
        assert!(matches!(
            tfd_expectation(&vac, &identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expectation_matches_explicit_kron_and_statistical_mean() {
        let w = thermal_weights(0.8, 0.9, 1.0, 6).unwrap();
        let vac = thermal_vacuum(&w);
        let b = lowering(w.space());
        let f = &b + b.adjoint() + number(w.space()) * c(0.3);
        let v = vac.amplitudes();
        let explicit = (v.adjoint() * kron(&f, &identity(7)).unwrap() * v)[(0, 0)].re;
        let fast = tfd_expectation(&vac, &f).unwrap();
        let mean = statistical_mean(&w.density_matrix(), &f).unwrap();
        assert!((explicit - fast).abs() < 1e-14);
        assert!((fast - mean).abs() < 1e-14);
    }

    #[test]
    fn purification_identities() {
        for &beta in &[0.2, 1.0, 5.0, f64::INFINITY] {
            let vac = thermal_vacuum(&thermal_weights(1.0, beta, 1.0, 8).unwrap());
            let r = purify_check(&vac);
            assert!(r.defect() < 1e-12, "beta {beta}: {r:?}");
            assert!((r.trace - 1.0).abs() < 1e-14);
        }
        let vac = thermal_vacuum(&thermal_weights(1.0, f64::INFINITY, 1.0, 3).unwrap());
        let reduced = partial_trace(&vac.projector(), &[4, 4], &[0]).unwrap();
        assert_eq!(reduced[(0, 0)], c(1.0));
        assert!(max_abs(&reduced) == 1.0 && reduced.iter().filter(|z| z.norm() > 0.0).count() == 1);
    }

    #[test]
    fn tilde_symbols_assemble_vacuum_and_thermal_state() {
        let w = thermal_weights(1.0, 0.7, 1.0, 5).unwrap();
        let space = w.space();
        let basis = tilde_pair_basis(space);

        // Σ √Π M(n,ñ) mapped into the doubled space is |0(β)⟩.
        let mut ket = ComplexVector::zeros(36);
        for (n, p) in w.weights().iter().enumerate() {
            ket += symbol_to_doubled_ket(&tilde_symbol(&basis, n).unwrap(), space).unwrap() * c(p.sqrt());
        }
        assert!((ket - thermal_vacuum(&w).amplitudes()).norm() < 1e-15);

        // M(n,ñ) M(m̃,m) = δ_nm M(n,m)
        for n in 0..6 {
            for m in 0..6 {
                let left = tilde_symbol(&basis, n).unwrap();
                let right = tilde_symbol(&basis, m).unwrap().adjoint();
                let (ov, r) = compose(&left, &right).unwrap();
                assert_eq!(ov, c((n == m) as u8 as f64));
                assert_eq!(r.left_label, TfdLabel::Physical(n));
                assert_eq!(r.right_label, TfdLabel::Physical(m));
            }
        }

        // [Σ √Π M(n,ñ)] [Σ √Π M(m̃,m)] = ρ on the physical block.
        let k = vacuum_factor(&w);
        let rho_embedded = &k * k.adjoint();
        let rho = w.density_matrix();
        assert!(max_abs_diff(&rho_embedded.view((0, 0), (6, 6)).into_owned(), &rho) < 1e-15);
        assert!(max_abs(&rho_embedded.view((6, 6), (6, 6)).into_owned()) == 0.0);

        let wrong = basis.symbol(&TfdLabel::Tilde(0), &TfdLabel::Physical(0)).unwrap();
        assert!(symbol_to_doubled_ket(&wrong, space).is_err());
    }

    #[test]
    fn tfd_occupation_converges_to_bose_einstein() {
        assert!(tfd_occupation(1.0, 1e3, 1.0, 10).unwrap() < 1e-300);
        let n = tfd_occupation(1.0, 1.0, 1.0, 60).unwrap();
        assert!((n - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-12);
        let w = thermal_weights(1.0, 1.0, 1.0, 5).unwrap();
        assert!((tfd_occupation(1.0, 1.0, 1.0, 5).unwrap() - w.mean_occupation()).abs() < 1e-15);
        assert!(truncation_deviation(&w) < 0.0);
    }

    #[test]
    fn occupation_increases_with_temperature() {
        let mut last = -1.0;
        for beta in [4.0, 2.0, 1.0, 0.5, 0.25] {
            let n = tfd_occupation(1.0, beta, 1.0, 30).unwrap();
            assert!(n > last);
            last = n;
        }
    }
}
