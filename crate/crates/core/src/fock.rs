// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated single-oscillator Fock space and tensor-product utilities.
//!
//! Operators are dense matrices in the number basis `|0⟩ … |n_max⟩`. The
//! truncation makes `[b, b†]` differ from the identity in the last diagonal
//! entry; code that relies on the canonical commutator has to keep the top
//! level unpopulated.

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, ComplexMatrix, ZERO};

/// Largest matrix dimension `kron` will produce unless told otherwise.
pub const DEFAULT_KRON_CAP: usize = 16384;

/// Number basis `|0⟩ … |n_max⟩` of one oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    n_max: usize,
}

impl FockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(invalid("n_max", "a Fock space needs at least two levels"));
        }
        Ok(Self { n_max })
    }

    /// Smallest truncation whose discarded Boltzmann weight `Σ_{n>n_max} Π(E_n)`
    /// of the untruncated ladder is below `tol`. Never returns less than 1.
    pub fn for_thermal_tail(omega0: f64, beta: f64, hbar: f64, tol: f64) -> Result<Self> {
        if !(omega0 > 0.0) {
            return Err(invalid("omega0", format!("must be positive, got {omega0}")));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid("tol", format!("must lie in (0, 1), got {tol}")));
        }
        if beta.is_nan() || beta < 0.0 {
            return Err(invalid("beta", format!("must be non-negative, got {beta}")));
        }
        let x = beta * hbar * omega0;
        if x == 0.0 {
            return Err(invalid("beta", "infinite temperature has no finite thermal tail"));
        }
        // Discarded weight of the geometric ladder is exp(-x (n_max + 1)).
        let n_max = ((-tol.ln()) / x).ceil() as usize;
        Self::new(n_max.saturating_sub(1).max(1))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// Lowering operator `b` with `⟨n−1|b|n⟩ = √n`.
pub fn lowering(space: FockSpace) -> ComplexMatrix {
    let d = space.dim();
    let mut b = ComplexMatrix::zeros(d, d);
    for n in 1..d {
        b[(n - 1, n)] = c((n as f64).sqrt());
    }
    b
}

/// Raising operator `b†`.
pub fn raising(space: FockSpace) -> ComplexMatrix {
    lowering(space).adjoint()
}

/// Number operator `b†b = diag(0, 1, …, n_max)`.
pub fn number(space: FockSpace) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_fn(space.dim(), |n, _| c(n as f64)))
}

/// `H_A = ħω₀(b†b + ½)`.
pub fn hamiltonian_a(space: FockSpace, omega0: f64, hbar: f64) -> Result<ComplexMatrix> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(invalid("omega0", format!("must be positive and finite, got {omega0}")));
    }
    if !(hbar > 0.0) {
        return Err(invalid("hbar", format!("must be positive, got {hbar}")));
    }
    Ok(ComplexMatrix::from_diagonal(&nalgebra::DVector::from_fn(
        space.dim(),
        |n, _| c(hbar * omega0 * (n as f64 + 0.5)),
    )))
}

/// Projector `|n⟩⟨n|`.
pub fn fock_projector(space: FockSpace, n: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(space.dim(), space.dim());
    p[(n, n)] = c(1.0);
    p
}

/// Kronecker product with the default dimension cap.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_cap(a, b, DEFAULT_KRON_CAP)
}

/// Kronecker product `a ⊗ b`; the first factor indexes the slow (outer) block.
pub fn kron_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= cap && c <= cap => Ok(a.kronecker(b)),
        (r, c) => Err(Error::DimensionCap {
            requested: r.unwrap_or(usize::MAX).max(c.unwrap_or(usize::MAX)),
            cap,
        }),
    }
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[ComplexMatrix], cap: usize) -> Result<ComplexMatrix> {
    let mut iter = factors.iter();
    let first = iter
        .next()
        .ok_or_else(|| invalid("factors", "need at least one factor"))?
        .clone();
    iter.try_fold(first, |acc, f| kron_with_cap(&acc, f, cap))
}

/// Embeds `op` acting on subsystem `site` into the full product space.
pub fn embed(op: &ComplexMatrix, dims: &[usize], site: usize, cap: usize) -> Result<ComplexMatrix> {
    if site >= dims.len() {
        return Err(invalid(
            "site",
            format!("{site} out of range for {} subsystems", dims.len()),
        ));
    }
    if op.nrows() != dims[site] || op.ncols() != dims[site] {
        return Err(Error::DimensionMismatch {
            context: "embed",
            expected: dims[site],
            found: op.nrows(),
        });
    }
    let factors: Vec<ComplexMatrix> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            if k == site {
                op.clone()
            } else {
                ComplexMatrix::identity(d, d)
            }
        })
        .collect();
    kron_all(&factors, cap)
}

/// Reduced matrix over the subsystems listed in `keep`.
///
/// Subsystem 0 is the slowest-varying index, matching `kron`. The kept
/// subsystems appear in ascending order in the result regardless of the order
/// of `keep`.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.nrows() != total {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: total,
            found: m.nrows(),
        });
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(invalid("keep", "duplicate subsystem index"));
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(invalid("keep", format!("subsystem {bad} out of range")));
    }

    // Row-major strides: subsystem 0 varies slowest.
    let mut strides = vec![1usize; dims.len()];
    for s in (0..dims.len().saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * dims[s + 1];
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !kept.contains(s)).collect();
    let kept_offsets = offsets(&kept, dims, &strides);
    let traced_offsets = offsets(&traced, dims, &strides);

    let k = kept_offsets.len();
    let mut out = ComplexMatrix::zeros(k, k);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (col, &co) in kept_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_offsets {
                acc += m[(ro + t, co + t)];
            }
            out[(r, col)] = acc;
        }
    }
    Ok(out)
}

/// Flat offsets of every multi-index over `sites`, in row-major order.
fn offsets(sites: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in sites {
        out = out
            .iter()
            .flat_map(|&base| (0..dims[s]).map(move |i| base + i * strides[s]))
            .collect();
    }
    out
}
