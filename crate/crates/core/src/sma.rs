// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Schwinger measurement algebra over finite orthonormal bases.
//!
//! A measurement symbol `M(a′, b′)` is realized as the rank-one outer product
//! `|a′⟩⟨b′|` in a fixed ambient space, so every algebraic law below is a
//! plain matrix identity.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    basis_vector, hermiticity_defect, min_eigenvalue, outer, trace_of_product, ComplexMatrix, ComplexVector, C64, ZERO,
};

/// Gram-matrix tolerance for accepting a basis as orthonormal.
pub const ORTHONORMALITY_TOL: f64 = 1e-12;
/// Tolerance on `Σ Π(b′) = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Largest Hermiticity defect accepted for an observable.
pub const HERMITICITY_TOL: f64 = 1e-8;
/// Largest imaginary part of `Tr(ρA)` silently dropped.
pub const IMAGINARY_TOL: f64 = 1e-10;

/// Ordered, labeled orthonormal vectors in an ambient space.
#[derive(Debug, Clone)]
pub struct LabeledBasis<L> {
    labels: Vec<L>,
    vectors: Vec<ComplexVector>,
    index: HashMap<L, usize>,
    ambient_dim: usize,
}

impl<L: Clone + Eq + Hash + Debug> LabeledBasis<L> {
    pub fn new(labels: Vec<L>, vectors: Vec<ComplexVector>) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("labels", "basis must contain at least one vector"));
        }
        if labels.len() != vectors.len() {
            return Err(Error::DimensionMismatch {
                context: "LabeledBasis labels/vectors",
                expected: labels.len(),
                found: vectors.len(),
            });
        }
        let ambient_dim = vectors[0].len();
        if labels.len() > ambient_dim {
            return Err(invalid("vectors", "more basis vectors than ambient dimensions"));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(Error::DimensionMismatch {
                context: "LabeledBasis vector length",
                expected: ambient_dim,
                found: v.len(),
            });
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (k, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), k).is_some() {
                return Err(invalid("labels", format!("duplicate label {l:?}")));
            }
        }
        for (i, u) in vectors.iter().enumerate() {
            for (j, v) in vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let g = u.dotc(v);
                if (g - C64::new(target, 0.0)).norm() > ORTHONORMALITY_TOL {
                    return Err(invalid(
                        "vectors",
                        format!("not orthonormal: ⟨{:?}|{:?}⟩ = {g}", labels[i], labels[j]),
                    ));
                }
            }
        }
        Ok(Self {
            labels,
            vectors,
            index,
            ambient_dim,
        })
    }

    /// Basis from the columns of `m`.
    pub fn from_columns(labels: Vec<L>, m: &ComplexMatrix) -> Result<Self> {
        let vectors = m.column_iter().map(|c| c.into_owned()).collect();
        Self::new(labels, vectors)
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn is_complete(&self) -> bool {
        self.labels.len() == self.ambient_dim
    }

    pub fn position(&self, label: &L) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(format!("{label:?}")))
    }

    pub fn vector(&self, label: &L) -> Result<&ComplexVector> {
        Ok(&self.vectors[self.position(label)?])
    }

    /// Diagonal symbol `M(a′) ≡ M(a′, a′)`.
    pub fn projector(&self, label: &L) -> Result<MeasurementSymbol<L>> {
        MeasurementSymbol::new(self, label, self, label)
    }

    pub fn symbol(&self, left: &L, right: &L) -> Result<MeasurementSymbol<L>> {
        MeasurementSymbol::new(self, left, self, right)
    }
}

impl LabeledBasis<usize> {
    /// The computational basis `e_0 … e_{dim-1}` labeled by index.
    pub fn standard(dim: usize) -> Result<Self> {
        Self::new((0..dim).collect(), (0..dim).map(|k| basis_vector(dim, k)).collect())
    }
}

/// `M(a′, b′) = |a′⟩⟨b′|` with its labels kept alongside.
#[derive(Debug, Clone)]
pub struct MeasurementSymbol<L> {
    pub left_label: L,
    pub right_label: L,
    left: ComplexVector,
    right: ComplexVector,
    matrix: ComplexMatrix,
}

impl<L: Clone + Eq + Hash + Debug> MeasurementSymbol<L> {
    /// `M(left, right)` where the two labels may come from different bases
    /// over the same ambient space.
    pub fn new(left_basis: &LabeledBasis<L>, left: &L, right_basis: &LabeledBasis<L>, right: &L) -> Result<Self> {
        if left_basis.ambient_dim() != right_basis.ambient_dim() {
            return Err(Error::DimensionMismatch {
                context: "MeasurementSymbol ambient space",
                expected: left_basis.ambient_dim(),
                found: right_basis.ambient_dim(),
            });
        }
        let l = left_basis.vector(left)?.clone();
        let r = right_basis.vector(right)?.clone();
        Ok(Self::from_vectors(left.clone(), l, right.clone(), r))
    }

    fn from_vectors(left_label: L, left: ComplexVector, right_label: L, right: ComplexVector) -> Self {
        let matrix = outer(&left, &right);
        Self {
            left_label,
            right_label,
            left,
            right,
            matrix,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn ambient_dim(&self) -> usize {
        self.left.len()
    }

    pub fn left_vector(&self) -> &ComplexVector {
        &self.left
    }

    pub fn right_vector(&self) -> &ComplexVector {
        &self.right
    }

    /// `M(a′, b′)† = M(b′, a′)`.
    pub fn adjoint(&self) -> Self {
        Self::from_vectors(
            self.right_label.clone(),
            self.right.clone(),
            self.left_label.clone(),
            self.left.clone(),
        )
    }
}

/// Composition rule `M(a′,b′) M(c′,d′) = ⟨b′|c′⟩ M(a′,d′)`.
///
/// Returns the overlap `⟨b′|c′⟩` and the symbol `M(a′,d′)`; the product of
/// the two input matrices equals `overlap * result.matrix()`.
pub fn compose<L: Clone + Eq + Hash + Debug>(
    m1: &MeasurementSymbol<L>,
    m2: &MeasurementSymbol<L>,
) -> Result<(C64, MeasurementSymbol<L>)> {
    if m1.ambient_dim() != m2.ambient_dim() {
        return Err(Error::DimensionMismatch {
            context: "compose",
            expected: m1.ambient_dim(),
            found: m2.ambient_dim(),
        });
    }
    let overlap = m1.right.dotc(&m2.left);
    let result = MeasurementSymbol::from_vectors(
        m1.left_label.clone(),
        m1.left.clone(),
        m2.right_label.clone(),
        m2.right.clone(),
    );
    Ok((overlap, result))
}

/// `X = Σ_{a′,a″} ⟨a′|X|a″⟩ M(a′,a″)`, with `elements[(i, j)]` indexed by
/// basis position.
pub fn operator_from_elements<L: Clone + Eq + Hash + Debug>(
    basis: &LabeledBasis<L>,
    elements: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let n = basis.len();
    if elements.nrows() != n || elements.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "operator_from_elements",
            expected: n,
            found: elements.nrows().max(elements.ncols()),
        });
    }
    let d = basis.ambient_dim();
    let mut x = ComplexMatrix::zeros(d, d);
    for (i, u) in basis.vectors.iter().enumerate() {
        for (j, v) in basis.vectors.iter().enumerate() {
            let e = elements[(i, j)];
            if e != ZERO {
                x += outer(u, v) * e;
            }
        }
    }
    Ok(x)
}

/// `⟨a′|X|a″⟩ = Tr(X M(a″, a′))`.
pub fn matrix_element<L: Clone + Eq + Hash + Debug>(
    x: &ComplexMatrix,
    basis: &LabeledBasis<L>,
    a1: &L,
    a2: &L,
) -> Result<C64> {
    let d = basis.ambient_dim();
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "matrix_element",
            expected: d,
            found: x.nrows(),
        });
    }
    let m = basis.symbol(a2, a1)?;
    Ok(trace_of_product(x, m.matrix()))
}

/// All matrix elements of `x` in `basis`, indexed by basis position.
pub fn elements_of<L: Clone + Eq + Hash + Debug>(x: &ComplexMatrix, basis: &LabeledBasis<L>) -> Result<ComplexMatrix> {
    let n = basis.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, a1) in basis.labels().iter().enumerate() {
        for (j, a2) in basis.labels().iter().enumerate() {
            out[(i, j)] = matrix_element(x, basis, a1, a2)?;
        }
    }
    Ok(out)
}

/// `⟨A⟩_{b′} = Tr(A M(b′)) = ⟨b′|A|b′⟩`, the mean of `A` in one basis state.
pub fn expectation_in<L: Clone + Eq + Hash + Debug>(
    a: &ComplexMatrix,
    basis: &LabeledBasis<L>,
    label: &L,
) -> Result<C64> {
    matrix_element(a, basis, label, label)
}

/// Probabilities `Π(b′)` aligned with the label order of a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureWeights(Vec<f64>);

impl MixtureWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight list".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights(format!("weight {w} is negative or not finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `ρ = Σ_{b′} Π(b′) M(b′)`.
pub fn density_operator<L: Clone + Eq + Hash + Debug>(
    basis: &LabeledBasis<L>,
    weights: &MixtureWeights,
) -> Result<ComplexMatrix> {
    if weights.0.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            context: "density_operator weights",
            expected: basis.len(),
            found: weights.0.len(),
        });
    }
    let d = basis.ambient_dim();
    let mut rho = ComplexMatrix::zeros(d, d);
    for (v, &w) in basis.vectors.iter().zip(&weights.0) {
        if w > 0.0 {
            rho += outer(v, v) * C64::new(w, 0.0);
        }
    }
    Ok(rho)
}

/// Checks that `rho` is Hermitian with unit trace and no eigenvalue below `-tol`.
pub fn check_density(rho: &ComplexMatrix, tol: f64) -> Result<()> {
    if !rho.is_square() {
        return Err(invalid("rho", "density matrix must be square"));
    }
    let defect = hermiticity_defect(rho);
    if defect > tol {
        return Err(Error::NotHermitian { defect });
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(invalid("rho", format!("trace is {tr}, expected 1")));
    }
    let min = min_eigenvalue(rho);
    if min < -tol {
        return Err(invalid(
            "rho",
            format!("not positive semidefinite (eigenvalue {min:e})"),
        ));
    }
    Ok(())
}

/// Statistical mean `⟨A⟩ = Tr(ρA)`.
pub fn statistical_mean(rho: &ComplexMatrix, a: &ComplexMatrix) -> Result<f64> {
    if rho.shape() != a.shape() {
        return Err(Error::DimensionMismatch {
            context: "statistical_mean",
            expected: rho.nrows(),
            found: a.nrows(),
        });
    }
    let defect = hermiticity_defect(a);
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian { defect });
    }
    check_density(rho, HERMITICITY_TOL)?;
    let value = trace_of_product(rho, a);
    if value.im.abs() > IMAGINARY_TOL {
        return Err(invalid("A", format!("Tr(ρA) has imaginary part {:e}", value.im)));
    }
    Ok(value.re)
}
