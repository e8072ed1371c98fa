//! Dense complex linear algebra shared by the index computations.
//!
//! Thin layer over `faer`: Hermitian eigendecomposition, spectral functions,
//! residual norms and traces restricted to a subset of basis indices.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(m: MatRef<'_, C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        let s = evd.S();
        let values = (0..m.nrows()).map(|i| s[i].re).collect();
        Ok(Self { values, vectors: evd.U().to_owned() })
    }

    /// `V f(Λ) V†` for a complex-valued spectral function.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMat {
        let n = self.values.len();
        let weights: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let scaled = Mat::from_fn(n, n, |i, j| self.vectors[(i, j)] * weights[j]);
        &scaled * self.vectors.adjoint()
    }

    /// Projector onto the span of the selected eigenvectors.
    pub fn projector(&self, keep: &[usize]) -> CMat {
        let n = self.values.len();
        let v = Mat::from_fn(n, keep.len(), |i, j| self.vectors[(i, keep[j])]);
        &v * v.adjoint()
    }
}

pub fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

pub fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut out = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            out = out.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    out
}

/// `max |M - M†|`.
pub fn hermiticity_residual(m: MatRef<'_, C64>) -> f64 {
    let n = m.nrows();
    let mut out = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            out = out.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    out
}

/// `J M J` where `J` is entrywise complex conjugation.
pub fn conjugate(m: MatRef<'_, C64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj())
}

pub fn commutator(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    let ab = a * b;
    let ba = b * a;
    ab - ba
}

/// `max |[A, B]|`.
pub fn commutator_norm(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    max_abs(commutator(a, b).as_ref())
}

/// `Σ_{i ∈ rows} M_ii`.
pub fn windowed_trace(m: MatRef<'_, C64>, rows: &[bool]) -> C64 {
    rows.iter()
        .enumerate()
        .filter(|(_, &w)| w)
        .map(|(i, _)| m[(i, i)])
        .sum()
}

/// `Σ_{i ∈ rows} (A B)_ii` without forming the product.
pub fn windowed_trace_product(a: MatRef<'_, C64>, b: MatRef<'_, C64>, rows: &[bool]) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    let inner = a.ncols();
    let mut acc = ZERO;
    for (i, _) in rows.iter().enumerate().filter(|(_, &w)| w) {
        let mut s = ZERO;
        for k in 0..inner {
            s += a[(i, k)] * b[(k, i)];
        }
        acc += s;
    }
    acc
}

/// `M Π M` for Hermitian `M` and the coordinate projector `Π` onto `cols`,
/// computed as `M[:, cols] M[:, cols]†`.
pub fn sandwich_coordinate_projector(m: MatRef<'_, C64>, cols: &[bool]) -> CMat {
    let idx: Vec<usize> = cols.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| i).collect();
    let sub = Mat::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])]);
    &sub * sub.adjoint()
}

/// `M ⊗ I_copies` with the copy index varying fastest.
pub fn kron_identity(m: MatRef<'_, C64>, copies: usize) -> CMat {
    let n = m.nrows() * copies;
    let mut out = Mat::<C64>::zeros(n, m.ncols() * copies);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != ZERO {
                for c in 0..copies {
                    out[(i * copies + c, j * copies + c)] = v;
                }
            }
        }
    }
    out
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn diagonal(d: &[bool]) -> CMat {
    let n = d.len();
    let mut out = Mat::<C64>::zeros(n, n);
    for (i, &on) in d.iter().enumerate() {
        if on {
            out[(i, i)] = ONE;
        }
    }
    out
}
