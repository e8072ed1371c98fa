//! Charge and flux generators: the cyclic `O(N)` charge, its lift to the
//! stacked one-particle space `K ⊗ C^N`, dressing by a basis projection, and
//! the parity generator `½(Π_X T + T Π_X)` with `T = 1 - 2P`.
//!
//! Stacked index order is (site, Majorana index, copy), copy fastest.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::{expand_mask, Cone, LatticeGeometry, Region};
use crate::linalg::{self, CMat, HermitianEigen, ZERO};
use crate::quasifree::BasisProjection;

/// Hermitian, purely imaginary generator of a `U(1) ⊂ O(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeMatrix {
    q: CMat,
}

impl ChargeMatrix {
    pub fn new(q: CMat) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n || n == 0 {
            return Err(Error::DimensionMismatch { expected: n, found: q.ncols() });
        }
        let herm = linalg::hermiticity_residual(q.as_ref());
        let real = (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).map(|ij| q[ij].re.abs()).fold(0.0, f64::max);
        if herm > 1e-12 || real > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "charge must be Hermitian and antisymmetric (residuals {herm:.1e}, {real:.1e})"
            )));
        }
        Ok(Self { q })
    }

    pub fn matrix(&self) -> &CMat {
        &self.q
    }

    pub fn copies(&self) -> usize {
        self.q.nrows()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { q: Mat::from_fn(self.copies(), self.copies(), |i, j| self.q[(i, j)] * factor) }
    }

    /// `Tr q²`.
    pub fn trace_square(&self) -> f64 {
        (&self.q * &self.q).diagonal().column_vector().iter().map(|z| z.re).sum()
    }
}

/// `q = Σ_j j e_j e_j†` over `j = -(N-1)/2 … (N-1)/2`, where `e_j` is the
/// eigenvector of the cyclic shift `(1,…,N) → (N,1,…,N-1)` with eigenvalue
/// `e^{2πij/N}`.
pub fn cyclic_charge(n: usize) -> Result<ChargeMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("copies must be positive".into()));
    }
    if n % 2 == 0 {
        return Err(Error::EvenCopies(n));
    }
    let half = (n as i64 - 1) / 2;
    // (e_j)_k = e^{-2πijk/N}/√N, so q_kl = (1/N) Σ_j j e^{-2πij(k-l)/N}.
    let q = Mat::from_fn(n, n, |k, l| {
        let d = k as f64 - l as f64;
        let im: f64 = (-half..=half).map(|j| -(j as f64) * (TAU * j as f64 * d / n as f64).sin()).sum();
        C64::new(0.0, im / n as f64)
    });
    ChargeMatrix::new(q)
}

/// The cyclic shift itself, for checking the eigenvector convention.
pub fn cyclic_shift(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == (j + 1) % n { linalg::ONE } else { ZERO })
}

/// `Q_X = Π_X ⊗ q` on `K ⊗ C^N`.
pub fn lift_charge(q: &ChargeMatrix, geometry: &LatticeGeometry, region: &Region) -> Result<CMat> {
    let mask = expand_mask(&region.site_mask(geometry)?, geometry.majorana_count());
    let copies = q.copies();
    let dim = mask.len() * copies;
    let mut out = Mat::<C64>::zeros(dim, dim);
    for (s, _) in mask.iter().enumerate().filter(|(_, &b)| b) {
        for a in 0..copies {
            for b in 0..copies {
                out[(s * copies + a, s * copies + b)] = q.q[(a, b)];
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    DressedCharge,
    Parity,
}

/// Hermitian generator commuting with the basis projection; the flux
/// unitaries `e^{iαQ̃}` come from its cached eigendecomposition.
#[derive(Debug)]
pub struct FluxGenerator {
    matrix: CMat,
    kind: GeneratorKind,
    region: Option<Cone>,
    eigen: OnceLock<HermitianEigen>,
}

impl FluxGenerator {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn region(&self) -> Option<&Cone> {
        self.region.as_ref()
    }

    pub fn with_region(mut self, cone: Cone) -> Self {
        self.region = Some(cone);
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn eigen(&self) -> Result<&HermitianEigen> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let e = HermitianEigen::new(self.matrix.as_ref())?;
        Ok(self.eigen.get_or_init(|| e))
    }

    /// `max |[P, Q̃]|`.
    pub fn commutator_residual(&self, p: &BasisProjection) -> f64 {
        linalg::commutator_norm(p.matrix().as_ref(), self.matrix.as_ref())
    }
}

impl Clone for FluxGenerator {
    fn clone(&self) -> Self {
        Self { matrix: self.matrix.clone(), kind: self.kind, region: self.region, eigen: OnceLock::new() }
    }
}

/// `Q̃ = PQP + (1-P)Q(1-P) = Q - PQ - QP + 2PQP`.
pub fn dress_charge(p: &BasisProjection, q: &CMat) -> Result<FluxGenerator> {
    let n = p.dim();
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: q.nrows() });
    }
    let pm = p.matrix();
    let pq = pm * q;
    let pqp = &pq * pm;
    let mut out = Mat::from_fn(n, n, |i, j| q[(i, j)] - pq[(i, j)] - pq[(j, i)].conj() + pqp[(i, j)] * 2.0);
    symmetrize(&mut out);
    Ok(FluxGenerator { matrix: out, kind: GeneratorKind::DressedCharge, region: None, eigen: OnceLock::new() })
}

/// `Q̃_X = ½(Π_X T + T Π_X) = Π_X - Π_X P - P Π_X`.
pub fn parity_charge(p: &BasisProjection, region: &Region, geometry: &LatticeGeometry) -> Result<FluxGenerator> {
    let per_site = p.dim() / geometry.site_count().max(1);
    if per_site * geometry.site_count() != p.dim() || per_site % geometry.majorana_count() != 0 {
        return Err(Error::DimensionMismatch { expected: geometry.dim_k(), found: p.dim() });
    }
    let mask = expand_mask(&region.site_mask(geometry)?, per_site);
    let pm = p.matrix();
    let n = p.dim();
    let mut out = Mat::from_fn(n, n, |i, j| {
        let mut v = ZERO;
        if mask[i] {
            v -= pm[(i, j)];
        }
        if mask[j] {
            v -= pm[(i, j)];
        }
        if i == j && mask[i] {
            v += linalg::ONE;
        }
        v
    });
    symmetrize(&mut out);
    let cone = match region {
        Region::Cone(c) => Some(*c),
        _ => None,
    };
    Ok(FluxGenerator { matrix: out, kind: GeneratorKind::Parity, region: cone, eigen: OnceLock::new() })
}

fn symmetrize(m: &mut CMat) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..=j {
            let h = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = h;
            m[(j, i)] = h.conj();
        }
    }
}

/// `U(α) = e^{iαQ̃}` through the eigendecomposition of `Q̃`.
pub fn flux_unitary(g: &FluxGenerator, alpha: f64) -> Result<CMat> {
    let e = g.eigen()?;
    Ok(e.apply(|x| C64::from_polar(1.0, alpha * x)))
}
