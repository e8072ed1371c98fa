//! Seeded random instances for property checks and the `selftest` command.

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::linalg::{CMat, HermitianEigen};
use crate::quasifree::{BasisProjection, CovarianceOperator};

/// Real antisymmetric matrix with independent uniform entries in `[-1, 1)`.
pub fn random_antisymmetric<R: Rng>(rng: &mut R, dim: usize) -> Mat<f64> {
    let mut a = Mat::<f64>::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..j {
            let v = rng.gen_range(-1.0..1.0);
            a[(i, j)] = v;
            a[(j, i)] = -v;
        }
    }
    a
}

/// `S = (1 + iA)/2` with `A` real antisymmetric of spectral radius below 1.
pub fn random_covariance<R: Rng>(rng: &mut R, dim: usize) -> CovarianceOperator {
    let a = random_antisymmetric(rng, dim);
    let h = Mat::from_fn(dim, dim, |i, j| C64::new(0.0, a[(i, j)]));
    let radius = HermitianEigen::new(h.as_ref())
        .map(|e| e.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .unwrap_or(1.0)
        .max(1e-12);
    let shrink = rng.gen_range(0.05..0.999) / radius;
    let s = Mat::from_fn(dim, dim, |i, j| {
        let re = if i == j { 0.5 } else { 0.0 };
        C64::new(re, 0.5 * shrink * a[(i, j)])
    });
    CovarianceOperator::new(s).expect("random covariance satisfies its invariants")
}

/// Basis projection onto the negative eigenspace of a random `iA`.
pub fn random_basis_projection<R: Rng>(rng: &mut R, dim: usize) -> BasisProjection {
    assert!(dim % 2 == 0);
    loop {
        let a = random_antisymmetric(rng, dim);
        let h = Mat::from_fn(dim, dim, |i, j| C64::new(0.0, a[(i, j)]));
        let evd = HermitianEigen::new(h.as_ref()).expect("eigendecomposition");
        if evd.values.iter().any(|v| v.abs() < 1e-6) {
            continue;
        }
        let keep: Vec<usize> = (0..dim).filter(|&i| evd.values[i] < 0.0).collect();
        let mut p = evd.projector(&keep);
        for j in 0..dim {
            for i in 0..dim {
                let target = if i == j { 0.5 } else { 0.0 };
                p[(i, j)].re = target;
            }
        }
        for j in 0..dim {
            for i in 0..j {
                let im = 0.5 * (p[(i, j)].im - p[(j, i)].im);
                p[(i, j)].im = im;
                p[(j, i)].im = -im;
            }
            p[(j, j)].im = 0.0;
        }
        if let Ok(p) = BasisProjection::new(p, "random", 0.0) {
            return p;
        }
    }
}

pub fn random_vectors<R: Rng>(rng: &mut R, dim: usize, count: usize) -> Vec<Vec<C64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect()
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> CMat {
    let a = Mat::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    Mat::from_fn(dim, dim, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn random_mask<R: Rng>(rng: &mut R, len: usize) -> Vec<bool> {
    (0..len).map(|_| rng.gen_bool(0.5)).collect()
}
