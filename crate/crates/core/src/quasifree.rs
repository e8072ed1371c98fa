//! Basis projections of quadratic ground states and quasi-free expectation
//! values.
//!
//! `wick_expectation` is the literal permutation sum and serves as the
//! oracle for the Pfaffian evaluator.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, HermitianEigen, ONE, ZERO};
use crate::models::QuadraticHamiltonian;

pub const DEFAULT_GAP_TOL: f64 = 1e-8;
pub const DISK_GAP_TOL: f64 = 1e-4;

/// Tolerance for `P = P†`, `P + JPJ = 1` at construction.
pub const PROJECTION_TOL: f64 = 1e-12;

/// Orthogonal projection with `P + JPJ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisProjection {
    matrix: CMat,
    source: String,
    gap_used: f64,
}

impl BasisProjection {
    /// Checks the cheap invariants (`P = P†`, `P + JPJ = 1`); idempotency is
    /// available separately since it costs a matrix product.
    pub fn new(matrix: CMat, source: impl Into<String>, gap_used: f64) -> Result<Self> {
        let p = Self { matrix, source: source.into(), gap_used };
        let herm = linalg::hermiticity_residual(p.matrix.as_ref());
        let conj = p.conjugation_residual();
        if herm > PROJECTION_TOL || conj > PROJECTION_TOL {
            return Err(Error::UnresolvableZeroModes(format!(
                "basis projection residuals: hermiticity {herm:.3e}, P + JPJ - 1 {conj:.3e}"
            )));
        }
        Ok(p)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn gap_used(&self) -> f64 {
        self.gap_used
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |P + JPJ - 1|`.
    pub fn conjugation_residual(&self) -> f64 {
        let n = self.dim();
        let mut out = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { ONE } else { ZERO };
                out = out.max((self.matrix[(i, j)] + self.matrix[(i, j)].conj() - target).norm());
            }
        }
        out
    }

    /// `max |P² - P|`.
    pub fn idempotency_residual(&self) -> f64 {
        let sq = &self.matrix * &self.matrix;
        linalg::max_abs_diff(sq.as_ref(), self.matrix.as_ref())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// `JPJ = 1 - P`, the projection of the conjugate state.
    pub fn complement(&self) -> Self {
        Self {
            matrix: linalg::conjugate(self.matrix.as_ref()),
            source: format!("conj({})", self.source),
            gap_used: self.gap_used,
        }
    }

    /// `P ⊗ I_copies`, copy index fastest.
    pub fn replicate(&self, copies: usize) -> Self {
        Self {
            matrix: linalg::kron_identity(self.matrix.as_ref(), copies),
            source: format!("{}^{copies}", self.source),
            gap_used: self.gap_used,
        }
    }
}

/// Spectral projector onto the negative-energy subspace of `h`.
///
/// Eigenvalues with `|λ| < gap_tol` form the near-zero cluster. Cluster
/// members with resolvable sign follow the sign rule; exact zero modes are
/// split into `J`-conjugate halves through a real basis of their span. The
/// cluster must be even, and non-extensive (at most a quarter of the space).
pub fn ground_projection(h: &QuadraticHamiltonian, gap_tol: f64) -> Result<BasisProjection> {
    if !(gap_tol.is_finite() && gap_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("gap_tol must be positive, got {gap_tol}")));
    }
    let n = h.dim();
    let evd = HermitianEigen::new(h.matrix().as_ref())?;
    let scale = evd.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-11 * scale;

    let cluster: Vec<usize> = (0..n).filter(|&i| evd.values[i].abs() < gap_tol).collect();
    if cluster.len() % 2 != 0 {
        return Err(Error::UnresolvableZeroModes(format!("odd near-zero cluster of size {}", cluster.len())));
    }
    if evd.values.iter().all(|v| v.abs() <= floor) {
        return Err(Error::UnresolvableZeroModes("every mode is a zero mode".into()));
    }
    if 4 * cluster.len() > n {
        return Err(Error::Gapless(format!(
            "{} of {n} eigenvalues below gap_tol {gap_tol:.1e}",
            cluster.len()
        )));
    }

    let negative: Vec<usize> = (0..n).filter(|&i| evd.values[i] < -floor).collect();
    let exact_zero: Vec<usize> = (0..n).filter(|&i| evd.values[i].abs() <= floor).collect();
    let gap_used = (0..n)
        .filter(|i| !cluster.contains(i))
        .map(|i| evd.values[i].abs())
        .fold(f64::INFINITY, f64::min);

    let mut columns: Vec<Vec<C64>> = negative
        .iter()
        .map(|&j| (0..n).map(|i| evd.vectors[(i, j)]).collect())
        .collect();
    if !exact_zero.is_empty() {
        columns.extend(pair_zero_modes(&evd.vectors, &exact_zero)?);
    }
    if 2 * columns.len() != n {
        return Err(Error::UnresolvableZeroModes(format!(
            "selected {} modes for a space of dimension {n}",
            columns.len()
        )));
    }
    let v = Mat::from_fn(n, columns.len(), |i, j| columns[j][i]);
    let mut p = &v * v.adjoint();
    // Symmetrise away rounding so that P = P† and P + JPJ = 1 hold to
    // machine precision.
    for j in 0..n {
        for i in 0..=j {
            let herm = (p[(i, j)] + p[(j, i)].conj()) * 0.5;
            p[(i, j)] = herm;
            p[(j, i)] = herm.conj();
        }
    }
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 0.5 } else { 0.0 };
            let z = p[(i, j)];
            p[(i, j)] = C64::new(target, z.im);
        }
    }
    BasisProjection::new(p, h.family_tag(), gap_used)
}

/// Half of a `J`-invariant zero-mode space `Z`: from a real orthonormal
/// basis `r_1..r_{2k}` of `Z`, take `(r_{2j-1} + i r_{2j})/√2`.
fn pair_zero_modes(vectors: &CMat, zero: &[usize]) -> Result<Vec<Vec<C64>>> {
    let n = vectors.nrows();
    let m = zero.len();
    let real = Mat::<f64>::from_fn(n, 2 * m, |i, j| {
        let z = vectors[(i, zero[j / 2])];
        if j % 2 == 0 {
            z.re
        } else {
            z.im
        }
    });
    let svd = real.thin_svd().map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let s = svd.S();
    let basis: Vec<usize> = (0..2 * m).filter(|&k| s[k] > 1e-8).collect();
    if basis.len() != m {
        return Err(Error::UnresolvableZeroModes(format!(
            "zero-mode space of dimension {m} is not invariant under conjugation"
        )));
    }
    if m % 2 != 0 {
        return Err(Error::UnresolvableZeroModes(format!("odd number ({m}) of exact zero modes")));
    }
    let u = svd.U();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ok((0..m / 2)
        .map(|j| {
            let (a, b) = (basis[2 * j], basis[2 * j + 1]);
            (0..n).map(|i| C64::new(h * u[(i, a)], h * u[(i, b)])).collect()
        })
        .collect())
}

/// Two-point operator `S` of a quasi-free state: `0 ≤ S = S† ≤ 1`,
/// `S + JSJ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceOperator {
    matrix: CMat,
}

impl CovarianceOperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.ncols() });
        }
        let herm = linalg::hermiticity_residual(matrix.as_ref());
        let conj = linalg::max_abs_diff(
            (linalg::conjugate(matrix.as_ref()) + matrix.as_ref()).as_ref(),
            linalg::identity(n).as_ref(),
        );
        if herm > PROJECTION_TOL || conj > PROJECTION_TOL {
            return Err(Error::InvalidCovariance(format!("hermiticity {herm:.3e}, S + JSJ - 1 {conj:.3e}")));
        }
        let evd = HermitianEigen::new(matrix.as_ref())?;
        let (lo, hi) = (evd.values[0], evd.values[n - 1]);
        if lo < -PROJECTION_TOL || hi > 1.0 + PROJECTION_TOL {
            return Err(Error::InvalidCovariance(format!("spectrum [{lo}, {hi}] outside [0, 1]")));
        }
        Ok(Self { matrix })
    }

    pub fn from_projection(p: &BasisProjection) -> Self {
        Self { matrix: p.matrix().clone() }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Φ(c(f) c(g)) = ⟨Jf, S g⟩ = Σ_i f_i (S g)_i`.
    pub fn pair(&self, f: &[C64], g: &[C64]) -> C64 {
        let n = self.dim();
        (0..n)
            .map(|i| f[i] * (0..n).map(|k| self.matrix[(i, k)] * g[k]).sum::<C64>())
            .sum()
    }

    fn check_vectors(&self, vectors: &[Vec<C64>]) -> Result<()> {
        match vectors.iter().find(|v| v.len() != self.dim()) {
            Some(v) => Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() }),
            None => Ok(()),
        }
    }
}

pub const WICK_MAX_LEN: usize = 12;

/// `Φ(c(f_1) ⋯ c(f_m))` by the permutation sum: zero for odd `m`, and for
/// `m = 2n`, `(-1)^{n(n-1)/2} Σ_s sign(s) Π_j Φ(c(f_{s(j)}) c(f_{s(j+n)}))`
/// over `s(1) < ⋯ < s(n)`, `s(j) < s(j+n)`.
pub fn wick_expectation(s: &CovarianceOperator, vectors: &[Vec<C64>]) -> Result<C64> {
    if vectors.len() > WICK_MAX_LEN {
        return Err(Error::OracleTooLarge(vectors.len()));
    }
    s.check_vectors(vectors)?;
    let len = vectors.len();
    if len % 2 == 1 {
        return Ok(ZERO);
    }
    let n = len / 2;
    let mut pairs = vec![vec![ZERO; len]; len];
    for a in 0..len {
        for b in 0..len {
            if a < b {
                pairs[a][b] = s.pair(&vectors[a], &vectors[b]);
            }
        }
    }
    let mut total = ZERO;
    for firsts in n_subsets(len, n) {
        let rest: Vec<usize> = (0..len).filter(|i| !firsts.contains(i)).collect();
        for seconds in permutations(&rest) {
            if (0..n).any(|j| firsts[j] >= seconds[j]) {
                continue;
            }
            let perm: Vec<usize> = firsts.iter().chain(seconds.iter()).copied().collect();
            let term: C64 = (0..n).map(|j| pairs[firsts[j]][seconds[j]]).product();
            total += term * permutation_sign(&perm);
        }
    }
    let prefactor = if (n * n.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(total * prefactor)
}

fn n_subsets(len: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, len: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..len {
            cur.push(i);
            rec(i + 1, len, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, len, n, &mut Vec::new(), &mut out);
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let inversions = (0..perm.len())
        .flat_map(|i| (i + 1..perm.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| perm[i] > perm[j])
        .count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Pfaffian of the antisymmetric matrix `M_jk = ⟨J f_j, S f_k⟩` (`j < k`);
/// equals `wick_expectation` on even lists.
pub fn pfaffian_expectation(s: &CovarianceOperator, vectors: &[Vec<C64>]) -> Result<C64> {
    if vectors.len() % 2 != 0 {
        return Err(Error::InvalidArgument(format!("odd number of vectors ({})", vectors.len())));
    }
    s.check_vectors(vectors)?;
    let m = vectors.len();
    let mut a = vec![vec![ZERO; m]; m];
    for j in 0..m {
        for k in j + 1..m {
            let v = s.pair(&vectors[j], &vectors[k]);
            a[j][k] = v;
            a[k][j] = -v;
        }
    }
    Ok(pfaffian(a))
}

/// Pfaffian by antisymmetric Gaussian elimination with partial pivoting.
pub fn pfaffian(mut a: Vec<Vec<C64>>) -> C64 {
    let m = a.len();
    debug_assert!(m % 2 == 0);
    let mut pf = ONE;
    for k in (0..m).step_by(2) {
        let pivot = (k + 1..m).max_by(|&x, &y| a[k][x].norm().total_cmp(&a[k][y].norm())).unwrap();
        if pivot != k + 1 {
            a.swap(k + 1, pivot);
            for row in a.iter_mut() {
                row.swap(k + 1, pivot);
            }
            pf = -pf;
        }
        let head = a[k][k + 1];
        if head == ZERO {
            return ZERO;
        }
        pf *= head;
        let tau: Vec<C64> = (0..m).map(|i| if i >= k + 2 { a[k][i] / head } else { ZERO }).collect();
        for i in k + 2..m {
            for j in k + 2..m {
                let update = tau[i] * a[k + 1][j] - tau[j] * a[k + 1][i];
                a[i][j] -= update;
            }
        }
    }
    pf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_disk_lattice, LatticeKind, DEFAULT_APEX_OFFSET};
    use crate::models::{build_pip, build_trivial, QuadraticHamiltonian};
    use crate::sampling::{random_covariance, random_vectors};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn disk(r: f64, count: usize) -> crate::geometry::LatticeGeometry {
        build_disk_lattice(LatticeKind::Square, r, DEFAULT_APEX_OFFSET, count).unwrap()
    }

    #[test]
    fn trivial_projection_has_half_trace() {
        let h = build_trivial(&disk(4.0, 2)).unwrap();
        let p = ground_projection(&h, DEFAULT_GAP_TOL).unwrap();
        assert_eq!(p.trace().round() as usize, h.dim() / 2);
        assert!((p.trace() - (h.dim() / 2) as f64).abs() < 1e-12);
        assert!(p.idempotency_residual() <= 1e-12);
        assert!((p.gap_used() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_hamiltonian_is_unresolvable() {
        let g = disk(2.0, 2);
        let n = g.dim_k();
        let h = QuadraticHamiltonian::new(Mat::zeros(n, n), g, "zero", BTreeMap::new()).unwrap();
        assert!(matches!(ground_projection(&h, 1e-8), Err(Error::UnresolvableZeroModes(_))));
    }

    #[test]
    fn exact_zero_pair_is_split_compatibly() {
        // Trivial chain with one decoupled site: two exact Majorana zero modes.
        let g = disk(2.0, 2);
        let n = g.dim_k();
        let mut m = build_trivial(&g).unwrap().matrix().clone();
        m[(0, 1)] = ZERO;
        m[(1, 0)] = ZERO;
        let h = QuadraticHamiltonian::new(m, g, "defect", BTreeMap::new()).unwrap();
        let p = ground_projection(&h, 1e-8).unwrap();
        assert!(p.conjugation_residual() <= 1e-12);
        assert!(p.idempotency_residual() <= 1e-12);
        assert!((p.trace() - (n / 2) as f64).abs() < 1e-12);
    }

    #[test]
    fn extensive_cluster_is_gapless() {
        let g = disk(3.0, 2);
        let h = build_trivial(&g).unwrap();
        let mut m = h.matrix().clone();
        for k in 0..m.nrows() / 2 {
            m[(2 * k, 2 * k + 1)] = C64::new(0.0, 1e-6);
            m[(2 * k + 1, 2 * k)] = C64::new(0.0, -1e-6);
        }
        let h = QuadraticHamiltonian::new(m, g, "weak", BTreeMap::new()).unwrap();
        assert!(matches!(ground_projection(&h, 1e-4), Err(Error::Gapless(_))));
        assert!(ground_projection(&h, 1e-8).is_ok());
    }

    #[test]
    fn pip_projection_invariants() {
        let h = build_pip(-1.0, 0.5, &disk(6.0, 2)).unwrap();
        let p = ground_projection(&h, DISK_GAP_TOL).unwrap();
        assert!(p.conjugation_residual() <= 1e-12);
        assert!(p.idempotency_residual() <= 1e-12);
        assert!((p.trace() - (h.dim() / 2) as f64).abs() < 1e-10);
    }

    #[test]
    fn wick_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_covariance(&mut rng, 6);
        let v = random_vectors(&mut rng, 6, 3);
        assert_eq!(wick_expectation(&s, &v[..1]).unwrap(), ZERO);
        assert_eq!(wick_expectation(&s, &v[..3]).unwrap(), ZERO);
        let two = wick_expectation(&s, &v[..2]).unwrap();
        assert!((two - s.pair(&v[0], &v[1])).norm() < 1e-15);
        assert_eq!(wick_expectation(&s, &[]).unwrap(), ONE);
        let thirteen = random_vectors(&mut rng, 6, 13);
        assert_eq!(wick_expectation(&s, &thirteen), Err(Error::OracleTooLarge(13)));
    }

    #[test]
    fn car_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 4, 8] {
            let s = random_covariance(&mut rng, dim);
            let v = random_vectors(&mut rng, dim, 2);
            let fg = wick_expectation(&s, &[v[0].clone(), v[1].clone()]).unwrap();
            let gf = wick_expectation(&s, &[v[1].clone(), v[0].clone()]).unwrap();
            let anticomm: C64 = (0..dim).map(|i| v[0][i] * v[1][i]).sum();
            assert!((fg + gf - anticomm).norm() <= 1e-12);
        }
    }

    #[test]
    fn pfaffian_matches_wick() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s8 = random_covariance(&mut rng, 8);
        let v = random_vectors(&mut rng, 8, 4);
        let d = pfaffian_expectation(&s8, &v).unwrap() - wick_expectation(&s8, &v).unwrap();
        assert!(d.norm() <= 1e-10);
        let s12 = random_covariance(&mut rng, 12);
        let v = random_vectors(&mut rng, 12, 6);
        let d = pfaffian_expectation(&s12, &v).unwrap() - wick_expectation(&s12, &v).unwrap();
        assert!(d.norm() <= 1e-9);
        let one = pfaffian_expectation(&s12, &v[..2]).unwrap();
        assert_eq!(one, s12.pair(&v[0], &v[1]));
    }

    #[test]
    fn pfaffian_of_block_matrix() {
        // Pf of diag blocks [[0, a], [-a, 0]] ⊕ [[0, b], [-b, 0]] is ab.
        let (a, b) = (C64::new(2.0, 1.0), C64::new(-0.5, 3.0));
        let mut m = vec![vec![ZERO; 4]; 4];
        m[0][1] = a;
        m[1][0] = -a;
        m[2][3] = b;
        m[3][2] = -b;
        assert!((pfaffian(m) - a * b).norm() < 1e-15);
    }

    #[test]
    fn swapping_orthogonal_neighbours_flips_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dim = 8;
        let s = random_covariance(&mut rng, dim);
        // distinct real basis vectors: ⟨J e_j, e_k⟩ = 0
        let e = |k: usize| (0..dim).map(|i| if i == k { ONE } else { ZERO }).collect::<Vec<_>>();
        let v = vec![e(0), e(3), e(5), e(6)];
        let mut w = v.clone();
        w.swap(1, 2);
        let (a, b) = (wick_expectation(&s, &v).unwrap(), wick_expectation(&s, &w).unwrap());
        assert!((a + b).norm() < 1e-14);
        let (a, b) = (pfaffian_expectation(&s, &v).unwrap(), pfaffian_expectation(&s, &w).unwrap());
        assert!((a + b).norm() < 1e-14);
    }
}
