//! Index computations: real-space Chern number, Hall response of a pair of
//! flux generators, exchange phases, parity and twist-defect indices, their
//! closed-form predictions, and the `Z/N` three-cocycle.
//!
//! Finite-volume traces. On a finite disk `Tr [X, Y]` vanishes identically,
//! so every trace here is restricted to a window of sites around the apex
//! (radius `window_fraction` times the disk radius). The commutators are
//! concentrated near the apex; the outer edge, where the full trace
//! cancels the bulk contribution, is excluded.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{expand_mask, ConicalPartition, LatticeGeometry, Region};
use crate::linalg::{self, CMat, HermitianEigen};
use crate::quasifree::BasisProjection;
use crate::symgen::{cyclic_charge, dress_charge, flux_unitary, lift_charge, parity_charge, FluxGenerator};

pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;

/// Imaginary residual of a trace that should be real; above this `P` is broken.
pub const ANOMALY_TOL: f64 = 1e-6;

pub const DEFAULT_NU_ROUND_TOL: f64 = 0.1;

/// Tolerance on `|C - e^{i asin H₂}|` for accepting the principal logarithm.
pub const BRANCH_TOL: f64 = 1e-8;

/// Geometry, partition and trace window shared by all index computations on
/// one disk.
#[derive(Debug, Clone)]
pub struct IndexFrame {
    geometry: LatticeGeometry,
    partition: ConicalPartition,
    cones: [Vec<bool>; 3],
    window: Vec<bool>,
    window_radius: f64,
}

impl IndexFrame {
    pub fn new(geometry: &LatticeGeometry, partition: &ConicalPartition, window_fraction: f64) -> Result<Self> {
        if !(window_fraction > 0.0 && window_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!("window fraction {window_fraction} outside (0, 1]")));
        }
        let cones = partition.site_masks(geometry)?;
        let apex = geometry.apex();
        let extent = geometry.sites().iter().map(|s| (s.x - apex[0]).hypot(s.y - apex[1])).fold(0.0, f64::max);
        let window_radius = window_fraction * extent;
        let window = Region::Disk { center: apex, radius: window_radius }.site_mask(geometry)?;
        if !window.iter().any(|&b| b) {
            return Err(Error::InvalidArgument("trace window contains no sites".into()));
        }
        Ok(Self { geometry: geometry.clone(), partition: *partition, cones, window, window_radius })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn partition(&self) -> &ConicalPartition {
        &self.partition
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    fn per_site(&self, dim: usize) -> Result<usize> {
        let sites = self.geometry.site_count();
        if dim == 0 || dim % sites != 0 || (dim / sites) % self.geometry.majorana_count() != 0 {
            return Err(Error::DimensionMismatch { expected: self.geometry.dim_k(), found: dim });
        }
        Ok(dim / sites)
    }

    /// Basis mask of cone `A_a` in a space of dimension `dim`.
    pub fn cone_mask(&self, a: usize, dim: usize) -> Result<Vec<bool>> {
        Ok(expand_mask(&self.cones[a], self.per_site(dim)?))
    }

    pub fn window_mask(&self, dim: usize) -> Result<Vec<bool>> {
        Ok(expand_mask(&self.window, self.per_site(dim)?))
    }
}

/// A trace that should be real, with the size of its imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealTrace {
    pub value: f64,
    pub residual: f64,
}

fn checked(z: C64) -> Result<RealTrace> {
    let out = RealTrace { value: z.re, residual: z.im.abs() };
    if !out.residual.is_finite() || !out.value.is_finite() || out.residual > ANOMALY_TOL {
        return Err(Error::NonHermitianAnomaly(out.residual));
    }
    Ok(out)
}

/// `2πi Tr_W [A, B]` for Hermitian `A, B`.
fn windowed_commutator(a: &CMat, b: &CMat, window: &[bool]) -> C64 {
    let ab = linalg::windowed_trace_product(a.as_ref(), b.as_ref(), window);
    let ba = linalg::windowed_trace_product(b.as_ref(), a.as_ref(), window);
    linalg::I * TAU * (ab - ba)
}

/// `ν(P) = 4πi Tr P[PΠ₀P, PΠ₁P]`.
pub fn chern_number(p: &BasisProjection, frame: &IndexFrame) -> Result<RealTrace> {
    let n = p.dim();
    let x = linalg::sandwich_coordinate_projector(p.matrix().as_ref(), &frame.cone_mask(0, n)?);
    let y = linalg::sandwich_coordinate_projector(p.matrix().as_ref(), &frame.cone_mask(1, n)?);
    // P[X, Y] = [X, Y] since PX = X
    checked(windowed_commutator(&x, &y, &frame.window_mask(n)?) * 2.0)
}

/// `σ = 2πi Tr(P[Q̃₀, Q̃₁])`.
pub fn hall_sigma(p: &BasisProjection, g0: &FluxGenerator, g1: &FluxGenerator, frame: &IndexFrame) -> Result<RealTrace> {
    let n = p.dim();
    if g0.dim() != n || g1.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g0.dim().max(g1.dim()) });
    }
    if std::ptr::eq(g0, g1) || g0.matrix() == g1.matrix() {
        return Ok(RealTrace { value: 0.0, residual: 0.0 });
    }
    let pm = p.matrix();
    // the generators commute with P, so P[Q̃₀, Q̃₁] = [PQ̃₀P, PQ̃₁P]
    let a = &(pm * g0.matrix()) * pm;
    let b = &(pm * g1.matrix()) * pm;
    checked(windowed_commutator(&a, &b, &frame.window_mask(n)?))
}

/// `θ = e^{iα₀α₁σ/4π}`.
pub fn exchange_phase_closed(sigma: f64, alpha0: f64, alpha1: f64) -> C64 {
    C64::from_polar(1.0, alpha0 * alpha1 * sigma / (2.0 * TAU))
}

/// `exp(½ Tr(P log C))` for the group commutator `C = U₀U₁U₀⁻¹U₁⁻¹`,
/// `U_a = e^{iα_a Q̃_a}`, with the principal logarithm.
///
/// The logarithm is `i asin(H₂)` with `H₂ = (C - C†)/2i`, which is the
/// principal branch only when every eigenphase of `C` lies in
/// `(-π/2, π/2)`; anything else is reported as a branch ambiguity.
pub fn exchange_phase_bch(
    p: &BasisProjection,
    g0: &FluxGenerator,
    g1: &FluxGenerator,
    alpha0: f64,
    alpha1: f64,
    frame: &IndexFrame,
) -> Result<C64> {
    let n = p.dim();
    if g0.dim() != n || g1.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g0.dim().max(g1.dim()) });
    }
    if alpha0 == 0.0 || alpha1 == 0.0 {
        return Ok(linalg::ONE);
    }
    let u0 = flux_unitary(g0, alpha0)?;
    let u1 = flux_unitary(g1, alpha1)?;
    let c = &(&u0 * &u1) * &(u1 * u0).adjoint();
    let h2 = CMat::from_fn(n, n, |i, j| (c[(i, j)] - c[(j, i)].conj()) * C64::new(0.0, -0.5));
    let evd = HermitianEigen::new(h2.as_ref())?;
    if evd.values.iter().any(|s| s.abs() >= 1.0) {
        return Err(Error::BranchAmbiguity(format!(
            "|sin φ| reaches {:.3}",
            evd.values.iter().fold(0.0f64, |m, s| m.max(s.abs()))
        )));
    }
    let rebuilt = evd.apply(|s| C64::new((1.0 - s * s).sqrt(), s));
    let residual = linalg::max_abs_diff(rebuilt.as_ref(), c.as_ref());
    if residual > BRANCH_TOL {
        return Err(Error::BranchAmbiguity(format!("eigenphase beyond ±π/2 (residual {residual:.1e})")));
    }
    let l = evd.apply(|s| C64::new(s.asin(), 0.0));
    let t = linalg::windowed_trace_product(p.matrix().as_ref(), l.as_ref(), &frame.window_mask(n)?);
    Ok((linalg::I * t * 0.5).exp())
}

/// Parity generators `½(Π_{A_a} T + T Π_{A_a})` on cones `A₀, A₁`.
pub fn parity_generators(p: &BasisProjection, frame: &IndexFrame) -> Result<(FluxGenerator, FluxGenerator)> {
    let cones = frame.partition().cones_a;
    let g0 = parity_charge(p, &Region::Cone(cones[0]), frame.geometry())?.with_region(cones[0]);
    let g1 = parity_charge(p, &Region::Cone(cones[1]), frame.geometry())?.with_region(cones[1]);
    Ok((g0, g1))
}

/// Dressed cyclic `O(N)` charges on cones `A₀, A₁` of the stacked space.
pub fn cyclic_generators(p_stacked: &BasisProjection, copies: usize, frame: &IndexFrame) -> Result<(FluxGenerator, FluxGenerator)> {
    let q = cyclic_charge(copies)?;
    let expected = frame.geometry().dim_k() * copies;
    if p_stacked.dim() != expected {
        return Err(Error::DimensionMismatch { expected, found: p_stacked.dim() });
    }
    let cones = frame.partition().cones_a;
    let q0 = lift_charge(&q, frame.geometry(), &Region::Cone(cones[0]))?;
    let q1 = lift_charge(&q, frame.geometry(), &Region::Cone(cones[1]))?;
    Ok((dress_charge(p_stacked, &q0)?.with_region(cones[0]), dress_charge(p_stacked, &q1)?.with_region(cones[1])))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistStatistics {
    pub sigma: f64,
    pub theta_n: C64,
    pub omega_n: C64,
    pub residual: f64,
}

/// `σ` of the cyclic charge on `N` stacked copies, `θ_N = e^{πiσ/N²}` and
/// `ω_N = θ_N^{2N}`. `frame` is built on the single-copy geometry.
pub fn twist_statistics(p_stacked: &BasisProjection, copies: usize, frame: &IndexFrame) -> Result<TwistStatistics> {
    let (g0, g1) = cyclic_generators(p_stacked, copies, frame)?;
    let s = hall_sigma(p_stacked, &g0, &g1, frame)?;
    let n2 = (copies * copies) as f64;
    let theta_n = C64::from_polar(1.0, PI * s.value / n2);
    Ok(TwistStatistics { sigma: s.value, theta_n, omega_n: theta_n.powu(2 * copies as u32), residual: s.residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityIndices {
    pub nu: f64,
    pub nu_rounded: i64,
    pub z2: i8,
    /// Hall response of the parity generators, `ν/2` in the limit.
    pub sigma_parity: f64,
    /// Present iff `nu_rounded` is even.
    pub z8: Option<C64>,
}

/// Round `ν`, refusing values further than `tol` from an integer.
pub fn round_nu(nu: f64, tol: f64) -> Result<i64> {
    let r = nu.round();
    let distance = (nu - r).abs();
    if !(distance <= tol) {
        return Err(Error::Unconverged { nu, distance });
    }
    Ok(r as i64)
}

/// `z₂ = (-1)^ν` and, for even `ν`, the `Z/8` phase
/// `exchange_phase_closed(σ_parity, π, π)`.
pub fn parity_indices(p: &BasisProjection, frame: &IndexFrame, round_tol: f64) -> Result<ParityIndices> {
    let nu = chern_number(p, frame)?.value;
    let nu_rounded = round_nu(nu, round_tol)?;
    let (g0, g1) = parity_generators(p, frame)?;
    let sigma_parity = hall_sigma(p, &g0, &g1, frame)?.value;
    let even = nu_rounded.is_even();
    Ok(ParityIndices {
        nu,
        nu_rounded,
        z2: if even { 1 } else { -1 },
        sigma_parity,
        z8: even.then(|| exchange_phase_closed(sigma_parity, PI, PI)),
    })
}

/// Root of unity `e^{2πi num/den}` held exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalPhase {
    num: i64,
    den: i64,
}

impl RationalPhase {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den <= 0 {
            return Err(Error::InvalidArgument(format!("phase denominator must be positive, got {den}")));
        }
        let g = num.gcd(&den);
        Ok(Self { num: (num / g).rem_euclid(den / g), den: den / g })
    }

    pub fn one() -> Self {
        Self { num: 0, den: 1 }
    }

    /// Turns in `[0, 1)`, as `(numerator, denominator)` in lowest terms.
    pub fn turns(&self) -> (i64, i64) {
        (self.num, self.den)
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    pub fn pow(&self, k: i64) -> Self {
        Self::new(self.num * k, self.den).expect("positive denominator")
    }

    pub fn mul(&self, other: &Self) -> Self {
        let den = self.den.lcm(&other.den);
        Self::new(self.num * (den / self.den) + other.num * (den / other.den), den).expect("positive denominator")
    }

    pub fn order(&self) -> i64 {
        self.den
    }

    pub fn to_complex(&self) -> C64 {
        C64::from_polar(1.0, TAU * self.num as f64 / self.den as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predicted {
    pub sigma: f64,
    pub theta_n: RationalPhase,
    pub omega_n: RationalPhase,
    pub z2: i8,
    pub z8: Option<RationalPhase>,
}

/// Closed-form values for a free-fermion state of Chern number `ν` on `N`
/// odd copies: `σ = ν(N³-N)/24`, `θ_N = e^{2πi(ν/48)(N-1/N)}`,
/// `ω_N = e^{2πiν(N²-1)/24}`, `z₂ = (-1)^ν`, `z₈ = e^{2πiν/16}` for even `ν`.
pub fn predicted_free_fermion(nu: i64, copies: usize) -> Result<Predicted> {
    if copies == 0 || copies % 2 == 0 {
        return Err(Error::EvenCopies(copies));
    }
    let n = copies as i64;
    let even = nu.is_even();
    Ok(Predicted {
        sigma: (nu * (n * n * n - n)) as f64 / 24.0,
        theta_n: RationalPhase::new(nu * (n * n - 1), 48 * n)?,
        omega_n: RationalPhase::new(nu * (n * n - 1), 24)?,
        z2: if even { 1 } else { -1 },
        z8: if even { Some(RationalPhase::new(nu, 16)?) } else { None },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CocycleSpec {
    pub n: usize,
    pub omega_n: RationalPhase,
}

impl CocycleSpec {
    pub fn new(n: usize, omega_n: RationalPhase) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("cocycle order must be positive".into()));
        }
        if !omega_n.pow(n as i64).is_one() {
            return Err(Error::InvalidArgument(format!("ω_N = {omega_n:?} is not an N-th root of unity for N = {n}")));
        }
        Ok(Self { n, omega_n })
    }
}

/// `ω(a₁,a₂,a₃) = ω_N^{a₁⌊(a₂+a₃)/N⌋}`, exact. Arguments are reduced mod `N`.
pub fn cocycle_znn_exact(spec: &CocycleSpec, a1: i64, a2: i64, a3: i64) -> RationalPhase {
    let n = spec.n as i64;
    let (a1, a2, a3) = (a1.rem_euclid(n), a2.rem_euclid(n), a3.rem_euclid(n));
    spec.omega_n.pow(a1 * ((a2 + a3) / n))
}

pub fn cocycle_znn(spec: &CocycleSpec, a1: i64, a2: i64, a3: i64) -> C64 {
    cocycle_znn_exact(spec, a1, a2, a3).to_complex()
}

/// `δω(a₁,a₂,a₃,a₄)`; identically one for a cocycle.
pub fn cocycle_coboundary(spec: &CocycleSpec, a: [i64; 4]) -> RationalPhase {
    let w = |x, y, z| cocycle_znn_exact(spec, x, y, z);
    let [a1, a2, a3, a4] = a;
    let lhs = w(a2, a3, a4).mul(&w(a1, a2 + a3, a4)).mul(&w(a1, a2, a3));
    let rhs = w(a1 + a2, a3, a4).mul(&w(a1, a2, a3 + a4));
    lhs.mul(&rhs.pow(-1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseValue {
    pub re: f64,
    pub im: f64,
    pub arg: f64,
}

impl From<C64> for PhaseValue {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im, arg: z.arg() }
    }
}

/// Signed angular distance between two unit complex numbers.
pub fn phase_distance(a: C64, b: C64) -> f64 {
    (a * b.conj()).arg().abs()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub radius: f64,
    pub window_radius: f64,
    pub copies: usize,
    pub dim: usize,
    pub gap_used: f64,
    pub min_abs_eigenvalue: Option<f64>,
    pub hamiltonian_residual: Option<f64>,
    pub projection_residual: f64,
    pub nu_residual: f64,
    pub sigma_residual: Option<f64>,
    pub generator_residual: Option<f64>,
    pub wall_ms: Option<u128>,
}

/// Everything computed by one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub nu: f64,
    pub nu_rounded: Option<i64>,
    pub sigma: Option<f64>,
    pub theta_re: Option<f64>,
    pub theta_im: Option<f64>,
    #[serde(rename = "theta_N")]
    pub theta_n: Option<PhaseValue>,
    #[serde(rename = "omega_N")]
    pub omega_n: Option<PhaseValue>,
    pub z2: Option<i8>,
    pub z8: Option<PhaseValue>,
    pub diagnostics: Diagnostics,
}

impl IndexReport {
    pub fn new(nu: f64, diagnostics: Diagnostics) -> Self {
        Self {
            nu,
            nu_rounded: None,
            sigma: None,
            theta_re: None,
            theta_im: None,
            theta_n: None,
            omega_n: None,
            z2: None,
            z8: None,
            diagnostics,
        }
    }

    pub fn set_theta(&mut self, theta: C64) {
        self.theta_re = Some(theta.re);
        self.theta_im = Some(theta.im);
    }
}
