//! Gapped quadratic Hamiltonians on the one-particle space, written in the
//! canonical Majorana basis, and momentum-space Chern numbers of their
//! periodic counterparts.
//!
//! In the Majorana basis `J` is entrywise complex conjugation and every
//! one-particle Hamiltonian is `H = iA` with `A` real antisymmetric, so
//! `JHJ = -H` is the statement that `H` is purely imaginary.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticeGeometry;
use crate::linalg::{self, CMat, ZERO};

/// Tolerance for `H = H†` and `JHJ = -H`.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Bulk gaps below this are treated as closed.
pub const GAP_FLOOR: f64 = 1e-9;

/// Orientation of the plaquette sum relative to the counterclockwise cone
/// order. Fixed by requiring the real-space index of the QWZ layer at
/// `u = 1` to equal twice its band Chern number, with that Chern number `+1`.
const BZ_ORIENTATION: f64 = 1.0;

pub const SIGN_CONVENTION: &str =
    "nu > 0 for qwz(u=1); cones A0,A1,A2 counterclockwise; tknn_chern(qwz, u=1) = +1";

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    matrix: CMat,
    geometry: LatticeGeometry,
    family_tag: String,
    parameters: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDiagnostics {
    pub min_abs_eigenvalue: f64,
    pub max_abs_eigenvalue: f64,
    pub eigenvalue_symmetry_residual: f64,
}

impl SpectralDiagnostics {
    /// From an ascending spectrum.
    pub fn from_spectrum(values: &[f64]) -> Self {
        let n = values.len();
        let abs = values.iter().map(|v| v.abs());
        Self {
            min_abs_eigenvalue: abs.clone().fold(f64::INFINITY, f64::min),
            max_abs_eigenvalue: abs.fold(0.0, f64::max),
            eigenvalue_symmetry_residual: (0..n)
                .map(|i| (values[i] + values[n - 1 - i]).abs())
                .fold(0.0, f64::max),
        }
    }
}

impl QuadraticHamiltonian {
    /// Validates `H = H†`, `JHJ = -H` and the dimension against the geometry.
    pub fn new(
        matrix: CMat,
        geometry: LatticeGeometry,
        family_tag: impl Into<String>,
        parameters: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let n = geometry.dim_k();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        let herm = linalg::hermiticity_residual(matrix.as_ref());
        if herm > STRUCTURE_TOL {
            return Err(Error::InvalidHamiltonian(format!("H - H† residual {herm:.3e}")));
        }
        let real_part = (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| matrix[(i, j)].re.abs())
            .fold(0.0, f64::max);
        if real_part > STRUCTURE_TOL {
            return Err(Error::InvalidHamiltonian(format!("JHJ + H residual {real_part:.3e}")));
        }
        Ok(Self { matrix, geometry, family_tag: family_tag.into(), parameters })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn family_tag(&self) -> &str {
        &self.family_tag
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spectral_diagnostics(&self) -> Result<SpectralDiagnostics> {
        let evd = linalg::HermitianEigen::new(self.matrix.as_ref())?;
        Ok(SpectralDiagnostics::from_spectrum(&evd.values))
    }

    /// `max |JHJ + H|`.
    pub fn conjugation_residual(&self) -> f64 {
        let j = linalg::conjugate(self.matrix.as_ref());
        linalg::max_abs_diff(j.as_ref(), (-&self.matrix).as_ref())
    }
}

/// Translation-invariant two-band families with a momentum-space form
/// `h(k) = d(k)·σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BlochModel {
    /// `d = (sin kx, sin ky, u + cos kx + cos ky)`.
    Qwz { u: f64 },
    /// Spinless p-wave BdG form `d = (Re Δ, -Im Δ, ξ)`, nearest-neighbour
    /// hopping 1, `ξ = -2(cos kx + cos ky) - mu`,
    /// `Δ = 2iδ(sin kx - i·chirality·sin ky)`.
    Pip { mu: f64, delta: f64, chirality: f64 },
}

impl BlochModel {
    pub fn d_vector(&self, kx: f64, ky: f64) -> [f64; 3] {
        match *self {
            BlochModel::Qwz { u } => [kx.sin(), ky.sin(), u + kx.cos() + ky.cos()],
            BlochModel::Pip { mu, delta, chirality } => {
                let xi = -2.0 * (kx.cos() + ky.cos()) - mu;
                // 2iδ(sin kx - i c sin ky) = 2δ(c sin ky) + i 2δ sin kx
                let pair = C64::new(2.0 * delta * chirality * ky.sin(), 2.0 * delta * kx.sin());
                [pair.re, -pair.im, xi]
            }
        }
    }

    /// Minimum of `|d(k)|` over a `kgrid × kgrid` mesh that contains the
    /// high-symmetry momenta; exact zero on a Fermi surface.
    pub fn bulk_gap(&self, kgrid: usize) -> f64 {
        if let BlochModel::Pip { mu, delta, .. } = *self {
            if delta == 0.0 && mu.abs() < 4.0 {
                return 0.0;
            }
        }
        let kgrid = kgrid.max(2) + kgrid % 2;
        let mut gap = f64::INFINITY;
        for i in 0..kgrid {
            for j in 0..kgrid {
                let d = self.d_vector(TAU * i as f64 / kgrid as f64, TAU * j as f64 / kgrid as f64);
                gap = gap.min((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt());
            }
        }
        gap
    }

    pub fn ensure_gapped(&self, kgrid: usize) -> Result<f64> {
        let gap = self.bulk_gap(kgrid);
        if gap < GAP_FLOOR {
            return Err(Error::GaplessParameters(format!("{self:?}: bulk gap {gap:.3e}")));
        }
        Ok(gap)
    }
}

/// Lower-band eigenvector of `d·σ`, from whichever null-space row is better
/// conditioned.
fn lower_band_vector(d: [f64; 3]) -> [C64; 2] {
    let e = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let a = [C64::new(d[0], -d[1]), C64::new(-(d[2] + e), 0.0)];
    let b = [C64::new(e - d[2], 0.0), C64::new(-d[0], -d[1])];
    let norm = |v: &[C64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v = if norm(&a) >= norm(&b) { a } else { b };
    let n = norm(&v);
    [v[0] / n, v[1] / n]
}

/// Chern number of the negative-energy band by the plaquette link-phase
/// method on a `kgrid × kgrid` Brillouin-zone mesh.
pub fn tknn_chern(model: &BlochModel, kgrid: usize) -> Result<i64> {
    if kgrid < 50 {
        return Err(Error::InvalidArgument(format!("kgrid must be at least 50, got {kgrid}")));
    }
    model.ensure_gapped(kgrid)?;
    let step = TAU / kgrid as f64;
    let states: Vec<Vec<[C64; 2]>> = (0..kgrid)
        .map(|i| {
            (0..kgrid)
                .map(|j| lower_band_vector(model.d_vector(step * i as f64, step * j as f64)))
                .collect()
        })
        .collect();
    let link = |a: &[C64; 2], b: &[C64; 2]| {
        let z = a[0].conj() * b[0] + a[1].conj() * b[1];
        z / z.norm()
    };
    let mut total = 0.0;
    for i in 0..kgrid {
        let ip = (i + 1) % kgrid;
        for j in 0..kgrid {
            let jp = (j + 1) % kgrid;
            let u1 = link(&states[i][j], &states[ip][j]);
            let u2 = link(&states[ip][j], &states[ip][jp]);
            let u3 = link(&states[i][jp], &states[ip][jp]);
            let u4 = link(&states[i][j], &states[i][jp]);
            total += (u1 * u2 * u3.conj() * u4.conj()).arg();
        }
    }
    let c = BZ_ORIENTATION * total / TAU;
    let rounded = c.round();
    if (c - rounded).abs() > 1e-6 {
        return Err(Error::LinearAlgebra(format!("plaquette sum {c} is not an integer")));
    }
    Ok(rounded as i64)
}

/// Complex-fermion quadratic form `Σ h_ij a†_i a_j + ½ Σ (Δ_ij a†_i a†_j + h.c.)`
/// rewritten with `a_j = (γ_{2j} + iγ_{2j+1})/2`.
///
/// Entry `(2j+s, 2k+t)` of the result is, for `s,t ∈ {0,1}`:
/// `i(Im h + Im Δ)`, `i(Re h - Re Δ)`, `-i(Re h + Re Δ)`, `i(Im h - Im Δ)`.
fn majorana_from_bdg(h: &CMat, pairing: &CMat) -> CMat {
    let m = h.nrows();
    let mut out = Mat::<C64>::zeros(2 * m, 2 * m);
    let i = linalg::I;
    for k in 0..m {
        for j in 0..m {
            let (hv, dv) = (h[(j, k)], pairing[(j, k)]);
            if hv == ZERO && dv == ZERO {
                continue;
            }
            out[(2 * j, 2 * k)] = i * (hv.im + dv.im);
            out[(2 * j, 2 * k + 1)] = i * (hv.re - dv.re);
            out[(2 * j + 1, 2 * k)] = -i * (hv.re + dv.re);
            out[(2 * j + 1, 2 * k + 1)] = i * (hv.im - dv.im);
        }
    }
    out
}

fn require_majorana_count(geometry: &LatticeGeometry, family: &str, count: usize) -> Result<()> {
    if geometry.majorana_count() != count {
        return Err(Error::GeometryMismatch(format!(
            "{family} needs {count} Majorana modes per site, geometry has {}",
            geometry.majorana_count()
        )));
    }
    Ok(())
}

const NEIGHBOURS: [(i64, i64); 2] = [(1, 0), (0, 1)];

/// QWZ two-band Chern insulator on the open geometry; four Majorana modes
/// per site (two complex orbitals).
pub fn build_qwz(u: f64, geometry: &LatticeGeometry) -> Result<QuadraticHamiltonian> {
    require_majorana_count(geometry, "qwz", 4)?;
    BlochModel::Qwz { u }.ensure_gapped(200)?;
    let ns = geometry.site_count();
    let mut h = Mat::<C64>::zeros(2 * ns, 2 * ns);
    let c = |re: f64, im: f64| C64::new(re, im);
    // hopping a†_{r+d} T_d a_r with T_x = (σz + iσx)/2, T_y = (σz + iσy)/2
    let t_x = [[c(0.5, 0.0), c(0.0, 0.5)], [c(0.0, 0.5), c(-0.5, 0.0)]];
    let t_y = [[c(0.5, 0.0), c(0.5, 0.0)], [c(-0.5, 0.0), c(-0.5, 0.0)]];
    let lookup = geometry.site_lookup();
    for s in geometry.sites() {
        h[(2 * s.id, 2 * s.id)] = c(u, 0.0);
        h[(2 * s.id + 1, 2 * s.id + 1)] = c(-u, 0.0);
        let (x, y) = (s.x.round() as i64, s.y.round() as i64);
        for (d, t) in NEIGHBOURS.iter().zip([t_x, t_y]) {
            if let Some(&other) = lookup.get(&(x + d.0, y + d.1)) {
                for a in 0..2 {
                    for b in 0..2 {
                        h[(2 * other + a, 2 * s.id + b)] += t[a][b];
                        h[(2 * s.id + b, 2 * other + a)] += t[a][b].conj();
                    }
                }
            }
        }
    }
    let pairing = Mat::<C64>::zeros(2 * ns, 2 * ns);
    QuadraticHamiltonian::new(
        majorana_from_bdg(&h, &pairing),
        geometry.clone(),
        "qwz",
        BTreeMap::from([("u".to_string(), u)]),
    )
}

/// Spinless p-wave superconductor with pairing `Δ_{r,r+x} = δ`,
/// `Δ_{r,r+y} = -i·chirality·δ`; two Majorana modes per site.
///
/// `chirality = +1` gives the weak-pairing phase (`-4 < mu < 0`) the same
/// orientation as the QWZ layer at `u = 1`.
pub fn build_pip(mu: f64, delta: f64, geometry: &LatticeGeometry) -> Result<QuadraticHamiltonian> {
    build_pip_with_chirality(mu, delta, 1.0, geometry)
}

pub fn build_pip_with_chirality(
    mu: f64,
    delta: f64,
    chirality: f64,
    geometry: &LatticeGeometry,
) -> Result<QuadraticHamiltonian> {
    require_majorana_count(geometry, "pip", 2)?;
    if chirality.abs() != 1.0 {
        return Err(Error::InvalidArgument(format!("chirality must be ±1, got {chirality}")));
    }
    BlochModel::Pip { mu, delta, chirality }.ensure_gapped(200)?;
    let ns = geometry.site_count();
    let mut h = Mat::<C64>::zeros(ns, ns);
    let mut pairing = Mat::<C64>::zeros(ns, ns);
    let lookup = geometry.site_lookup();
    let phases = [C64::new(delta, 0.0), C64::new(0.0, -chirality * delta)];
    for s in geometry.sites() {
        h[(s.id, s.id)] = C64::new(-mu, 0.0);
        let (x, y) = (s.x.round() as i64, s.y.round() as i64);
        for (d, phase) in NEIGHBOURS.iter().zip(phases) {
            if let Some(&other) = lookup.get(&(x + d.0, y + d.1)) {
                h[(s.id, other)] = C64::new(-1.0, 0.0);
                h[(other, s.id)] = C64::new(-1.0, 0.0);
                pairing[(s.id, other)] = phase;
                pairing[(other, s.id)] = -phase;
            }
        }
    }
    QuadraticHamiltonian::new(
        majorana_from_bdg(&h, &pairing),
        geometry.clone(),
        "pip",
        BTreeMap::from([
            ("mu".to_string(), mu),
            ("delta".to_string(), delta),
            ("chirality".to_string(), chirality),
        ]),
    )
}

/// Decoupled on-site pairs `(γ_{2k}, γ_{2k+1})`; spectrum `±energy`.
pub fn build_trivial(geometry: &LatticeGeometry) -> Result<QuadraticHamiltonian> {
    build_trivial_with_energy(1.0, geometry)
}

pub fn build_trivial_with_energy(energy: f64, geometry: &LatticeGeometry) -> Result<QuadraticHamiltonian> {
    if !(energy.is_finite() && energy != 0.0) {
        return Err(Error::GaplessParameters(format!("on-site energy {energy}")));
    }
    let n = geometry.dim_k();
    let mut a = Mat::<C64>::zeros(n, n);
    for k in 0..n / 2 {
        a[(2 * k, 2 * k + 1)] = C64::new(0.0, energy);
        a[(2 * k + 1, 2 * k)] = C64::new(0.0, -energy);
    }
    QuadraticHamiltonian::new(a, geometry.clone(), "trivial", BTreeMap::from([("energy".to_string(), energy)]))
}

/// Direct sum of two models on the same sites; per site the modes of `h1`
/// come first, then those of `h2`.
pub fn stack(h1: &QuadraticHamiltonian, h2: &QuadraticHamiltonian) -> Result<QuadraticHamiltonian> {
    let (g1, g2) = (h1.geometry(), h2.geometry());
    if !g1.same_sites(g2) {
        return Err(Error::GeometryMismatch("stacked models live on different sites".into()));
    }
    let (n1, n2) = (g1.majorana_count(), g2.majorana_count());
    let geometry = g1.with_majorana_count(n1 + n2)?;
    let per = n1 + n2;
    let map1 = |i: usize| (i / n1) * per + i % n1;
    let map2 = |i: usize| (i / n2) * per + n1 + i % n2;
    let mut m = Mat::<C64>::zeros(geometry.dim_k(), geometry.dim_k());
    for j in 0..h1.dim() {
        for i in 0..h1.dim() {
            m[(map1(i), map1(j))] = h1.matrix[(i, j)];
        }
    }
    for j in 0..h2.dim() {
        for i in 0..h2.dim() {
            m[(map2(i), map2(j))] = h2.matrix[(i, j)];
        }
    }
    let mut parameters = BTreeMap::new();
    for (prefix, h) in [("0", h1), ("1", h2)] {
        for (k, v) in h.parameters() {
            parameters.insert(format!("{prefix}.{k}"), *v);
        }
    }
    let tag = format!("stack({},{})", h1.family_tag(), h2.family_tag());
    QuadraticHamiltonian::new(m, geometry, tag, parameters)
}

/// `copies` identical layers, `H ⊗ I`, index order (site, Majorana, copy).
pub fn replicate(h: &QuadraticHamiltonian, copies: usize) -> Result<QuadraticHamiltonian> {
    if copies == 0 {
        return Err(Error::InvalidArgument("copies must be positive".into()));
    }
    let geometry = h.geometry().with_majorana_count(h.geometry().majorana_count() * copies)?;
    let mut parameters = h.parameters().clone();
    parameters.insert("copies".into(), copies as f64);
    QuadraticHamiltonian::new(
        linalg::kron_identity(h.matrix().as_ref(), copies),
        geometry,
        format!("{}^{copies}", h.family_tag()),
        parameters,
    )
}

/// Band Chern number expected of the real-space index: QWZ layers count
/// twice (a complex band fills two Majorana bands), BdG bands once.
pub fn expected_nu(model: &BlochModel, kgrid: usize) -> Result<i64> {
    let c = tknn_chern(model, kgrid)?;
    Ok(match model {
        BlochModel::Qwz { .. } => 2 * c,
        BlochModel::Pip { .. } => c,
    })
}
