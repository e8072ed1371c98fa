use std::collections::BTreeSet;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::geometry::{LatticeGeometry, Region};
use crate::linalg::{self, CMat, HermitianEigen};
use crate::quasifree::{pfaffian_expectation, wick_expectation, CovarianceOperator};
use crate::sampling::{random_basis_projection, random_covariance, random_hermitian, random_mask, random_vectors};
use crate::symgen::{cyclic_charge, dress_charge, flux_unitary, parity_charge};

use super::config::SelftestKind;

pub const WICK_TOL: f64 = 1e-10;
pub const ALGEBRAIC_TOL: f64 = 1e-12;
pub const GROUP_LAW_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyTally {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestSummary {
    pub kind: SelftestKind,
    pub seed: u64,
    pub trials: usize,
    pub properties: Vec<PropertyTally>,
    /// First failing instance, with its inputs.
    pub counterexample: Option<Value>,
}

impl SelftestSummary {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.failed == 0)
    }

    pub fn lines(&self) -> Vec<String> {
        self.properties
            .iter()
            .map(|p| format!("{}: {}/{} passed (worst {:.2e}, tol {:.0e})", p.name, p.passed, p.passed + p.failed, p.worst, p.tolerance))
            .collect()
    }
}

struct Tally {
    props: Vec<PropertyTally>,
    counterexample: Option<Value>,
}

impl Tally {
    fn new(names: &[(&str, f64)]) -> Self {
        let props = names
            .iter()
            .map(|&(n, tol)| PropertyTally { name: n.into(), passed: 0, failed: 0, worst: 0.0, tolerance: tol })
            .collect();
        Self { props, counterexample: None }
    }

    fn record(&mut self, idx: usize, residual: f64, witness: impl FnOnce() -> Value) {
        let p = &mut self.props[idx];
        p.worst = p.worst.max(residual);
        if residual <= p.tolerance {
            p.passed += 1;
        } else {
            p.failed += 1;
            if self.counterexample.is_none() {
                let mut w = witness();
                w["property"] = json!(p.name);
                w["residual"] = json!(residual);
                self.counterexample = Some(w);
            }
        }
    }
}

fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &CMat) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect())).collect())
}

fn vectors_json(v: &[Vec<C64>]) -> Value {
    Value::Array(v.iter().map(|x| Value::Array(x.iter().map(|&z| complex_json(z)).collect())).collect())
}

fn unit(mut v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Randomized property suites. `wick`: Pfaffian against the permutation sum
/// for even products of at most 8 unit vectors in dimension at most 12, and
/// vanishing odd moments. `algebraic`: commutation of parity and dressed
/// generators with `P`, the flux group law, and the cyclic charge spectrum.
pub fn selftest(kind: SelftestKind, seed: u64, trials: usize) -> Result<SelftestSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tally = match kind {
        SelftestKind::Wick => wick_suite(&mut rng, trials)?,
        SelftestKind::Algebraic => algebraic_suite(&mut rng, trials)?,
    };
    Ok(SelftestSummary { kind, seed, trials, properties: tally.props, counterexample: tally.counterexample })
}

fn wick_suite(rng: &mut ChaCha8Rng, trials: usize) -> Result<Tally> {
    let mut t = Tally::new(&[("pfaffian_vs_permutation_sum", WICK_TOL), ("odd_moments_vanish", 0.0)]);
    for trial in 0..trials {
        let dim = 2 * rng.gen_range(1..=6);
        let s: CovarianceOperator = random_covariance(rng, dim);
        let len = 2 * rng.gen_range(1..=4);
        let vs: Vec<Vec<C64>> = random_vectors(rng, dim, len).into_iter().map(unit).collect();
        let d = (pfaffian_expectation(&s, &vs)? - wick_expectation(&s, &vs)?).norm();
        t.record(0, d, || json!({"trial": trial, "covariance": matrix_json(s.matrix()), "vectors": vectors_json(&vs)}));
        let odd = &vs[..len - 1];
        let w = wick_expectation(&s, odd)?.norm();
        t.record(1, w, || json!({"trial": trial, "covariance": matrix_json(s.matrix()), "vectors": vectors_json(odd)}));
    }
    Ok(t)
}

fn algebraic_suite(rng: &mut ChaCha8Rng, trials: usize) -> Result<Tally> {
    let mut t = Tally::new(&[
        ("parity_generator_commutes", ALGEBRAIC_TOL),
        ("dressed_charge_commutes", ALGEBRAIC_TOL),
        ("flux_group_law", GROUP_LAW_TOL),
        ("cyclic_charge_spectrum", 1e-12),
    ]);
    for trial in 0..trials {
        let sites = rng.gen_range(2..=12);
        let points: Vec<[f64; 2]> = (0..sites).map(|i| [i as f64, 0.0]).collect();
        let geometry = LatticeGeometry::from_sites(&points, 2, [0.5, 0.37])?;
        let p = random_basis_projection(rng, geometry.dim_k());
        let mask = random_mask(rng, sites);
        let ids: BTreeSet<usize> = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        let g = parity_charge(&p, &Region::Sites(ids), &geometry)?;
        t.record(0, g.commutator_residual(&p), || json!({"trial": trial, "projection": matrix_json(p.matrix()), "mask": mask}));

        let q = random_hermitian(rng, p.dim());
        let d = dress_charge(&p, &q)?;
        t.record(1, d.commutator_residual(&p), || {
            json!({"trial": trial, "projection": matrix_json(p.matrix()), "charge": matrix_json(&q)})
        });

        let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let lhs = &flux_unitary(&d, a)? * &flux_unitary(&d, b)?;
        let rhs = flux_unitary(&d, a + b)?;
        t.record(2, linalg::max_abs_diff(lhs.as_ref(), rhs.as_ref()), || {
            json!({"trial": trial, "generator": matrix_json(d.matrix()), "alpha": a, "beta": b})
        });

        let n = 2 * (trial % 6) + 1;
        let values = HermitianEigen::new(cyclic_charge(n)?.matrix().as_ref())?.values;
        let half = (n as i64 - 1) / 2;
        let dev = values.iter().zip(-half..=half).map(|(v, j)| (v - j as f64).abs()).fold(0.0, f64::max);
        t.record(3, dev, || json!({"trial": trial, "copies": n, "eigenvalues": values}));
    }
    Ok(t)
}
