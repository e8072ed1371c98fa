use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{build_disk_lattice, make_good_partition, LatticeGeometry, LatticeKind};
use crate::invariants::{
    chern_number, exchange_phase_closed, hall_sigma, parity_generators, parity_indices, round_nu, twist_statistics,
    Diagnostics, IndexFrame, IndexReport,
};
use crate::models::{build_pip, build_qwz, build_trivial, expected_nu, tknn_chern, QuadraticHamiltonian, SIGN_CONVENTION};
use crate::quasifree::{ground_projection, BasisProjection};

use super::config::{ModelConfig, RunConfig, Task};
use super::CliError;

/// An [`IndexReport`] together with what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: Task,
    #[serde(flatten)]
    pub report: IndexReport,
    pub sign_convention: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub model: ModelConfig,
    pub kgrid: usize,
    pub tknn_chern: i64,
    pub expected_nu: i64,
    pub bulk_gap: f64,
    pub sign_convention: String,
}

/// Disk, Hamiltonian, ground projection and index frame for one radius.
pub struct Prepared {
    pub geometry: LatticeGeometry,
    pub hamiltonian: QuadraticHamiltonian,
    pub projection: BasisProjection,
    pub frame: IndexFrame,
}

pub fn prepare(config: &RunConfig, radius: f64) -> Result<Prepared> {
    let g = &config.geometry;
    let m = config.model;
    if let Some(bloch) = m.bloch() {
        bloch.ensure_gapped(config.numerics.kgrid)?;
    }
    let geometry = build_disk_lattice(LatticeKind::Square, radius, g.apex_offset, m.majorana_count())?;
    let hamiltonian = match m {
        ModelConfig::Qwz { u } => build_qwz(u, &geometry)?,
        ModelConfig::Pip { mu, delta } => build_pip(mu, delta, &geometry)?,
        ModelConfig::Trivial => build_trivial(&geometry)?,
    };
    let projection = ground_projection(&hamiltonian, config.numerics.gap_tol)?;
    let partition = make_good_partition(g.apex_offset, g.boundary_angles, g.gap_halfwidth)?;
    let frame = IndexFrame::new(&geometry, &partition, config.numerics.window_fraction)?;
    Ok(Prepared { geometry, hamiltonian, projection, frame })
}

fn diagnostics(p: &Prepared, radius: f64, copies: usize) -> Diagnostics {
    Diagnostics {
        radius,
        window_radius: p.frame.window_radius(),
        copies,
        dim: p.projection.dim() * copies,
        gap_used: p.projection.gap_used(),
        hamiltonian_residual: Some(p.hamiltonian.conjugation_residual()),
        projection_residual: p.projection.conjugation_residual().max(p.projection.idempotency_residual()),
        ..Default::default()
    }
}

/// Build geometry, model, ground state and generators, and evaluate the
/// indices the task asks for.
pub fn run(config: &RunConfig, timing: bool) -> std::result::Result<RunReport, CliError> {
    config.validate()?;
    if matches!(config.task, Task::Oracle | Task::Selftest) {
        return Err(CliError::Config(format!("task {:?} does not produce an index report", config.task)));
    }
    let start = Instant::now();
    let report = compute(config, config.geometry.radius).map_err(CliError::Compute)?;
    let mut report = report;
    if timing {
        report.diagnostics.wall_ms = Some(start.elapsed().as_millis());
    }
    Ok(RunReport { task: config.task, report, sign_convention: SIGN_CONVENTION.into(), config: config.clone() })
}

fn compute(config: &RunConfig, radius: f64) -> Result<IndexReport> {
    let prep = prepare(config, radius)?;
    let (p, frame) = (&prep.projection, &prep.frame);
    let tol = config.numerics.nu_round_tol;
    match config.task {
        Task::Parity => {
            let idx = parity_indices(p, frame, tol)?;
            let mut d = diagnostics(&prep, radius, 1);
            d.nu_residual = chern_number(p, frame)?.residual;
            let mut r = IndexReport::new(idx.nu, d);
            r.nu_rounded = Some(idx.nu_rounded);
            r.sigma = Some(idx.sigma_parity);
            r.set_theta(exchange_phase_closed(idx.sigma_parity, PI, PI));
            r.z2 = Some(idx.z2);
            r.z8 = idx.z8.map(Into::into);
            Ok(r)
        }
        Task::Twist => {
            let nu = chern_number(p, frame)?;
            let n = config.copies;
            let stacked = p.replicate(n);
            let tw = twist_statistics(&stacked, n, frame)?;
            let mut d = diagnostics(&prep, radius, n);
            d.nu_residual = nu.residual;
            d.sigma_residual = Some(tw.residual);
            let mut r = IndexReport::new(nu.value, d);
            r.nu_rounded = round_nu(nu.value, tol).ok();
            r.sigma = Some(tw.sigma);
            r.set_theta(exchange_phase_closed(tw.sigma, TAU / n as f64, TAU / n as f64));
            r.theta_n = Some(tw.theta_n.into());
            r.omega_n = Some(tw.omega_n.into());
            Ok(r)
        }
        _ => {
            let nu = chern_number(p, frame)?;
            let mut d = diagnostics(&prep, radius, 1);
            d.nu_residual = nu.residual;
            let mut r = IndexReport::new(nu.value, d);
            r.nu_rounded = round_nu(nu.value, tol).ok();
            Ok(r)
        }
    }
}

pub fn oracle(config: &RunConfig) -> std::result::Result<OracleReport, CliError> {
    config.validate()?;
    let bloch = config
        .model
        .bloch()
        .ok_or_else(|| CliError::Config("the trivial model has no momentum-space oracle".into()))?;
    let k = config.numerics.kgrid;
    let c = tknn_chern(&bloch, k).map_err(CliError::Compute)?;
    Ok(OracleReport {
        model: config.model,
        kgrid: k,
        tknn_chern: c,
        expected_nu: expected_nu(&bloch, k).map_err(CliError::Compute)?,
        bulk_gap: bloch.bulk_gap(k),
        sign_convention: SIGN_CONVENTION.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub radius: f64,
    pub nu: Option<f64>,
    pub sigma: Option<f64>,
    pub err_nu: Option<f64>,
    pub wall_ms: Option<u128>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("sweep rows serialize");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
    }
}

/// One run per radius on a pool of `jobs` workers. `nu` is the real-space
/// Chern number, `sigma` the Hall response of the parity generators and
/// `err_nu` the distance to the momentum-space oracle. Failures are kept
/// in their row.
pub fn sweep_radius(config: &RunConfig, jobs: usize, timing: bool) -> std::result::Result<SweepResult, CliError> {
    config.validate()?;
    config.validate_radii()?;
    let target = match config.model.bloch() {
        Some(b) => expected_nu(&b, config.numerics.kgrid).ok(),
        None => Some(0),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let rows = pool.install(|| {
        config
            .radii
            .par_iter()
            .map(|&radius| {
                let start = Instant::now();
                let out = sweep_point(config, radius);
                let wall_ms = timing.then(|| start.elapsed().as_millis());
                match out {
                    Ok((nu, sigma)) => SweepRow {
                        radius,
                        nu: Some(nu),
                        sigma: Some(sigma),
                        err_nu: target.map(|t| (nu - t as f64).abs()),
                        wall_ms,
                        error: None,
                    },
                    Err(e) => SweepRow { radius, nu: None, sigma: None, err_nu: None, wall_ms, error: Some(e.to_string()) },
                }
            })
            .collect()
    });
    Ok(SweepResult { rows })
}

fn sweep_point(config: &RunConfig, radius: f64) -> Result<(f64, f64)> {
    let prep = prepare(config, radius)?;
    let nu = chern_number(&prep.projection, &prep.frame)?.value;
    let (g0, g1) = parity_generators(&prep.projection, &prep.frame)?;
    let sigma = hall_sigma(&prep.projection, &g0, &g1, &prep.frame)?.value;
    Ok((nu, sigma))
}
