//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line on
//! the real stdout (not captured by the harness); the test fails if any
//! criterion fails.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::time::Instant;

use num_complex::Complex64 as C64;
use twistlab::cli::{selftest, SelftestKind};
use twistlab::geometry::{
    build_disk_lattice, make_good_partition, LatticeGeometry, LatticeKind, DEFAULT_APEX_OFFSET, DEFAULT_BOUNDARY_ANGLES,
    DEFAULT_GAP_HALFWIDTH,
};
use twistlab::invariants::*;
use twistlab::models::{build_pip, build_qwz, build_trivial, expected_nu, BlochModel, QuadraticHamiltonian};
use twistlab::quasifree::{ground_projection, BasisProjection, DISK_GAP_TOL};

const KGRID: usize = 200;
const QWZ: BlochModel = BlochModel::Qwz { u: 1.0 };
const PIP: BlochModel = BlochModel::Pip { mu: -1.0, delta: 0.5, chirality: 1.0 };

struct Outcome {
    lines: Vec<String>,
    failures: usize,
}

impl Outcome {
    fn report(&mut self, id: usize, ok: bool, detail: String, started: Instant) {
        let line = format!(
            "criterion {id:>2}: {} {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{line}");
        let _ = out.flush();
        if !ok {
            self.failures += 1;
        }
        self.lines.push(line);
    }
}

struct Disk {
    projection: BasisProjection,
    frame: IndexFrame,
}

fn disk(
    model: fn(&LatticeGeometry) -> QuadraticHamiltonian,
    majoranas: usize,
    radius: f64,
    apex: [f64; 2],
    rotation: f64,
) -> Disk {
    let g = build_disk_lattice(LatticeKind::Square, radius, apex, majoranas).unwrap();
    let p = ground_projection(&model(&g), DISK_GAP_TOL).unwrap();
    let part = make_good_partition(apex, DEFAULT_BOUNDARY_ANGLES, DEFAULT_GAP_HALFWIDTH)
        .unwrap()
        .rotated(rotation, DEFAULT_GAP_HALFWIDTH)
        .unwrap();
    Disk { projection: p, frame: IndexFrame::new(&g, &part, DEFAULT_WINDOW_FRACTION).unwrap() }
}

fn qwz(g: &LatticeGeometry) -> QuadraticHamiltonian {
    build_qwz(1.0, g).unwrap()
}

fn pip(g: &LatticeGeometry) -> QuadraticHamiltonian {
    build_pip(-1.0, 0.5, g).unwrap()
}

fn trivial(g: &LatticeGeometry) -> QuadraticHamiltonian {
    build_trivial(g).unwrap()
}

fn phase(turns: f64) -> C64 {
    C64::from_polar(1.0, TAU * turns)
}

/// Index `k` of the nearest 16th root of unity `e^{2πik/16}`.
fn z16_index(z: C64) -> i64 {
    (z.arg() * 16.0 / TAU).round().rem_euclid(16.0) as i64
}

#[test]
fn acceptance() {
    let mut out = Outcome { lines: Vec::new(), failures: 0 };
    let nu_qwz = expected_nu(&QWZ, KGRID).unwrap();
    let nu_pip = expected_nu(&PIP, KGRID).unwrap();

    // 1. real-space Chern quantization at R = 16
    let t = Instant::now();
    let q16 = disk(qwz, 4, 16.0, DEFAULT_APEX_OFFSET, 0.0);
    let nu_q = chern_number(&q16.projection, &q16.frame).unwrap().value;
    let t_qwz = t.elapsed().as_secs_f64();
    let t2 = Instant::now();
    let p16 = disk(pip, 2, 16.0, DEFAULT_APEX_OFFSET, 0.0);
    let nu_p = chern_number(&p16.projection, &p16.frame).unwrap().value;
    let t_pip = t2.elapsed().as_secs_f64();
    out.report(
        1,
        nu_qwz == 2 && (nu_q - 2.0).abs() <= 0.05 && nu_pip.abs() == 1 && (nu_p - nu_pip as f64).abs() <= 0.05 && t_qwz.max(t_pip) <= 300.0,
        format!("qwz nu={nu_q:.5} (oracle {nu_qwz}, {t_qwz:.0}s); p+ip nu={nu_p:.5} (oracle {nu_pip}, {t_pip:.0}s)"),
        t,
    );

    // 2. trivial model exactness
    let t = Instant::now();
    let mut worst = 0.0f64;
    for radius in [5.0, 12.0] {
        let d = disk(trivial, 2, radius, DEFAULT_APEX_OFFSET, 0.0);
        let (p, f) = (&d.projection, &d.frame);
        worst = worst.max(chern_number(p, f).unwrap().value.abs());
        let (g0, g1) = parity_generators(p, f).unwrap();
        let s = hall_sigma(p, &g0, &g1, f).unwrap().value;
        worst = worst.max(s.abs());
        worst = worst.max((exchange_phase_closed(s, PI, PI) - 1.0).norm());
        let idx = parity_indices(p, f, DEFAULT_NU_ROUND_TOL).unwrap();
        worst = worst.max((idx.z8.unwrap() - 1.0).norm());
        let tw = twist_statistics(&p.replicate(3), 3, f).unwrap();
        worst = worst.max(tw.sigma.abs()).max((tw.theta_n - 1.0).norm()).max((tw.omega_n - 1.0).norm());
        let (c0, c1) = cyclic_generators(&p.replicate(3), 3, f).unwrap();
        worst = worst.max((exchange_phase_bch(&p.replicate(3), &c0, &c1, 0.1, 0.1, f).unwrap() - 1.0).norm());
    }
    out.report(2, worst <= 1e-10, format!("max deviation {worst:.2e} over radii 5, 12"), t);

    // 3. parity-flux relation 4πi Tr(P[Q̃₀, Q̃₁]) = ν
    let t = Instant::now();
    let (g0, g1) = parity_generators(&q16.projection, &q16.frame).unwrap();
    let sigma_par = hall_sigma(&q16.projection, &g0, &g1, &q16.frame).unwrap().value;
    out.report(
        3,
        (2.0 * sigma_par - nu_q).abs() <= 0.05,
        format!("4πi Tr P[Q0,Q1] = {:.5}, nu = {nu_q:.5}", 2.0 * sigma_par),
        t,
    );

    // 4. Z/8 phase and Z/2 index
    let t = Instant::now();
    let iq = parity_indices(&q16.projection, &q16.frame, DEFAULT_NU_ROUND_TOL).unwrap();
    let ip = parity_indices(&p16.projection, &p16.frame, DEFAULT_NU_ROUND_TOL).unwrap();
    let z8_err = iq.z8.map(|z| phase_distance(z, C64::from_polar(1.0, PI / 4.0))).unwrap_or(f64::INFINITY);
    out.report(
        4,
        iq.nu_rounded == 2 && z8_err <= 0.05 && ip.z2 == -1 && ip.z8.is_none(),
        format!("qwz z8 arg={:.5} (err {z8_err:.2e} rad); p+ip z2={}", iq.z8.map_or(f64::NAN, |z| z.arg()), ip.z2),
        t,
    );

    // 5. twist statistics, N = 3 stack of QWZ at R = 10
    let t = Instant::now();
    let q10 = disk(qwz, 4, 10.0, DEFAULT_APEX_OFFSET, 0.0);
    let stacked = q10.projection.replicate(3);
    let tw = twist_statistics(&stacked, 3, &q10.frame).unwrap();
    let pred = predicted_free_fermion(2, 3).unwrap();
    let theta_err = phase_distance(tw.theta_n, phase(1.0 / 9.0));
    let omega_err = phase_distance(tw.omega_n, pred.omega_n.to_complex());
    out.report(
        5,
        (tw.sigma - 2.0).abs() <= 0.1 && theta_err <= 0.05 && omega_err <= 0.1,
        format!("R=10 sigma={:.5}, theta_3 err {theta_err:.2e} rad, omega_3 err {omega_err:.2e} rad", tw.sigma),
        t,
    );

    // 6. BCH cross-check on the same generators
    let t = Instant::now();
    let (c0, c1) = cyclic_generators(&stacked, 3, &q10.frame).unwrap();
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&a| {
            let bch = exchange_phase_bch(&stacked, &c0, &c1, a, a, &q10.frame).unwrap();
            (bch - exchange_phase_closed(tw.sigma, a, a)).norm()
        })
        .collect();
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    out.report(
        6,
        errs[0] <= 1e-4 && ratios.iter().all(|&r| r >= 4.0),
        format!("errors {:.2e}, {:.2e}, {:.2e}; halving ratios {:.2}, {:.2}", errs[0], errs[1], errs[2], ratios[0], ratios[1]),
        t,
    );

    // 7. Wick/Pfaffian oracle
    let t = Instant::now();
    let s = selftest(SelftestKind::Wick, 42, 100).unwrap();
    let (pf, odd) = (&s.properties[0], &s.properties[1]);
    out.report(
        7,
        s.passed() && pf.passed == 100 && odd.worst == 0.0,
        format!("100 trials, max |pf - sum| = {:.2e}, max |odd moment| = {:.1e}", pf.worst, odd.worst),
        t,
    );

    // 8. cocycle condition and order constraints, exact
    let t = Instant::now();
    let mut ok = true;
    let mut checked = 0usize;
    for n in [3usize, 5, 7] {
        let mut omegas: Vec<RationalPhase> = (0..n as i64).map(|k| RationalPhase::new(k, n as i64).unwrap()).collect();
        omegas.extend((-8..=8).map(|nu| predicted_free_fermion(nu, n).unwrap().omega_n));
        for w in omegas {
            let spec = CocycleSpec::new(n, w).unwrap();
            let r = 0..n as i64;
            for a1 in r.clone() {
                for a2 in r.clone() {
                    for a3 in r.clone() {
                        for a4 in r.clone() {
                            ok &= cocycle_coboundary(&spec, [a1, a2, a3, a4]).is_one();
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    for n in (1..=9).step_by(2) {
        for nu in -8..=8 {
            let p = predicted_free_fermion(nu, n).unwrap();
            ok &= p.omega_n.pow(12).is_one();
            ok &= p.z8.map_or(nu % 2 != 0, |z| z.pow(8).is_one());
        }
    }
    out.report(8, ok, format!("{checked} coboundary tuples; omega_N^12 = z8^8 = 1 for nu in [-8, 8]"), t);

    // 9. mod-3 detection with p+ip, N = 3
    let t = Instant::now();
    let p10 = disk(pip, 2, 10.0, DEFAULT_APEX_OFFSET, 0.0);
    let tp = twist_statistics(&p10.projection.replicate(3), 3, &p10.frame).unwrap();
    let from_one = phase_distance(tp.omega_n, C64::new(1.0, 0.0));
    let to_pred = phase_distance(tp.omega_n, phase(1.0 / 3.0));
    out.report(
        9,
        from_one >= 1.0 && to_pred <= 0.1,
        format!("R=10 omega_3 arg={:.5}, distance from 1 {from_one:.3} rad, from e^(2πi/3) {to_pred:.2e} rad", tp.omega_n.arg()),
        t,
    );

    // 10. stability under apex shift and boundary rotation at R = 16
    let t = Instant::now();
    let shifted = [DEFAULT_APEX_OFFSET[0] + 0.5, DEFAULT_APEX_OFFSET[1] + 0.25];
    let mut ok = true;
    let mut detail = Vec::new();
    let base = [(&q16, "qwz", qwz as fn(&LatticeGeometry) -> QuadraticHamiltonian, 4usize), (&p16, "p+ip", pip, 2)];
    for (reference, name, model, m) in base {
        let ref_idx = parity_indices(&reference.projection, &reference.frame, DEFAULT_NU_ROUND_TOL).unwrap();
        let moved = disk(model, m, 16.0, shifted, 0.0);
        let rotated = Disk {
            projection: reference.projection.clone(),
            frame: IndexFrame::new(
                reference.frame.geometry(),
                &reference.frame.partition().rotated(0.3, DEFAULT_GAP_HALFWIDTH).unwrap(),
                DEFAULT_WINDOW_FRACTION,
            )
            .unwrap(),
        };
        for (label, d) in [("apex", &moved), ("angles", &rotated)] {
            let idx = parity_indices(&d.projection, &d.frame, DEFAULT_NU_ROUND_TOL).unwrap();
            let same = idx.nu_rounded == ref_idx.nu_rounded
                && idx.z2 == ref_idx.z2
                && idx.z8.map(z16_index) == ref_idx.z8.map(z16_index)
                && (idx.nu - ref_idx.nu).abs() <= 0.05;
            ok &= same;
            detail.push(format!("{name}/{label} nu={:.4}", idx.nu));
        }
    }
    out.report(10, ok, detail.join(", "), t);

    assert_eq!(out.failures, 0, "failed criteria:\n{}", out.lines.join("\n"));
}
