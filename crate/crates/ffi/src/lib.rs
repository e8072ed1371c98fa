//! C ABI for twistlab.
//!
//! A `TwistlabSystem` is an opaque handle holding one disk, its model
//! Hamiltonian, the ground-state basis projection and the default conical
//! partition. Every call returns a `TwistlabStatus`; on failure the message
//! is available from `twistlab_last_error` on the same thread. Panics are
//! caught at the boundary and reported as `TWISTLAB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use twistlab::geometry::{
    build_disk_lattice, make_good_partition, LatticeKind, DEFAULT_BOUNDARY_ANGLES, DEFAULT_GAP_HALFWIDTH,
};
use twistlab::invariants::{
    chern_number, parity_indices, predicted_free_fermion, twist_statistics, IndexFrame, DEFAULT_NU_ROUND_TOL,
    DEFAULT_WINDOW_FRACTION,
};
use twistlab::models::{build_pip, build_qwz, build_trivial, tknn_chern, BlochModel};
use twistlab::quasifree::{ground_projection, BasisProjection, DISK_GAP_TOL};
use twistlab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Geometry = 3,
    Gapless = 4,
    Unconverged = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistlabModel {
    /// Parameters: `u`.
    Qwz = 0,
    /// Parameters: `mu`, `delta`.
    Pip = 1,
    /// No parameters.
    Trivial = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwistlabParity {
    pub nu: f64,
    pub nu_rounded: i64,
    pub z2: i32,
    /// Nonzero iff `nu_rounded` is even; `z8_re`, `z8_im` are zero otherwise.
    pub has_z8: i32,
    pub z8_re: f64,
    pub z8_im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwistlabTwist {
    pub sigma: f64,
    pub theta_re: f64,
    pub theta_im: f64,
    pub omega_re: f64,
    pub omega_im: f64,
}

/// Exact predictions; phases are `e^{2πi num/den}`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwistlabPredicted {
    pub sigma: f64,
    pub theta_num: i64,
    pub theta_den: i64,
    pub omega_num: i64,
    pub omega_den: i64,
    pub z2: i32,
    pub has_z8: i32,
    pub z8_num: i64,
    pub z8_den: i64,
}

pub struct TwistlabSystem {
    projection: BasisProjection,
    frame: IndexFrame,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TwistlabStatus {
    match e {
        Error::EmptyLattice | Error::DegeneratePartition(_) | Error::NonGenericSite { .. } | Error::GeometryMismatch(_) => {
            TwistlabStatus::Geometry
        }
        Error::GaplessParameters(_) | Error::Gapless(_) | Error::UnresolvableZeroModes(_) => TwistlabStatus::Gapless,
        Error::Unconverged { .. } => TwistlabStatus::Unconverged,
        Error::InvalidArgument(_) | Error::EvenCopies(_) | Error::DimensionMismatch { .. } | Error::OracleTooLarge(_) => {
            TwistlabStatus::InvalidArgument
        }
        _ => TwistlabStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), TwistlabStatus>) -> TwistlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TwistlabStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            TwistlabStatus::Panic
        }
    }
}

fn fail(e: Error) -> TwistlabStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null() -> TwistlabStatus {
    set_error("null pointer argument");
    TwistlabStatus::NullPointer
}

fn model_of(code: i32) -> Result<TwistlabModel, TwistlabStatus> {
    match code {
        0 => Ok(TwistlabModel::Qwz),
        1 => Ok(TwistlabModel::Pip),
        2 => Ok(TwistlabModel::Trivial),
        other => Err(fail(Error::InvalidArgument(format!("unknown model code {other}")))),
    }
}

fn bloch(model: TwistlabModel, p0: f64, p1: f64) -> Option<BlochModel> {
    match model {
        TwistlabModel::Qwz => Some(BlochModel::Qwz { u: p0 }),
        TwistlabModel::Pip => Some(BlochModel::Pip { mu: p0, delta: p1, chirality: 1.0 }),
        TwistlabModel::Trivial => None,
    }
}

fn build_system(model: TwistlabModel, p0: f64, p1: f64, radius: f64, apex: [f64; 2]) -> Result<TwistlabSystem, Error> {
    if let Some(b) = bloch(model, p0, p1) {
        b.ensure_gapped(200)?;
    }
    let m = if model == TwistlabModel::Qwz { 4 } else { 2 };
    let g = build_disk_lattice(LatticeKind::Square, radius, apex, m)?;
    let h = match model {
        TwistlabModel::Qwz => build_qwz(p0, &g)?,
        TwistlabModel::Pip => build_pip(p0, p1, &g)?,
        TwistlabModel::Trivial => build_trivial(&g)?,
    };
    let projection = ground_projection(&h, DISK_GAP_TOL)?;
    let partition = make_good_partition(apex, DEFAULT_BOUNDARY_ANGLES, DEFAULT_GAP_HALFWIDTH)?;
    let frame = IndexFrame::new(&g, &partition, DEFAULT_WINDOW_FRACTION)?;
    Ok(TwistlabSystem { projection, frame })
}

/// Build a disk of the given radius around `(apex_x, apex_y)` and its
/// ground state. `model` is a `TwistlabModel` value; `p0`, `p1` are the
/// model parameters (unused ones ignored).
/// On success `*out` owns a handle to release with `twistlab_system_free`.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn twistlab_system_new(
    model: i32,
    p0: f64,
    p1: f64,
    radius: f64,
    apex_x: f64,
    apex_y: f64,
    out: *mut *mut TwistlabSystem,
) -> TwistlabStatus {
    if out.is_null() {
        return null();
    }
    guard(|| {
        let sys = build_system(model_of(model)?, p0, p1, radius, [apex_x, apex_y]).map_err(fail)?;
        // SAFETY: checked non-null above; the caller guarantees validity.
        unsafe { *out = Box::into_raw(Box::new(sys)) };
        Ok(())
    })
}

/// # Safety
/// `system` must be null or a handle from `twistlab_system_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn twistlab_system_free(system: *mut TwistlabSystem) {
    if !system.is_null() {
        // SAFETY: the handle came from Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(system) });
    }
}

/// Dimension of the one-particle space.
///
/// # Safety
/// `system` must be a live handle or null; `out` valid or null.
#[no_mangle]
pub unsafe extern "C" fn twistlab_system_dim(system: *const TwistlabSystem, out: *mut usize) -> TwistlabStatus {
    // SAFETY: null-checked; validity is the caller's contract.
    let (Some(sys), Some(out)) = (unsafe { system.as_ref() }, unsafe { out.as_mut() }) else {
        return null();
    };
    guard(|| {
        *out = sys.projection.dim();
        Ok(())
    })
}

/// Real-space Chern number.
///
/// # Safety
/// `system` must be a live handle or null; `out` valid or null.
#[no_mangle]
pub unsafe extern "C" fn twistlab_chern_number(system: *const TwistlabSystem, out: *mut f64) -> TwistlabStatus {
    // SAFETY: null-checked; validity is the caller's contract.
    let (Some(sys), Some(out)) = (unsafe { system.as_ref() }, unsafe { out.as_mut() }) else {
        return null();
    };
    guard(|| {
        *out = chern_number(&sys.projection, &sys.frame).map_err(fail)?.value;
        Ok(())
    })
}

/// `Z/2` and `Z/8` parity indices.
///
/// # Safety
/// `system` must be a live handle or null; `out` valid or null.
#[no_mangle]
pub unsafe extern "C" fn twistlab_parity_indices(system: *const TwistlabSystem, out: *mut TwistlabParity) -> TwistlabStatus {
    // SAFETY: null-checked; validity is the caller's contract.
    let (Some(sys), Some(out)) = (unsafe { system.as_ref() }, unsafe { out.as_mut() }) else {
        return null();
    };
    guard(|| {
        let idx = parity_indices(&sys.projection, &sys.frame, DEFAULT_NU_ROUND_TOL).map_err(fail)?;
        let z8 = idx.z8.unwrap_or_default();
        *out = TwistlabParity {
            nu: idx.nu,
            nu_rounded: idx.nu_rounded,
            z2: idx.z2 as i32,
            has_z8: idx.z8.is_some() as i32,
            z8_re: z8.re,
            z8_im: z8.im,
        };
        Ok(())
    })
}

/// Twist statistics of `copies` (odd) stacked copies of the system.
///
/// # Safety
/// `system` must be a live handle or null; `out` valid or null.
#[no_mangle]
pub unsafe extern "C" fn twistlab_twist_statistics(
    system: *const TwistlabSystem,
    copies: usize,
    out: *mut TwistlabTwist,
) -> TwistlabStatus {
    // SAFETY: null-checked; validity is the caller's contract.
    let (Some(sys), Some(out)) = (unsafe { system.as_ref() }, unsafe { out.as_mut() }) else {
        return null();
    };
    guard(|| {
        if copies == 0 || copies % 2 == 0 {
            return Err(fail(Error::EvenCopies(copies)));
        }
        let tw = twist_statistics(&sys.projection.replicate(copies), copies, &sys.frame).map_err(fail)?;
        *out = TwistlabTwist {
            sigma: tw.sigma,
            theta_re: tw.theta_n.re,
            theta_im: tw.theta_n.im,
            omega_re: tw.omega_n.re,
            omega_im: tw.omega_n.im,
        };
        Ok(())
    })
}

/// Momentum-space Chern number of a band model (`TwistlabModel` value) on a
/// `kgrid × kgrid` mesh.
///
/// # Safety
/// `out` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn twistlab_tknn_chern(
    model: i32,
    p0: f64,
    p1: f64,
    kgrid: usize,
    out: *mut i64,
) -> TwistlabStatus {
    // SAFETY: null-checked; validity is the caller's contract.
    let Some(out) = (unsafe { out.as_mut() }) else {
        return null();
    };
    guard(|| {
        let b = bloch(model_of(model)?, p0, p1).ok_or_else(|| fail(Error::InvalidArgument("trivial model has no band oracle".into())))?;
        *out = tknn_chern(&b, kgrid).map_err(fail)?;
        Ok(())
    })
}

/// Closed-form predictions for Chern number `nu` on `copies` odd copies.
///
/// # Safety
/// `out` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn twistlab_predicted(nu: i64, copies: usize, out: *mut TwistlabPredicted) -> TwistlabStatus {
    // SAFETY: null-checked; validity is the caller's contract.
    let Some(out) = (unsafe { out.as_mut() }) else {
        return null();
    };
    guard(|| {
        let p = predicted_free_fermion(nu, copies).map_err(fail)?;
        let (tn, td) = p.theta_n.turns();
        let (on, od) = p.omega_n.turns();
        let (zn, zd) = p.z8.map_or((0, 1), |z| z.turns());
        *out = TwistlabPredicted {
            sigma: p.sigma,
            theta_num: tn,
            theta_den: td,
            omega_num: on,
            omega_den: od,
            z2: p.z2 as i32,
            has_z8: p.z8.is_some() as i32,
            z8_num: zn,
            z8_den: zd,
        };
        Ok(())
    })
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn twistlab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: buf holds at least len bytes per the contract.
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn twistlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
