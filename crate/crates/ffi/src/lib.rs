//! C ABI over the quench-renyi library.
//!
//! Every function returns a [`QrStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and read back with
//! [`qr_last_error`]. Panics are caught at the boundary and reported as
//! [`QrStatus::Panic`]. Handles are opaque and must be released with their
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quench_renyi::correlations::{CutSpec, InitialState};
use quench_renyi::ed::{page_value, QuenchSolver, QuenchSpec};
use quench_renyi::entropy::entropy_point;
use quench_renyi::permanent::{Engine, PermanentOptions};
use quench_renyi::single_particle::{solve_open_chain, LatticeSpec, SpectralBasis};
use quench_renyi::{ComplexMatrix, Error, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Infeasible = 4,
    Numerical = 5,
    BoundViolation = 6,
    LinearAlgebra = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QrState {
    Mi = 0,
    Cdw = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QrEngine {
    Naive = 0,
    Ryser = 1,
    Bbfg = 2,
    /// Uses the `workers` argument; 0 means all available cores.
    BbfgParallel = 3,
}

/// One entropy evaluation. `s2_gaussian` is NaN unless requested.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QrEntropyPoint {
    pub sites: usize,
    pub la: usize,
    pub tj: f64,
    pub s2: f64,
    pub perm_re: f64,
    pub perm_im: f64,
    pub g: f64,
    pub s_tilde: f64,
    pub lower_bound: f64,
    pub s2_gaussian: f64,
}

/// Single-particle modes of an open chain.
pub struct QrChain(SpectralBasis);

/// Exact-diagonalization solver for one quench.
pub struct QrQuench(QuenchSolver);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(e: &Error) -> QrStatus {
    match e {
        Error::Domain(_) => QrStatus::Domain,
        Error::SizeGuard { .. } => QrStatus::Infeasible,
        Error::NumericalBreakdown(_) => QrStatus::Numerical,
        Error::BoundViolation { .. } => QrStatus::BoundViolation,
        Error::LinearAlgebra(_) => QrStatus::LinearAlgebra,
        Error::Config(_) => QrStatus::InvalidArgument,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => QrStatus::Io,
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QrStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QrStatus::NullPointer
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_error(msg);
            QrStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            QrStatus::Panic
        }
    }
}

fn nonnull<T>(p: *const T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(())
    }
}

// enums arrive as plain integers: an out-of-range discriminant from C
// would be undefined behaviour if typed as the Rust enum
fn state_of(s: u32) -> Result<InitialState, Failure> {
    match s {
        x if x == QrState::Mi as u32 => Ok(InitialState::Mi),
        x if x == QrState::Cdw as u32 => Ok(InitialState::Cdw),
        _ => Err(Failure::Arg(format!("unknown state {s}"))),
    }
}

fn engine_of(e: u32, workers: usize) -> Result<Engine, Failure> {
    Ok(match e {
        x if x == QrEngine::Naive as u32 => Engine::Naive,
        x if x == QrEngine::Ryser as u32 => Engine::Ryser,
        x if x == QrEngine::Bbfg as u32 => Engine::Bbfg,
        x if x == QrEngine::BbfgParallel as u32 => Engine::BbfgParallel {
            workers: if workers == 0 {
                std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
            } else {
                workers
            },
        },
        _ => return Err(Failure::Arg(format!("unknown engine {e}"))),
    })
}

/// `la == 0` selects the half cut.
fn cut_of(sites: usize, la: usize) -> Result<CutSpec, Failure> {
    Ok(if la == 0 { CutSpec::half(sites)? } else { CutSpec::new(sites, la)? })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`) and returns the buffer size the
/// full message needs, or 0 when there is no error.
///
/// # Safety
/// `buf` must be valid for `len` bytes or be null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn qr_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Solves the open chain of `sites` sites with hopping `hopping`.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle owned by
/// the caller.
#[no_mangle]
pub unsafe extern "C" fn qr_chain_new(sites: usize, hopping: f64, out: *mut *mut QrChain) -> QrStatus {
    guard(|| {
        nonnull(out, "out")?;
        let basis = solve_open_chain(LatticeSpec::new(sites, hopping)?)?;
        *out = Box::into_raw(Box::new(QrChain(basis)));
        Ok(())
    })
}

/// # Safety
/// `chain` must come from [`qr_chain_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qr_chain_free(chain: *mut QrChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// `S_2` at time `tj` after releasing `state` into the chain, with the
/// bound diagnostics. `state` is a [`QrState`], `engine` a [`QrEngine`];
/// `la == 0` cuts the chain in half.
///
/// # Safety
/// `chain` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qr_entropy_point(
    chain: *const QrChain,
    state: u32,
    la: usize,
    tj: f64,
    engine: u32,
    workers: usize,
    gaussian: bool,
    out: *mut QrEntropyPoint,
) -> QrStatus {
    guard(|| {
        nonnull(chain, "chain")?;
        nonnull(out, "out")?;
        let basis = &(*chain).0;
        let cut = cut_of(basis.sites(), la)?;
        let p = entropy_point(basis, tj, state_of(state)?, cut, engine_of(engine, workers)?, &PermanentOptions::default(), gaussian)?;
        *out = QrEntropyPoint {
            sites: p.sites,
            la: p.la,
            tj: p.tj,
            s2: p.s2,
            perm_re: p.perm_value.re,
            perm_im: p.perm_value.im,
            g: p.g,
            s_tilde: p.s_tilde,
            lower_bound: p.lower_bound,
            s2_gaussian: p.s2_gaussian.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Permanent of a `dim x dim` complex matrix given row-major as
/// interleaved `(re, im)` pairs, `2 dim^2` doubles in total.
///
/// # Safety
/// `data` must hold `2 * dim * dim` doubles; `out_re` and `out_im` must be
/// valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qr_permanent(
    data: *const f64,
    dim: usize,
    engine: u32,
    workers: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> QrStatus {
    guard(|| {
        nonnull(data, "data")?;
        nonnull(out_re, "out_re")?;
        nonnull(out_im, "out_im")?;
        let len = dim.checked_mul(dim).and_then(|n| n.checked_mul(2)).ok_or_else(|| Failure::Arg("dim too large".into()))?;
        let raw = std::slice::from_raw_parts(data, len);
        let entries = raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
        let a = ComplexMatrix::from_row_major(dim, entries)?;
        let v = engine_of(engine, workers)?.compute(&a, &PermanentOptions::default())?.value;
        *out_re = v.re;
        *out_im = v.im;
        Ok(())
    })
}

/// Builds and diagonalizes the Bose-Hubbard quench from `state` with
/// on-site interaction `interaction` (in units of the hopping).
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle owned by
/// the caller.
#[no_mangle]
pub unsafe extern "C" fn qr_quench_new(
    sites: usize,
    state: u32,
    interaction: f64,
    la: usize,
    out: *mut *mut QrQuench,
) -> QrStatus {
    guard(|| {
        nonnull(out, "out")?;
        let spec = QuenchSpec::free(sites, state_of(state)?, vec![]).with_interaction(interaction);
        let solver = QuenchSolver::new(&spec, cut_of(sites, la)?)?;
        *out = Box::into_raw(Box::new(QrQuench(solver)));
        Ok(())
    })
}

/// # Safety
/// `q` must come from [`qr_quench_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qr_quench_free(q: *mut QrQuench) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// Hilbert-space dimension of the quench, or 0 for a null handle.
///
/// # Safety
/// `q` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qr_quench_dim(q: *const QrQuench) -> usize {
    if q.is_null() {
        0
    } else {
        (*q).0.basis().dim()
    }
}

/// Exact `S_2` at time `tj`.
///
/// # Safety
/// `q` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qr_quench_s2(q: *const QrQuench, tj: f64, out: *mut f64) -> QrStatus {
    guard(|| {
        nonnull(q, "quench")?;
        nonnull(out, "out")?;
        *out = (*q).0.trace(&[tj])?[0].s2;
        Ok(())
    })
}

/// Mean `S_2` of `samples` random states in the particle-number sector of
/// `state`, with its standard error.
///
/// # Safety
/// `out_mean` and `out_stderr` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qr_page_value(
    sites: usize,
    state: u32,
    la: usize,
    samples: usize,
    seed: u64,
    out_mean: *mut f64,
    out_stderr: *mut f64,
) -> QrStatus {
    guard(|| {
        nonnull(out_mean, "out_mean")?;
        nonnull(out_stderr, "out_stderr")?;
        let basis = QuenchSpec::free(sites, state_of(state)?, vec![]).basis()?;
        let p = page_value(&basis, cut_of(sites, la)?, samples, seed)?;
        *out_mean = p.mean;
        *out_stderr = p.stderr;
        Ok(())
    })
}
