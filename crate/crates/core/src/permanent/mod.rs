//! Permanents of complex matrices.
//!
//! Four exact methods: the definitional sum ([`perm_naive`], oracle only),
//! Ryser's formula, the BBFG formula with Gray-code updates, and a
//! chunk-parallel BBFG. The fast methods cost `O(M 2^{M-1})` (BBFG) or
//! `O(M 2^M)` (Ryser).

mod accum;
mod bbfg;
pub mod bench;
mod decompose;
mod naive;
mod ryser;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use accum::{CompensatedSum, PlainSum};

pub const NAIVE_MAX_SIZE: usize = 12;
pub const RYSER_MAX_SIZE: usize = 34;
pub const BBFG_MAX_SIZE: usize = 50;

/// Sizes beyond this would overflow the 64-bit term counter.
const HARD_MAX_SIZE: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    Ryser,
    Bbfg,
    BbfgParallel,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Ryser => "ryser",
            Method::Bbfg => "bbfg",
            Method::BbfgParallel => "bbfg_parallel",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accumulation {
    Plain,
    #[default]
    Compensated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PermanentResult {
    pub value: C64,
    pub method: Method,
    /// Terms summed: `M!` (naive), `2^M - 1` (Ryser), `2^{M-1}` (BBFG).
    pub terms: u64,
    pub accumulation: Accumulation,
    /// BBFG terms whose product left the trusted range and were recomputed
    /// with exponent tracking.
    pub rescaled_terms: u64,
    /// Irreducible blocks the matrix was split into (1 unless decomposed).
    pub components: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PermanentOptions {
    pub accumulation: Accumulation,
    /// Replaces the per-method size guard when set.
    pub max_size: Option<usize>,
    /// Let [`Engine::compute`] split the matrix into the connected
    /// components of its exact-zero pattern first. The direct `perm_*`
    /// functions never decompose.
    pub decompose: bool,
}

impl Default for PermanentOptions {
    fn default() -> Self {
        Self { accumulation: Accumulation::Compensated, max_size: None, decompose: true }
    }
}

/// Method plus worker count, as selected on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Naive,
    Ryser,
    Bbfg,
    BbfgParallel { workers: usize },
}

impl Engine {
    pub fn method(&self) -> Method {
        match self {
            Engine::Naive => Method::Naive,
            Engine::Ryser => Method::Ryser,
            Engine::Bbfg => Method::Bbfg,
            Engine::BbfgParallel { .. } => Method::BbfgParallel,
        }
    }

    /// Permanent of `a` with this engine, after splitting `a` into
    /// independent blocks when `opts.decompose` is set.
    pub fn compute(&self, a: &ComplexMatrix, opts: &PermanentOptions) -> Result<PermanentResult> {
        if opts.decompose {
            decompose::by_components(a, self.method(), opts, |block| self.compute_direct(block, opts))
        } else {
            self.compute_direct(a, opts)
        }
    }

    fn compute_direct(&self, a: &ComplexMatrix, opts: &PermanentOptions) -> Result<PermanentResult> {
        match *self {
            Engine::Naive => perm_naive_with(a, opts),
            Engine::Ryser => perm_ryser_with(a, opts),
            Engine::Bbfg => perm_bbfg_with(a, opts),
            Engine::BbfgParallel { workers } => perm_bbfg_parallel_with(a, workers, opts),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::BbfgParallel { workers } => write!(f, "bbfg_parallel:{workers}"),
            other => f.write_str(other.method().as_str()),
        }
    }
}

/// Parses `naive`, `ryser`, `bbfg`, `bbfg_parallel` (worker count from the
/// available parallelism) or `bbfg_parallel:N`.
impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.to_string(), Some(a.to_string())),
            None => (s.clone(), None),
        };
        let engine = match (name.as_str(), arg) {
            ("naive", None) => Engine::Naive,
            ("ryser", None) => Engine::Ryser,
            ("bbfg", None) => Engine::Bbfg,
            ("bbfg_parallel" | "bbfg_par", None) => Engine::BbfgParallel {
                workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            },
            ("bbfg_parallel" | "bbfg_par", Some(w)) => {
                let workers = w
                    .parse()
                    .map_err(|_| Error::Config(format!("bad worker count {w:?}")))?;
                if workers == 0 {
                    return Err(Error::Config("worker count must be at least 1".into()));
                }
                Engine::BbfgParallel { workers }
            }
            _ => return Err(Error::Config(format!("unknown permanent engine {s:?}"))),
        };
        Ok(engine)
    }
}

fn check_size(a: &ComplexMatrix, what: &'static str, default: usize, opts: &PermanentOptions) -> Result<()> {
    let limit = opts.max_size.unwrap_or(default).min(HARD_MAX_SIZE);
    if a.dim() > limit {
        return Err(Error::SizeGuard { what, got: a.dim(), limit });
    }
    Ok(())
}

fn result(value: C64, method: Method, terms: u64, opts: &PermanentOptions, rescaled_terms: u64) -> Result<PermanentResult> {
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NumericalBreakdown(format!("{method} permanent is not finite: {value}")));
    }
    Ok(PermanentResult { value, method, terms, accumulation: opts.accumulation, rescaled_terms, components: 1 })
}

pub fn perm_naive(a: &ComplexMatrix) -> Result<PermanentResult> {
    perm_naive_with(a, &PermanentOptions::default())
}

pub fn perm_naive_with(a: &ComplexMatrix, opts: &PermanentOptions) -> Result<PermanentResult> {
    check_size(a, "naive permanent size", NAIVE_MAX_SIZE, opts)?;
    let v = match opts.accumulation {
        Accumulation::Plain => naive::naive::<PlainSum>(a),
        Accumulation::Compensated => naive::naive::<CompensatedSum>(a),
    };
    result(v, Method::Naive, naive::naive_terms(a.dim()), opts, 0)
}

pub fn perm_ryser(a: &ComplexMatrix) -> Result<PermanentResult> {
    perm_ryser_with(a, &PermanentOptions::default())
}

pub fn perm_ryser_with(a: &ComplexMatrix, opts: &PermanentOptions) -> Result<PermanentResult> {
    check_size(a, "Ryser permanent size", RYSER_MAX_SIZE, opts)?;
    let v = match opts.accumulation {
        Accumulation::Plain => ryser::ryser::<PlainSum>(a),
        Accumulation::Compensated => ryser::ryser::<CompensatedSum>(a),
    };
    result(v, Method::Ryser, ryser::ryser_terms(a.dim()), opts, 0)
}

pub fn perm_bbfg(a: &ComplexMatrix) -> Result<PermanentResult> {
    perm_bbfg_with(a, &PermanentOptions::default())
}

pub fn perm_bbfg_with(a: &ComplexMatrix, opts: &PermanentOptions) -> Result<PermanentResult> {
    bbfg_dispatch(a, 1, Method::Bbfg, opts)
}

pub fn perm_bbfg_parallel(a: &ComplexMatrix, workers: usize) -> Result<PermanentResult> {
    perm_bbfg_parallel_with(a, workers, &PermanentOptions::default())
}

/// Splits the Gray sequence into `workers` contiguous chunks run on scoped
/// threads. Partial sums are combined in chunk order, so a fixed worker
/// count always gives the same bits. `workers = 1` runs the serial path.
pub fn perm_bbfg_parallel_with(a: &ComplexMatrix, workers: usize, opts: &PermanentOptions) -> Result<PermanentResult> {
    if workers == 0 {
        return Err(Error::domain("worker count must be at least 1"));
    }
    bbfg_dispatch(a, workers, Method::BbfgParallel, opts)
}

fn bbfg_dispatch(a: &ComplexMatrix, workers: usize, method: Method, opts: &PermanentOptions) -> Result<PermanentResult> {
    check_size(a, "BBFG permanent size", BBFG_MAX_SIZE, opts)?;
    let out = match opts.accumulation {
        Accumulation::Plain => bbfg::bbfg::<PlainSum>(a, workers),
        Accumulation::Compensated => bbfg::bbfg::<CompensatedSum>(a, workers),
    };
    result(out.value, method, out.terms, opts, out.rescaled)
}
