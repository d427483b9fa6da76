//! Micro-benchmark of the permanent engines.

use std::time::Instant;

use serde::Serialize;

use super::{Engine, PermanentOptions};
use crate::error::Result;
use crate::matrix::{ComplexMatrix, C64};

#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub m: usize,
    pub engine: String,
    pub terms: u64,
    pub seconds: f64,
    pub terms_per_second: f64,
    pub value_re: f64,
    pub value_im: f64,
    /// Largest relative deviation of the value when the same matrix is
    /// recomputed with the worker counts in `variation_workers`; a proxy
    /// for the summation-order error. `None` if no variation was requested.
    pub worker_spread: Option<f64>,
}

/// Times one evaluation of `engine` on `a`, then recomputes with BBFG at
/// each worker count in `variation_workers` to estimate the rounding error.
pub fn bench_matrix(
    a: &ComplexMatrix,
    engine: Engine,
    opts: &PermanentOptions,
    variation_workers: &[usize],
) -> Result<BenchRecord> {
    let start = Instant::now();
    let r = engine.compute(a, opts)?;
    let seconds = start.elapsed().as_secs_f64();
    let mut spread: Option<f64> = None;
    for &w in variation_workers {
        let other = Engine::BbfgParallel { workers: w }.compute(a, opts)?;
        let d = rel_diff(other.value, r.value);
        spread = Some(spread.map_or(d, |s| s.max(d)));
    }
    Ok(BenchRecord {
        m: a.dim(),
        engine: engine.to_string(),
        terms: r.terms,
        seconds,
        terms_per_second: if seconds > 0.0 { r.terms as f64 / seconds } else { f64::INFINITY },
        value_re: r.value.re,
        value_im: r.value.im,
        worker_spread: spread,
    })
}

fn rel_diff(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}
