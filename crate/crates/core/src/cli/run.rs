use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ScanConfig;
use super::output::{fmt_opt, fmt_sig, sidecar_path, unix_now, write_json, RowSink, Sidecar};
use crate::correlations::{build_z_from_basis, conjectured_bound, z_block_structure, CutSpec, InitialState, StructureReport};
use crate::ed::{page_value, time_average, FockBasis, PageEstimate, QuenchSolver, QuenchSpec};
use crate::entropy::{entropy_point, gaussian_time_average, EntropyPoint};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::permanent::bench::{bench_matrix, BenchRecord};
use crate::permanent::Engine;
use crate::single_particle::{solve_open_chain, LatticeSpec, SpectralBasis};
use crate::stats::{linear_fit, LinearFit, MeanEstimate};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SCAN_HEADER: [&str; 12] =
    ["state", "L", "L_A", "tJ", "S2", "S2_gaussian", "s_tilde", "g", "lower_bound", "perm_method", "perm_seconds", "seed"];

fn chain(sites: usize) -> Result<SpectralBasis> {
    solve_open_chain(LatticeSpec::unit(sites)?)
}

/// Evaluates `f` on every time, `workers` at a time, handing each finished
/// batch to `emit` in order.
fn batched<T: Send>(
    times: &[f64],
    workers: usize,
    f: impl Fn(f64) -> Result<T> + Sync,
    mut emit: impl FnMut(T) -> Result<()>,
) -> Result<()> {
    if workers <= 1 {
        for &t in times {
            emit(f(t)?)?;
        }
        return Ok(());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    for batch in times.chunks(workers) {
        let done: Vec<Result<T>> = pool.install(|| batch.par_iter().map(|&t| f(t)).collect());
        for r in done {
            emit(r?)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct PointTiming {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "tJ")]
    pub tj: f64,
    pub perm_seconds: f64,
    pub perm_terms: u64,
}

/// `S_2 / L~` against `s~` and `2 s~`; the relation `S_2 / L~ <~ 2 s~` is
/// an observation, so it is reported and never enforced.
#[derive(Clone, Debug, Serialize)]
pub struct PracticalBound {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "tJ")]
    pub tj: f64,
    pub s2_over_l_tilde: f64,
    pub s_tilde: f64,
    pub two_s_tilde: f64,
    pub below_two_s_tilde: bool,
    pub conjectured_bound: Option<f64>,
    pub above_conjectured_bound: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SizedPage {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(flatten)]
    pub page: PageEstimate,
}

#[derive(Debug, Serialize)]
pub struct ScanResults {
    pub rows: usize,
    pub timings: Vec<PointTiming>,
    pub practical_bound: Vec<PracticalBound>,
    pub practical_bound_holds: usize,
    pub page: Vec<SizedPage>,
    pub structure: Vec<StructureReport>,
}

fn scan_row(p: &EntropyPoint, cfg: &ScanConfig) -> Vec<String> {
    vec![
        p.state.to_string(),
        p.sites.to_string(),
        p.la.to_string(),
        fmt_sig(p.tj),
        fmt_sig(p.s2),
        fmt_opt(p.s2_gaussian),
        fmt_opt(cfg.s_tilde.then_some(p.s_tilde)),
        fmt_sig(p.g),
        fmt_opt(cfg.bounds.then_some(p.lower_bound)),
        p.perm_method.as_str().to_string(),
        // wall-clock time breaks byte-identical reruns; it goes to the sidecar
        String::new(),
        cfg.seed.to_string(),
    ]
}

fn sample_page(cfg: &ScanConfig, sites: usize, cut: CutSpec) -> Result<PageEstimate> {
    let basis = FockBasis::new(sites, cfg.state.particle_count(sites)?)?;
    page_value(&basis, cut, cfg.page_samples, cfg.seed)
}

/// `S_2(t)` for every size and time: one CSV row per point, with the
/// rigorous bound checked before the row is written.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanResults> {
    cfg.validate()?;
    cfg.check_permanent_sizes()?;
    cfg.check_page_sizes()?;
    let started = unix_now();
    let clock = Instant::now();
    let (engine, opts, workers) = (cfg.engine()?, cfg.permanent_options(), cfg.scan_workers()?);
    let mut sink = RowSink::create(cfg.out.as_deref(), &SCAN_HEADER)?;
    let mut res = ScanResults {
        rows: 0,
        timings: vec![],
        practical_bound: vec![],
        practical_bound_holds: 0,
        page: vec![],
        structure: vec![],
    };
    for &l in &cfg.sizes {
        let basis = chain(l)?;
        let cut = cfg.cut(l)?;
        let times = cfg.times(l);
        let eval = |t: f64| {
            let start = Instant::now();
            let p = entropy_point(&basis, t, cfg.state, cut, engine, &opts, cfg.gaussian)?;
            Ok((p, start.elapsed().as_secs_f64()))
        };
        batched(&times, workers, eval, |(p, secs): (EntropyPoint, f64)| {
            if cfg.bounds {
                p.check_bound()?;
            }
            sink.row(scan_row(&p, cfg))?;
            res.rows += 1;
            res.timings.push(PointTiming { sites: l, tj: p.tj, perm_seconds: secs, perm_terms: p.perm_terms });
            let ratio = p.s2 / p.l_tilde() as f64;
            let conj = cfg.conjecture_constant.map(|c| conjectured_bound(p.g, p.l_tilde(), c));
            let below = ratio <= 2.0 * p.s_tilde;
            res.practical_bound_holds += below as usize;
            res.practical_bound.push(PracticalBound {
                sites: l,
                tj: p.tj,
                s2_over_l_tilde: ratio,
                s_tilde: p.s_tilde,
                two_s_tilde: 2.0 * p.s_tilde,
                below_two_s_tilde: below,
                conjectured_bound: conj,
                above_conjectured_bound: conj.map(|b| p.s2 >= b),
            });
            Ok(())
        })?;
        if cfg.page {
            res.page.push(SizedPage { sites: l, page: sample_page(cfg, l, cut)? });
        }
        if cfg.structure && cfg.state == InitialState::Mi && 2 * cut.la() == l {
            for &t in &times {
                res.structure.push(z_block_structure(&build_z_from_basis(&basis, t, cfg.state, cut)?, cfg.structure_eps)?);
            }
        }
    }
    if let Some(out) = &cfg.out {
        let side = Sidecar {
            command: "scan",
            version: VERSION,
            started_unix: started,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
            config: cfg,
            results: &res,
        };
        write_json(Some(&sidecar_path(out)), &side)?;
    }
    Ok(res)
}

pub const SCALING_HEADER: [&str; 11] = [
    "state",
    "L",
    "inv_L",
    "S2_per_L",
    "S2_per_L_stderr",
    "S2_gaussian_per_L",
    "S2_gaussian_per_L_stderr",
    "page_per_L",
    "page_per_L_stderr",
    "samples",
    "seed",
];

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    #[serde(rename = "L")]
    pub sites: usize,
    pub s2: Option<MeanEstimate>,
    pub s2_gaussian: MeanEstimate,
    pub page: Option<PageEstimate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingFits {
    /// Sizes entering the fits.
    pub sizes: Vec<usize>,
    /// Density against `1/L`; the intercept is the large-`L` density.
    pub s2: Option<LinearFit>,
    pub s2_gaussian: Option<LinearFit>,
    pub page: Option<LinearFit>,
    /// Whether the Page density exceeds the `S_2` density at each fitted
    /// size where both exist.
    pub page_above_s2: Vec<(usize, bool)>,
}

#[derive(Debug, Serialize)]
pub struct ScalingResults {
    pub rows: Vec<ScalingRow>,
    pub fits: ScalingFits,
}

/// Time-averaged densities per size and their linear fits in `1/L` over the
/// largest sizes.
pub fn run_size_scaling(cfg: &ScanConfig) -> Result<ScalingResults> {
    cfg.validate()?;
    if cfg.permanent {
        cfg.check_permanent_sizes()?;
    }
    cfg.check_page_sizes()?;
    let started = unix_now();
    let clock = Instant::now();
    let (engine, opts, workers) = (cfg.engine()?, cfg.permanent_options(), cfg.scan_workers()?);
    let mut sink = RowSink::create(cfg.out.as_deref(), &SCALING_HEADER)?;
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut rows = vec![];
    for &l in &sizes {
        let basis = chain(l)?;
        let cut = cfg.cut(l)?;
        let times = cfg.times(l);
        let s2_gaussian = gaussian_time_average(&basis, cfg.state, cut, &times)?;
        let s2 = if cfg.permanent {
            let mut vals = vec![];
            batched(
                &times,
                workers,
                |t| entropy_point(&basis, t, cfg.state, cut, engine, &opts, false),
                |p| {
                    if cfg.bounds {
                        p.check_bound()?;
                    }
                    vals.push(p.s2);
                    Ok(())
                },
            )?;
            Some(MeanEstimate::of(&vals))
        } else {
            None
        };
        let page = if cfg.page { Some(sample_page(cfg, l, cut)?) } else { None };
        let d = |m: f64| m / l as f64;
        sink.row([
            cfg.state.to_string(),
            l.to_string(),
            fmt_sig(1.0 / l as f64),
            fmt_opt(s2.map(|m| d(m.mean))),
            fmt_opt(s2.map(|m| d(m.stderr))),
            fmt_sig(d(s2_gaussian.mean)),
            fmt_sig(d(s2_gaussian.stderr)),
            fmt_opt(page.map(|p| d(p.mean))),
            fmt_opt(page.map(|p| d(p.stderr))),
            times.len().to_string(),
            cfg.seed.to_string(),
        ])?;
        rows.push(ScalingRow { sites: l, s2, s2_gaussian, page });
    }
    let fitted = &rows[rows.len().saturating_sub(cfg.fit_sizes)..];
    let fit = |get: &dyn Fn(&ScalingRow) -> Option<f64>| -> Result<Option<LinearFit>> {
        let pts: Vec<(f64, f64)> =
            fitted.iter().filter_map(|r| get(r).map(|m| (1.0 / r.sites as f64, m / r.sites as f64))).collect();
        if pts.len() < 2 {
            return Ok(None);
        }
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        linear_fit(&x, &y).map(Some)
    };
    let fits = ScalingFits {
        sizes: fitted.iter().map(|r| r.sites).collect(),
        s2: fit(&|r| r.s2.map(|m| m.mean))?,
        s2_gaussian: fit(&|r| Some(r.s2_gaussian.mean))?,
        page: fit(&|r| r.page.map(|p| p.mean))?,
        page_above_s2: fitted
            .iter()
            .filter_map(|r| Some((r.sites, r.page?.mean > r.s2?.mean)))
            .collect(),
    };
    let res = ScalingResults { rows, fits };
    if let Some(out) = &cfg.out {
        let side = Sidecar {
            command: "size-scaling",
            version: VERSION,
            started_unix: started,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
            config: cfg,
            results: &res,
        };
        write_json(Some(&sidecar_path(out)), &side)?;
    }
    Ok(res)
}

/// Block-structure diagnostics of `Z` for MI at every size and time,
/// written as one JSON document.
pub fn run_structure_report(cfg: &ScanConfig) -> Result<Vec<StructureReport>> {
    cfg.validate()?;
    if cfg.state != InitialState::Mi {
        return Err(Error::Config("the structure report is defined for the MI state".into()));
    }
    let mut reports = vec![];
    for &l in &cfg.sizes {
        let basis = chain(l)?;
        let cut = cfg.cut(l)?;
        for t in cfg.times(l) {
            reports.push(z_block_structure(&build_z_from_basis(&basis, t, cfg.state, cut)?, cfg.structure_eps)?);
        }
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        command: &'static str,
        version: &'static str,
        config: &'a ScanConfig,
        reports: &'a [StructureReport],
    }
    write_json(cfg.out.as_deref(), &Doc { command: "structure", version: VERSION, config: cfg, reports: &reports })?;
    Ok(reports)
}

pub const BENCH_HEADER: [&str; 8] =
    ["m", "engine", "terms", "seconds", "terms_per_second", "value_re", "value_im", "worker_spread"];

/// Random complex matrix with independent standard normal entries scaled by
/// `1/sqrt(m)`.
pub fn random_matrix(m: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let s = 1.0 / (m as f64).sqrt();
    ComplexMatrix::from_fn(m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * s
    })
}

/// Times every engine on one seeded random matrix per size. `cfg.sizes` are
/// matrix sizes here. Engines whose size guard rejects a matrix are skipped.
pub fn run_bench(cfg: &ScanConfig, engines: &[Engine], variation_workers: &[usize]) -> Result<Vec<BenchRecord>> {
    if cfg.sizes.is_empty() || engines.is_empty() {
        return Err(Error::Config("bench needs at least one size and one engine".into()));
    }
    let opts = cfg.permanent_options();
    let mut sink = RowSink::create(cfg.out.as_deref(), &BENCH_HEADER)?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut out = vec![];
    for &m in &cfg.sizes {
        let a = random_matrix(m, &mut rng);
        for &e in engines {
            let r = match bench_matrix(&a, e, &opts, variation_workers) {
                Ok(r) => r,
                // an engine past its size limit is skipped, the rest still run
                Err(err @ Error::SizeGuard { .. }) => {
                    eprintln!("skipping {e} at m = {m}: {err}");
                    continue;
                }
                Err(err) => return Err(err),
            };
            sink.row([
                r.m.to_string(),
                r.engine.clone(),
                r.terms.to_string(),
                fmt_sig(r.seconds),
                fmt_sig(r.terms_per_second),
                fmt_sig(r.value_re),
                fmt_sig(r.value_im),
                fmt_opt(r.worker_spread),
            ])?;
            out.push(r);
        }
    }
    Ok(out)
}

pub const FINITE_U_HEADER: [&str; 9] = ["state", "L", "L_A", "U", "tJ", "S2", "energy", "particles", "norm"];

#[derive(Clone, Debug, Serialize)]
pub struct TraceAverage {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "U")]
    pub interaction: f64,
    pub average: MeanEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct Jump {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "U")]
    pub interaction: f64,
    /// Average at this `U` minus the average at `U = 0`.
    pub difference: f64,
    pub combined_stderr: f64,
    pub sigmas: f64,
    /// Distance to the Page value in units of the trace's stderr.
    pub page_sigmas: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct FiniteUResults {
    pub averages: Vec<TraceAverage>,
    pub page: Vec<SizedPage>,
    pub jumps: Vec<Jump>,
}

/// Exact `S_2(t)` for each size and interaction, with long-time averages,
/// the jump relative to `U = 0`, and optionally the Page value.
pub fn run_finite_u(cfg: &ScanConfig) -> Result<FiniteUResults> {
    cfg.validate()?;
    if cfg.interactions.is_empty() {
        return Err(Error::Config("no interactions given".into()));
    }
    cfg.check_page_sizes()?;
    let started = unix_now();
    let clock = Instant::now();
    let mut sink = RowSink::create(cfg.out.as_deref(), &FINITE_U_HEADER)?;
    let mut res = FiniteUResults { averages: vec![], page: vec![], jumps: vec![] };
    for &l in &cfg.sizes {
        let cut = cfg.cut(l)?;
        let times = cfg.times(l);
        let mut here = vec![];
        for &u in &cfg.interactions {
            let spec = QuenchSpec::free(l, cfg.state, times.clone()).with_interaction(u);
            let trace = QuenchSolver::new(&spec, cut)?.trace(&times)?;
            for p in &trace {
                sink.row([
                    cfg.state.to_string(),
                    l.to_string(),
                    cut.la().to_string(),
                    fmt_sig(u),
                    fmt_sig(p.tj),
                    fmt_sig(p.s2),
                    fmt_sig(p.energy),
                    fmt_sig(p.particles),
                    fmt_sig(p.norm),
                ])?;
            }
            here.push(TraceAverage { sites: l, interaction: u, average: time_average(&trace) });
        }
        let page = if cfg.page { Some(sample_page(cfg, l, cut)?) } else { None };
        if let Some(base) = here.iter().find(|a| a.interaction == 0.0).map(|a| a.average) {
            for a in here.iter().filter(|a| a.interaction != 0.0) {
                let combined = (a.average.stderr.powi(2) + base.stderr.powi(2)).sqrt();
                let difference = a.average.mean - base.mean;
                res.jumps.push(Jump {
                    sites: l,
                    interaction: a.interaction,
                    difference,
                    combined_stderr: combined,
                    sigmas: difference / combined,
                    page_sigmas: page.map(|p| (a.average.mean - p.mean).abs() / a.average.stderr),
                });
            }
        }
        if let Some(p) = page {
            res.page.push(SizedPage { sites: l, page: p });
        }
        res.averages.extend(here);
    }
    if let Some(out) = &cfg.out {
        let side = Sidecar {
            command: "finite-u",
            version: VERSION,
            started_unix: started,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
            config: cfg,
            results: &res,
        };
        write_json(Some(&sidecar_path(out)), &side)?;
    }
    Ok(res)
}
