use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::correlations::{CutSpec, InitialState, DEFAULT_EPS};
use crate::ed::DEFAULT_PAGE_SAMPLES;
use crate::error::{Error, Result};
use crate::permanent::{Accumulation, Engine, PermanentOptions};
use crate::stats::{lin_grid, log_grid};

/// Largest MI chain the permanent path accepts (`2N = 50`).
pub const MI_MAX_SITES: usize = 25;
/// Largest CDW chain the permanent path accepts (`2N = 50`).
pub const CDW_MAX_SITES: usize = 50;
/// Page values are sampled only up to these sizes.
pub const PAGE_MAX_SITES_MI: usize = 12;
pub const PAGE_MAX_SITES_CDW: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Lin,
    #[default]
    Log,
}

impl FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lin" | "linear" => Ok(GridKind::Lin),
            "log" => Ok(GridKind::Log),
            _ => Err(Error::Config(format!("unknown time grid {s:?}, expected lin or log"))),
        }
    }
}

/// Declarative description of a run. Every field has a default, so a
/// config file only lists what it changes; command-line flags override the
/// file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub state: InitialState,
    pub sizes: Vec<usize>,
    /// Sites in `A`; half the chain when absent.
    pub subsystem: Option<usize>,
    pub tgrid: GridKind,
    pub tmin: f64,
    pub tmax: f64,
    pub tpoints: usize,
    /// Explicit times, replacing the grid.
    pub times: Option<Vec<f64>>,
    /// Explicit `tJ / L` values, scaled by each size; replaces the grid.
    pub times_per_site: Option<Vec<f64>>,
    pub engine: String,
    pub workers: usize,
    pub accumulation: Accumulation,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub gaussian: bool,
    pub page: bool,
    pub page_samples: usize,
    pub s_tilde: bool,
    pub bounds: bool,
    pub structure: bool,
    pub structure_eps: f64,
    /// Prefactor `c` of the conjectured bound `c (1 - g) L~`; reported only.
    pub conjecture_constant: Option<f64>,
    /// Compute `S_2` from the permanent; off gives Gaussian-only scaling runs.
    pub permanent: bool,
    /// Sizes entering the linear fit of a size-scaling run, counted from the
    /// largest.
    pub fit_sizes: usize,
    /// `U / J` values of a finite-U run.
    pub interactions: Vec<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            state: InitialState::Mi,
            sizes: vec![8],
            subsystem: None,
            tgrid: GridKind::Log,
            tmin: 0.1,
            tmax: 1e3,
            tpoints: 64,
            times: None,
            times_per_site: None,
            engine: "bbfg".into(),
            workers: 1,
            accumulation: Accumulation::Compensated,
            seed: 0,
            out: None,
            gaussian: false,
            page: false,
            page_samples: DEFAULT_PAGE_SAMPLES,
            s_tilde: true,
            bounds: true,
            structure: false,
            structure_eps: DEFAULT_EPS,
            conjecture_constant: None,
            permanent: true,
            fit_sizes: 5,
            interactions: vec![0.0, 0.4],
        }
    }
}

impl ScanConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// The permanent engine, with scan-level and permanent-level
    /// parallelism kept apart: a parallel engine gets all workers and the
    /// scan runs serially.
    pub fn engine(&self) -> Result<Engine> {
        let e: Engine = self.engine.parse()?;
        Ok(match e {
            Engine::BbfgParallel { .. } if !self.engine.contains(':') => Engine::BbfgParallel { workers: self.workers },
            e => e,
        })
    }

    /// Workers for independent scan points.
    pub fn scan_workers(&self) -> Result<usize> {
        Ok(match self.engine()? {
            Engine::BbfgParallel { .. } => 1,
            _ => self.workers,
        })
    }

    pub fn permanent_options(&self) -> PermanentOptions {
        PermanentOptions { accumulation: self.accumulation, ..PermanentOptions::default() }
    }

    pub fn cut(&self, sites: usize) -> Result<CutSpec> {
        match self.subsystem {
            Some(la) => CutSpec::new(sites, la),
            None => CutSpec::half(sites),
        }
    }

    /// Sample times for a chain of `sites`.
    pub fn times(&self, sites: usize) -> Vec<f64> {
        if let Some(r) = &self.times_per_site {
            return r.iter().map(|x| x * sites as f64).collect();
        }
        if let Some(t) = &self.times {
            return t.clone();
        }
        match self.tgrid {
            GridKind::Lin => lin_grid(self.tmin, self.tmax, self.tpoints),
            GridKind::Log => log_grid(self.tmin, self.tmax, self.tpoints),
        }
    }

    /// Checks everything that does not depend on the command.
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.sizes.is_empty() {
            return cfg("no system sizes given".into());
        }
        for &l in &self.sizes {
            self.state.validate(l)?;
            self.cut(l)?;
        }
        if self.workers == 0 {
            return cfg("workers must be at least 1".into());
        }
        self.engine()?;
        if self.times.is_none() && self.times_per_site.is_none() {
            if self.tpoints == 0 {
                return cfg("the time grid is empty".into());
            }
            if !(self.tmin.is_finite() && self.tmax.is_finite() && self.tmin >= 0.0) {
                return cfg(format!("bad time bounds [{}, {}]", self.tmin, self.tmax));
            }
            if self.tpoints > 1 && self.tmax <= self.tmin {
                return cfg(format!("tmax = {} must exceed tmin = {}", self.tmax, self.tmin));
            }
            if self.tgrid == GridKind::Log && self.tmin <= 0.0 {
                return cfg("a log time grid needs tmin > 0".into());
            }
        }
        for &l in &self.sizes {
            let t = self.times(l);
            if t.is_empty() {
                return cfg("the time grid is empty".into());
            }
            if t.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return cfg("times must be finite and nonnegative".into());
            }
            if t.windows(2).any(|w| w[1] <= w[0]) {
                return cfg("times must be strictly increasing".into());
            }
        }
        if self.page && self.page_samples < 2 {
            return cfg("the Page value needs at least two samples".into());
        }
        if !(self.structure_eps > 0.0 && self.structure_eps.is_finite()) {
            return cfg("structure_eps must be positive".into());
        }
        if self.fit_sizes < 2 {
            return cfg("fit_sizes must be at least 2".into());
        }
        if self.interactions.iter().any(|u| !u.is_finite()) {
            return cfg("interactions must be finite".into());
        }
        Ok(())
    }

    /// Rejects chains whose swap matrix is beyond reach of the permanent.
    pub fn check_permanent_sizes(&self) -> Result<()> {
        let limit = match self.state {
            InitialState::Mi => MI_MAX_SITES,
            InitialState::Cdw => CDW_MAX_SITES,
        };
        if let Some(&l) = self.sizes.iter().find(|&&l| l > limit) {
            return Err(Error::SizeGuard {
                what: match self.state {
                    InitialState::Mi => "MI chain length (swap matrix of 2L rows, about 2^(2L-1) terms)",
                    InitialState::Cdw => "CDW chain length (swap matrix of L rows, about 2^(L-1) terms)",
                },
                got: l,
                limit,
            });
        }
        Ok(())
    }

    /// Whether a Page value is sampled at this size.
    pub fn page_allowed(&self, sites: usize) -> bool {
        sites
            <= match self.state {
                InitialState::Mi => PAGE_MAX_SITES_MI,
                InitialState::Cdw => PAGE_MAX_SITES_CDW,
            }
    }

    pub fn check_page_sizes(&self) -> Result<()> {
        if !self.page {
            return Ok(());
        }
        if let Some(&l) = self.sizes.iter().find(|&&l| !self.page_allowed(l)) {
            return Err(Error::SizeGuard {
                what: "chain length for Page-value sampling",
                got: l,
                limit: match self.state {
                    InitialState::Mi => PAGE_MAX_SITES_MI,
                    InitialState::Cdw => PAGE_MAX_SITES_CDW,
                },
            });
        }
        Ok(())
    }
}
