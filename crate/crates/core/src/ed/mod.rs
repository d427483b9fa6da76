//! Exact diagonalization of the Bose-Hubbard chain in a fixed-`N` Fock
//! basis: an independent referee for the permanent formula at `U = 0`, the
//! finite-`U` quench, and the Page value.

mod basis;
mod dynamics;
mod hamiltonian;
mod renyi;
mod state;

pub use basis::{binomial, sector_size, FockBasis, MAX_BASIS_SIZE};
pub use dynamics::{diagonalize, Evolution, Spectrum, MAX_DIAG_DIM};
pub use hamiltonian::{build_hamiltonian, Hamiltonian, QuenchSpec};
pub use renyi::{page_value, product_state, renyi2_exact, Bipartition, PageEstimate, DEFAULT_PAGE_SAMPLES};
pub use state::ManyBodyState;

use serde::Serialize;

use crate::correlations::CutSpec;
use crate::error::Result;
use crate::stats::MeanEstimate;

/// One time of an exact trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExactPoint {
    #[serde(rename = "tJ")]
    pub tj: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    pub energy: f64,
    pub particles: f64,
    pub norm: f64,
}

/// Everything needed to evaluate a quench at arbitrary times: the basis,
/// the cut, the Hamiltonian and its spectrum, and the initial state.
pub struct QuenchSolver {
    spec: QuenchSpec,
    basis: FockBasis,
    part: Bipartition,
    hamiltonian: Hamiltonian,
    spectrum: Spectrum,
    psi0: ManyBodyState,
}

impl QuenchSolver {
    pub fn new(spec: &QuenchSpec, cut: CutSpec) -> Result<Self> {
        spec.validate()?;
        let basis = spec.basis()?;
        let part = Bipartition::new(&basis, cut)?;
        let hamiltonian = build_hamiltonian(&basis, spec)?;
        let spectrum = diagonalize(&hamiltonian)?;
        let psi0 = ManyBodyState::initial(&basis, spec.state)?;
        Ok(Self { spec: spec.clone(), basis, part, hamiltonian, spectrum, psi0 })
    }

    pub fn spec(&self) -> &QuenchSpec {
        &self.spec
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn evolution(&self) -> Evolution<'_> {
        self.spectrum.evolution(&self.psi0).expect("initial state lives on the basis")
    }

    /// `S_2(t)` with energy, particle number and norm at each time.
    pub fn trace(&self, times: &[f64]) -> Result<Vec<ExactPoint>> {
        let ev = self.evolution();
        times
            .iter()
            .map(|&t| {
                let psi = ev.state(t);
                Ok(ExactPoint {
                    tj: t,
                    s2: renyi2_exact(&psi, &self.part)?,
                    energy: self.hamiltonian.expectation(psi.amplitudes()),
                    particles: psi.densities(&self.basis).iter().sum(),
                    norm: psi.norm(),
                })
            })
            .collect()
    }
}

/// Exact `S_2(t)` over the quench's time grid.
pub fn finite_u_scan(spec: &QuenchSpec, cut: CutSpec) -> Result<Vec<ExactPoint>> {
    QuenchSolver::new(spec, cut)?.trace(&spec.times)
}

/// Time average of `S_2` over a trace.
pub fn time_average(points: &[ExactPoint]) -> MeanEstimate {
    MeanEstimate::of(&points.iter().map(|p| p.s2).collect::<Vec<_>>())
}
