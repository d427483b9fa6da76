use faer::Mat;
use serde::{Deserialize, Serialize};

use super::basis::{rank, FockBasis};
use crate::correlations::InitialState;
use crate::error::{Error, Result};
use crate::matrix::C64;

/// Parameters of a Bose-Hubbard quench on an open chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchSpec {
    pub sites: usize,
    /// Hopping `J`.
    pub hopping: f64,
    /// On-site interaction `U`.
    pub interaction: f64,
    /// Site potentials `Omega_j`; empty means all zero.
    #[serde(default)]
    pub potentials: Vec<f64>,
    pub state: InitialState,
    /// Times in units of `1/J`.
    pub times: Vec<f64>,
}

impl QuenchSpec {
    /// Hopping-only quench with `J = 1`.
    pub fn free(sites: usize, state: InitialState, times: Vec<f64>) -> Self {
        Self { sites, hopping: 1.0, interaction: 0.0, potentials: Vec::new(), state, times }
    }

    pub fn with_interaction(mut self, u: f64) -> Self {
        self.interaction = u;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.state.validate(self.sites)?;
        if !(self.hopping.is_finite() && self.interaction.is_finite()) {
            return Err(Error::domain("J and U must be finite"));
        }
        if !self.potentials.is_empty() && self.potentials.len() != self.sites {
            return Err(Error::domain(format!(
                "{} site potentials given for L = {}",
                self.potentials.len(),
                self.sites
            )));
        }
        if self.potentials.iter().any(|w| !w.is_finite()) {
            return Err(Error::domain("site potentials must be finite"));
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::domain("times must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn potential(&self, j: usize) -> f64 {
        self.potentials.get(j).copied().unwrap_or(0.0)
    }

    /// The Fock basis at this quench's filling.
    pub fn basis(&self) -> Result<FockBasis> {
        FockBasis::new(self.sites, self.state.particle_count(self.sites)?)
    }
}

/// Real symmetric Hamiltonian in a fixed-`N` Fock basis. Off-diagonal
/// entries are stored once per unordered pair.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    dim: usize,
    diag: Vec<f64>,
    /// `(i, j, h_ij)` with `i < j`.
    upper: Vec<(u32, u32, f64)>,
}

/// `-J sum (b_j^dag b_{j+1} + h.c.) + sum Omega_j n_j + U/2 sum n_j (n_j - 1)`
/// with open boundaries.
pub fn build_hamiltonian(basis: &FockBasis, spec: &QuenchSpec) -> Result<Hamiltonian> {
    spec.validate()?;
    if basis.sites() != spec.sites {
        return Err(Error::domain("basis and quench spec disagree on L"));
    }
    let (l, dim) = (basis.sites(), basis.dim());
    let mut diag = Vec::with_capacity(dim);
    let mut upper = Vec::new();
    let mut scratch = vec![0u8; l];
    for (i, occ) in basis.iter().enumerate() {
        let e: f64 = occ
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                let n = n as f64;
                spec.potential(j) * n + 0.5 * spec.interaction * n * (n - 1.0)
            })
            .sum();
        diag.push(e);
        if spec.hopping == 0.0 {
            continue;
        }
        for j in 0..l - 1 {
            // both hopping directions; keep only targets past i
            for (from, to) in [(j + 1, j), (j, j + 1)] {
                if occ[from] == 0 {
                    continue;
                }
                scratch.copy_from_slice(occ);
                let amp = (scratch[from] as f64 * (scratch[to] as f64 + 1.0)).sqrt();
                scratch[from] -= 1;
                scratch[to] += 1;
                let k = rank(&scratch);
                if k > i {
                    upper.push((i as u32, k as u32, -spec.hopping * amp));
                }
            }
        }
    }
    Ok(Hamiltonian { dim, diag, upper })
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn nonzeros(&self) -> usize {
        self.dim + 2 * self.upper.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let (a, b) = (i.min(j) as u32, i.max(j) as u32);
        self.upper.iter().filter(|e| e.0 == a && e.1 == b).map(|e| e.2).sum()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.dim, self.dim);
        for (i, &d) in self.diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        for &(i, j, v) in &self.upper {
            m[(i as usize, j as usize)] += v;
            m[(j as usize, i as usize)] += v;
        }
        m
    }

    /// `H psi`.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        assert_eq!(psi.len(), self.dim);
        let mut out: Vec<C64> = psi.iter().zip(&self.diag).map(|(p, d)| p * d).collect();
        for &(i, j, v) in &self.upper {
            let (i, j) = (i as usize, j as usize);
            out[i] += psi[j] * v;
            out[j] += psi[i] * v;
        }
        out
    }

    /// `<psi|H|psi>`, real part.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        let hp = self.apply(psi);
        psi.iter().zip(&hp).map(|(a, b)| (a.conj() * b).re).sum()
    }
}
