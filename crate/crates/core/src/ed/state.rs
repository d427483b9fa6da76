use super::basis::{rank, FockBasis};
use crate::correlations::InitialState;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Dense amplitude vector over a [`FockBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct ManyBodyState {
    amps: Vec<C64>,
}

impl ManyBodyState {
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    /// The Fock state `|occ>`.
    pub fn fock(basis: &FockBasis, occ: &[u8]) -> Result<Self> {
        let i = basis
            .index_of(occ)
            .ok_or_else(|| Error::domain(format!("{occ:?} is not in the {}-site, {}-particle basis", basis.sites(), basis.particles())))?;
        let mut amps = vec![ZERO; basis.dim()];
        amps[i] = ONE;
        Ok(Self { amps })
    }

    /// The MI or CDW product state.
    pub fn initial(basis: &FockBasis, state: InitialState) -> Result<Self> {
        let mut occ = vec![0u8; basis.sites()];
        for s in state.occupied_sites(basis.sites())? {
            occ[s] = 1;
        }
        Self::fock(basis, &occ)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain("cannot normalize a zero or non-finite state"));
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }

    /// `<n_j>` for every site.
    pub fn densities(&self, basis: &FockBasis) -> Vec<f64> {
        let mut out = vec![0.0; basis.sites()];
        for (occ, a) in basis.iter().zip(&self.amps) {
            let w = a.norm_sqr();
            for (o, &n) in out.iter_mut().zip(occ) {
                *o += w * n as f64;
            }
        }
        out
    }

    /// `C_{j,l} = <b_j^dag b_l>` over all sites.
    pub fn one_body_density(&self, basis: &FockBasis) -> ComplexMatrix {
        let l = basis.sites();
        let mut c = ComplexMatrix::zeros(l);
        let mut scratch = vec![0u8; l];
        for (occ, &a) in basis.iter().zip(&self.amps) {
            if a == ZERO {
                continue;
            }
            for src in 0..l {
                if occ[src] == 0 {
                    continue;
                }
                for dst in 0..l {
                    if dst == src {
                        c[(src, src)] += a.norm_sqr() * occ[src] as f64;
                        continue;
                    }
                    scratch.copy_from_slice(occ);
                    let f = (scratch[src] as f64 * (scratch[dst] as f64 + 1.0)).sqrt();
                    scratch[src] -= 1;
                    scratch[dst] += 1;
                    // <psi| b_dst^dag b_src |psi>
                    c[(dst, src)] += self.amps[rank(&scratch)].conj() * a * f;
                }
            }
        }
        c
    }
}
