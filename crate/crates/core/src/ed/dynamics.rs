use faer::{Mat, Side};

use super::hamiltonian::Hamiltonian;
use super::state::ManyBodyState;
use crate::error::{Error, Result};
use crate::matrix::C64;

/// Largest dimension diagonalized densely.
pub const MAX_DIAG_DIM: usize = 20_000;

/// Full eigendecomposition `H = V diag(E) V^T` of a real symmetric
/// Hamiltonian.
pub struct Spectrum {
    energies: Vec<f64>,
    vectors: Mat<f64>,
}

pub fn diagonalize(h: &Hamiltonian) -> Result<Spectrum> {
    if h.dim() > MAX_DIAG_DIM {
        return Err(Error::SizeGuard { what: "dense diagonalization dimension", got: h.dim(), limit: MAX_DIAG_DIM });
    }
    let evd = h
        .to_dense()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    Ok(Spectrum { energies: (0..h.dim()).map(|i| s[i]).collect(), vectors: evd.U().to_owned() })
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Expands `psi0` in the eigenbasis once; every later time is a phase
    /// multiplication and one back-transform.
    pub fn evolution(&self, psi0: &ManyBodyState) -> Result<Evolution<'_>> {
        if psi0.dim() != self.dim() {
            return Err(Error::domain("state and Hamiltonian dimensions differ"));
        }
        let a = psi0.amplitudes();
        let re = Mat::from_fn(self.dim(), 1, |i, _| a[i].re);
        let im = Mat::from_fn(self.dim(), 1, |i, _| a[i].im);
        let cre = self.vectors.transpose() * &re;
        let cim = self.vectors.transpose() * &im;
        let coeffs = (0..self.dim()).map(|k| C64::new(cre[(k, 0)], cim[(k, 0)])).collect();
        Ok(Evolution { spectrum: self, coeffs, psi0: psi0.clone() })
    }
}

pub struct Evolution<'a> {
    spectrum: &'a Spectrum,
    coeffs: Vec<C64>,
    psi0: ManyBodyState,
}

impl Evolution<'_> {
    /// `e^{-iHt} psi0`, with `t` in units of `1/J` when `J` is the energy unit.
    pub fn state(&self, t: f64) -> ManyBodyState {
        if t == 0.0 {
            return self.psi0.clone();
        }
        let n = self.spectrum.dim();
        let mut w = Mat::zeros(n, 2);
        for (k, (&e, &c)) in self.spectrum.energies.iter().zip(&self.coeffs).enumerate() {
            let v = c * C64::from_polar(1.0, -e * t);
            w[(k, 0)] = v.re;
            w[(k, 1)] = v.im;
        }
        let psi = &self.spectrum.vectors * &w;
        ManyBodyState::from_amplitudes((0..n).map(|i| C64::new(psi[(i, 0)], psi[(i, 1)])).collect())
    }

    /// `<H>`, constant in time.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().zip(&self.spectrum.energies).map(|(c, e)| c.norm_sqr() * e).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::InitialState;
    use crate::ed::{build_hamiltonian, FockBasis, QuenchSpec};

    #[test]
    fn two_level_rabi() {
        // H = [[0,-1],[-1,0]]: |1,0> -> cos t |1,0> + i sin t |0,1>
        let b = FockBasis::new(2, 1).unwrap();
        let h = build_hamiltonian(&b, &QuenchSpec::free(2, InitialState::Cdw, vec![])).unwrap();
        let sp = diagonalize(&h).unwrap();
        let psi0 = ManyBodyState::fock(&b, &[1, 0]).unwrap();
        let ev = sp.evolution(&psi0).unwrap();
        assert_eq!(ev.state(0.0), psi0);
        for t in [0.3, 1.7, 40.0] {
            let a = ev.state(t);
            assert!((a.amplitudes()[0] - C64::new(t.cos(), 0.0)).norm() < 1e-13);
            assert!((a.amplitudes()[1] - C64::new(0.0, t.sin())).norm() < 1e-13);
        }
    }

    #[test]
    fn norm_and_energy_are_conserved() {
        let b = FockBasis::new(6, 6).unwrap();
        let spec = QuenchSpec::free(6, InitialState::Mi, vec![]).with_interaction(0.4);
        let h = build_hamiltonian(&b, &spec).unwrap();
        let sp = diagonalize(&h).unwrap();
        let psi0 = ManyBodyState::initial(&b, InitialState::Mi).unwrap();
        let ev = sp.evolution(&psi0).unwrap();
        let e0 = h.expectation(psi0.amplitudes());
        assert!((ev.energy() - e0).abs() < 1e-12);
        for t in [0.5, 10.0, 1e4] {
            let s = ev.state(t);
            assert!((s.norm() - 1.0).abs() < 1e-10);
            assert!((h.expectation(s.amplitudes()) - e0).abs() < 1e-8 * e0.abs().max(1.0));
        }
    }
}
