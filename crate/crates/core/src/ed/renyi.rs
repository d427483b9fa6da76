use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::basis::{rank, sector_size, FockBasis};
use super::state::ManyBodyState;
use crate::correlations::CutSpec;
use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::stats::MeanEstimate;

/// Samples used for the Page value unless overridden.
pub const DEFAULT_PAGE_SAMPLES: usize = 1024;

/// Factorization of a fixed-`N` basis across a cut. With `N` conserved the
/// reduced density matrix is block diagonal in `N_A`, so amplitudes are
/// grouped into one `dim_A(N_A) x dim_B(N - N_A)` matrix per sector.
#[derive(Clone, Debug)]
pub struct Bipartition {
    cut: CutSpec,
    /// `(rows, cols)` for `N_A = 0..=N`.
    sectors: Vec<(usize, usize)>,
    /// `(N_A, row, col)` for every basis state.
    place: Vec<(u32, u32, u32)>,
}

impl Bipartition {
    pub fn new(basis: &FockBasis, cut: CutSpec) -> Result<Self> {
        if cut.sites() != basis.sites() {
            return Err(Error::domain("cut and basis disagree on L"));
        }
        let (la, n) = (cut.la(), basis.particles());
        let lb = basis.sites() - la;
        let sectors = (0..=n)
            .map(|na| (sector_size(la, na) as usize, sector_size(lb, n - na) as usize))
            .collect();
        let place = basis
            .iter()
            .map(|occ| {
                let na: u32 = occ[..la].iter().map(|&x| x as u32).sum();
                (na, rank(&occ[..la]) as u32, rank(&occ[la..]) as u32)
            })
            .collect();
        Ok(Self { cut, sectors, place })
    }

    pub fn cut(&self) -> CutSpec {
        self.cut
    }

    /// `Tr rho_A^2` of a normalized state.
    pub fn purity(&self, psi: &ManyBodyState) -> Result<f64> {
        if psi.dim() != self.place.len() {
            return Err(Error::domain("state does not live on this bipartition's basis"));
        }
        let mut blocks: Vec<Mat<C64>> = self.sectors.iter().map(|&(r, c)| Mat::zeros(r, c)).collect();
        for (&(s, r, c), &a) in self.place.iter().zip(psi.amplitudes()) {
            blocks[s as usize][(r as usize, c as usize)] = a;
        }
        let mut p = 0.0;
        for m in &blocks {
            if m.nrows() == 0 || m.ncols() == 0 {
                continue;
            }
            // Tr (M M^dag)^2 = ||G||_F^2 with G the smaller Gram matrix
            let g = if m.nrows() <= m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
            p += g.norm_l2().powi(2);
        }
        Ok(p)
    }
}

/// `S_2 = -ln Tr rho_A^2`.
pub fn renyi2_exact(psi: &ManyBodyState, part: &Bipartition) -> Result<f64> {
    let p = part.purity(psi)?;
    if !(p > 0.0 && p <= 1.0 + 1e-9) {
        return Err(Error::NumericalBreakdown(format!("purity {p} outside (0, 1]")));
    }
    Ok((-p.ln()).max(0.0))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PageEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Average `S_2` of normalized complex-Gaussian random vectors in the
/// fixed-`N` space. Sample `i` draws from stream `i` of a ChaCha20
/// generator seeded with `seed`, so the result does not depend on how the
/// samples are scheduled across threads.
pub fn page_value(basis: &FockBasis, cut: CutSpec, samples: usize, seed: u64) -> Result<PageEstimate> {
    if samples == 0 {
        return Err(Error::domain("the Page value needs at least one sample"));
    }
    let part = Bipartition::new(basis, cut)?;
    let dim = basis.dim();
    let values = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let amps: Vec<C64> = (0..dim)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            renyi2_exact(&ManyBodyState::from_amplitudes(amps).normalized()?, &part)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = MeanEstimate::of(&values);
    Ok(PageEstimate { mean: m.mean, stderr: m.stderr, samples, seed })
}

/// The Fock state with occupations `a` on `A` followed by `b` on `B`.
pub fn product_state(basis: &FockBasis, cut: CutSpec, a: &[u8], b: &[u8]) -> Result<ManyBodyState> {
    if a.len() != cut.la() {
        return Err(Error::domain("A occupation has the wrong length"));
    }
    let occ: Vec<u8> = a.iter().chain(b).copied().collect();
    ManyBodyState::fock(basis, &occ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ONE;

    #[test]
    fn product_state_has_zero_entropy() {
        let b = FockBasis::new(4, 4).unwrap();
        let cut = CutSpec::half(4).unwrap();
        let part = Bipartition::new(&b, cut).unwrap();
        let s = product_state(&b, cut, &[2, 0], &[1, 1]).unwrap();
        assert_eq!(renyi2_exact(&s, &part).unwrap(), 0.0);
    }

    #[test]
    fn two_schmidt_values() {
        // (|1,0> + |0,1>)/sqrt 2 across a one-site cut
        let b = FockBasis::new(2, 1).unwrap();
        let part = Bipartition::new(&b, CutSpec::new(2, 1).unwrap()).unwrap();
        let s = ManyBodyState::from_amplitudes(vec![ONE, ONE]).normalized().unwrap();
        assert!((renyi2_exact(&s, &part).unwrap() - 2f64.ln()).abs() < 1e-15);
        // unequal weights p, 1-p: -ln(p^2 + (1-p)^2)
        let s = ManyBodyState::from_amplitudes(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        assert!((renyi2_exact(&s, &part).unwrap() + (0.36f64.powi(2) + 0.64f64.powi(2)).ln()).abs() < 1e-15);
    }

    #[test]
    fn purity_agrees_with_dense_reduced_density_matrix() {
        let b = FockBasis::new(5, 3).unwrap();
        let cut = CutSpec::new(5, 2).unwrap();
        let part = Bipartition::new(&b, cut).unwrap();
        let amps: Vec<C64> = (0..b.dim()).map(|i| C64::new((1.3 * i as f64).sin(), (0.7 * i as f64).cos())).collect();
        let psi = ManyBodyState::from_amplitudes(amps).normalized().unwrap();
        // rho_A[(a, a')] = sum_b psi(a b) conj(psi(a' b)) over full occupation strings
        let mut p = 0.0;
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                let (si, sj) = (b.state(i), b.state(j));
                for k in 0..b.dim() {
                    for l in 0..b.dim() {
                        let (sk, sl) = (b.state(k), b.state(l));
                        // rho[(a_i, a_j)] rho[(a_j, a_i)] with b parts matched
                        if si[2..] == sj[2..] && sk[2..] == sl[2..] && si[..2] == sl[..2] && sj[..2] == sk[..2] {
                            let a = psi.amplitudes();
                            p += (a[i] * a[j].conj() * a[k] * a[l].conj()).re;
                        }
                    }
                }
            }
        }
        assert!((part.purity(&psi).unwrap() - p).abs() < 1e-13);
    }

    #[test]
    fn page_value_is_seeded_and_reproducible() {
        let b = FockBasis::new(4, 4).unwrap();
        let cut = CutSpec::half(4).unwrap();
        let a = page_value(&b, cut, 64, 7).unwrap();
        let c = page_value(&b, cut, 64, 7).unwrap();
        assert_eq!(a.mean, c.mean);
        assert!(a.mean > 0.0 && a.stderr > 0.0);
        assert_ne!(page_value(&b, cut, 64, 8).unwrap().mean, a.mean);
        assert!(page_value(&b, cut, 0, 7).is_err());
    }
}
