//! Single-particle problem of the open hopping chain.
//!
//! The chain `H = -J sum_j (b_j^dag b_{j+1} + h.c.)` with open ends is
//! diagonalized in closed form by sine modes, so no eigensolver is involved
//! here. Time enters only as the dimensionless product `tJ`.

use std::f64::consts::PI;

use faer::Mat;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// Geometry and hopping of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    sites: usize,
    hopping: f64,
}

impl LatticeSpec {
    pub fn new(sites: usize, hopping: f64) -> Result<Self> {
        if sites < 1 {
            return Err(Error::domain("lattice needs at least one site"));
        }
        if !(hopping.is_finite() && hopping > 0.0) {
            return Err(Error::domain(format!("hopping must be positive and finite, got {hopping}")));
        }
        Ok(Self { sites, hopping })
    }

    /// Chain of `sites` sites with `J = 1`.
    pub fn unit(sites: usize) -> Result<Self> {
        Self::new(sites, 1.0)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn hopping(&self) -> f64 {
        self.hopping
    }
}

/// Eigenpairs of the open chain. `modes` is `L x L` row-major with row `k`
/// the mode and column `l` the site.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    spec: LatticeSpec,
    energies: Vec<f64>,
    modes: Vec<f64>,
}

/// `sin(pi * m / (L + 1))` with the argument reduced modulo `2(L + 1)` in
/// integers first, so that mirror-image sites produce bitwise-equal values.
fn sine_mode(m: usize, l_plus_1: usize) -> f64 {
    let period = 2 * l_plus_1;
    let r = m % period;
    if r == 0 || r == l_plus_1 {
        return 0.0;
    }
    let (r, sign) = if r > l_plus_1 { (r - l_plus_1, -1.0) } else { (r, 1.0) };
    // sin(pi r / n) = sin(pi (n - r) / n)
    let r = r.min(l_plus_1 - r);
    sign * (PI * r as f64 / l_plus_1 as f64).sin()
}

pub fn solve_open_chain(spec: LatticeSpec) -> Result<SpectralBasis> {
    let l = spec.sites;
    if l < 1 {
        return Err(Error::domain("lattice needs at least one site"));
    }
    let n1 = l + 1;
    let norm = (2.0 / n1 as f64).sqrt();
    // -2J cos(pi k / n) = 2J sin(pi (2k - n) / 2n); the sine form is exactly
    // zero at the band center and antisymmetric under k -> n - k
    let energies = (1..=l)
        .map(|k| 2.0 * spec.hopping * (PI * (2 * k as i64 - n1 as i64) as f64 / (2 * n1) as f64).sin())
        .collect();
    let mut modes = Vec::with_capacity(l * l);
    for k in 1..=l {
        for site in 1..=l {
            modes.push(norm * sine_mode(k * site, n1));
        }
    }
    Ok(SpectralBasis { spec, energies, modes })
}

impl SpectralBasis {
    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn sites(&self) -> usize {
        self.spec.sites
    }

    /// Mode energies `eps_k`, increasing in `k`.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Mode amplitude `x_{k,l}` with zero-based `k` and `l`.
    #[inline]
    pub fn mode(&self, k: usize, site: usize) -> f64 {
        self.modes[k * self.spec.sites + site]
    }

    /// Propagator block `y_{j,l}(t)` for the requested zero-based rows `j`
    /// and columns `l`, returned as a dense `rows.len() x cols.len()` faer
    /// matrix. Used where only part of `Y` is needed (large chains).
    pub fn propagator_block(&self, tj: f64, rows: &[usize], cols: &[usize]) -> Mat<C64> {
        if tj == 0.0 {
            // Y(0) = I exactly, not just up to the roundoff of X X^T
            return Mat::from_fn(rows.len(), cols.len(), |r, c| {
                C64::new(if rows[r] == cols[c] { 1.0 } else { 0.0 }, 0.0)
            });
        }
        let l = self.sites();
        let phases: Vec<C64> = self
            .energies
            .iter()
            .map(|&e| C64::from_polar(1.0, -e / self.spec.hopping * tj))
            .collect();
        // left[j, k] = x_{k, j};  right[k, c] = e^{-i eps_k t} x_{k, c}
        let left = Mat::<C64>::from_fn(rows.len(), l, |r, k| C64::new(self.mode(k, rows[r]), 0.0));
        let right = Mat::<C64>::from_fn(l, cols.len(), |k, c| phases[k] * self.mode(k, cols[c]));
        left * right
    }
}

/// Time-evolution matrix `Y(t)` of the single-particle problem.
#[derive(Clone, Debug)]
pub struct Propagator {
    y: ComplexMatrix,
    tj: f64,
}

impl Propagator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.y
    }

    pub fn tj(&self) -> f64 {
        self.tj
    }

    pub fn sites(&self) -> usize {
        self.y.dim()
    }

    #[inline]
    pub fn get(&self, j: usize, l: usize) -> C64 {
        self.y[(j, l)]
    }
}

/// `y_{j,l}(t) = sum_k x_{k,j} e^{-i eps_k t} x_{k,l}` at dimensionless time `tJ`.
pub fn propagator(basis: &SpectralBasis, tj: f64) -> Result<Propagator> {
    if !(tj.is_finite() && tj >= 0.0) {
        return Err(Error::domain(format!("time must be finite and nonnegative, got tJ = {tj}")));
    }
    let l = basis.sites();
    let all: Vec<usize> = (0..l).collect();
    let block = basis.propagator_block(tj, &all, &all);
    Ok(Propagator { y: ComplexMatrix::from_faer(block.as_ref()), tj })
}
