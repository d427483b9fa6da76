//! Correlation matrices `Z`, swap matrices `A_Z` and the bound quantities
//! derived from them.
//!
//! For an initial Fock state with particles on the sites `s_1 < ... < s_N`,
//!
//! `z_{j,l}(t) = sum_{m <= L_A} conj(y_{s_j,m}) y_{s_l,m}`,
//!
//! and `Tr rho_A^2 = perm A_Z` with `A_Z = [[I - Z, Z], [Z, I - Z]]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_table;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ONE};
use crate::single_particle::{Propagator, SpectralBasis};

/// Default threshold for "nonzero" entries of `Z` and for the Bessel tail.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Prefactor of the rigorous volume-law bound.
pub const VOLUME_LAW_PREFACTOR: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitialState {
    /// Mott insulator at unit filling, one boson per site.
    #[serde(rename = "MI")]
    Mi,
    /// Charge-density wave `0101...01`, bosons on the even sites `2, 4, ..., L`.
    #[serde(rename = "CDW")]
    Cdw,
}

impl InitialState {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitialState::Mi => "MI",
            InitialState::Cdw => "CDW",
        }
    }

    pub fn validate(&self, sites: usize) -> Result<()> {
        if sites < 1 {
            return Err(Error::domain("lattice needs at least one site"));
        }
        if *self == InitialState::Cdw && sites % 2 != 0 {
            return Err(Error::domain(format!("CDW state needs an even number of sites, got L = {sites}")));
        }
        Ok(())
    }

    /// Zero-based occupied sites.
    pub fn occupied_sites(&self, sites: usize) -> Result<Vec<usize>> {
        self.validate(sites)?;
        Ok(match self {
            InitialState::Mi => (0..sites).collect(),
            InitialState::Cdw => (1..sites).step_by(2).collect(),
        })
    }

    pub fn particle_count(&self, sites: usize) -> Result<usize> {
        Ok(self.occupied_sites(sites)?.len())
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mi" => Ok(InitialState::Mi),
            "cdw" => Ok(InitialState::Cdw),
            other => Err(Error::Config(format!("unknown initial state {other:?} (expected MI or CDW)"))),
        }
    }
}

/// Subsystem `A` = sites `1..=L_A` of a chain of `L` sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CutSpec {
    sites: usize,
    la: usize,
}

impl CutSpec {
    pub fn new(sites: usize, la: usize) -> Result<Self> {
        if la < 1 || la + 1 > sites {
            return Err(Error::domain(format!("cut needs 1 <= L_A <= L - 1, got L_A = {la} for L = {sites}")));
        }
        Ok(Self { sites, la })
    }

    /// Half-chain cut `L_A = L / 2`.
    pub fn half(sites: usize) -> Result<Self> {
        Self::new(sites, sites / 2)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn la(&self) -> usize {
        self.la
    }
}

#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    z: ComplexMatrix,
    state: InitialState,
    cut: CutSpec,
    tj: f64,
}

impl CorrelationMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.z
    }

    pub fn state(&self) -> InitialState {
        self.state
    }

    pub fn cut(&self) -> CutSpec {
        self.cut
    }

    pub fn tj(&self) -> f64 {
        self.tj
    }

    /// Particle number `N`, the dimension of `Z`.
    pub fn particles(&self) -> usize {
        self.z.dim()
    }

    /// Wraps an arbitrary matrix, for tests and external callers. Only
    /// squareness is checked; physical validity is the caller's concern.
    pub fn from_matrix(z: ComplexMatrix, state: InitialState, cut: CutSpec, tj: f64) -> Self {
        Self { z, state, cut, tj }
    }
}

/// `A_Z = [[I - Z, Z], [Z, I - Z]]`, of size `L~ = 2N`, with the labels of
/// the `Z` it was built from.
#[derive(Clone, Debug)]
pub struct SwapMatrix {
    a: ComplexMatrix,
    state: InitialState,
    cut: CutSpec,
    tj: f64,
}

impl SwapMatrix {
    pub fn state(&self) -> InitialState {
        self.state
    }

    pub fn cut(&self) -> CutSpec {
        self.cut
    }

    pub fn tj(&self) -> f64 {
        self.tj
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.a
    }

    /// `L~ = 2N`.
    pub fn size(&self) -> usize {
        self.a.dim()
    }

    pub fn particles(&self) -> usize {
        self.a.dim() / 2
    }
}

fn check_cut(sites: usize, state: InitialState, cut: CutSpec) -> Result<()> {
    state.validate(sites)?;
    if cut.sites != sites {
        return Err(Error::domain(format!("cut was made for L = {}, propagator has L = {sites}", cut.sites)));
    }
    Ok(())
}

/// `Z` from a full propagator.
pub fn build_z(y: &Propagator, state: InitialState, cut: CutSpec) -> Result<CorrelationMatrix> {
    let l = y.sites();
    check_cut(l, state, cut)?;
    let occ = state.occupied_sites(l)?;
    let z = ComplexMatrix::from_fn(occ.len(), |j, k| {
        (0..cut.la).map(|m| y.get(occ[j], m).conj() * y.get(occ[k], m)).sum()
    });
    Ok(CorrelationMatrix { z, state, cut, tj: y.tj() })
}

/// `Z` computed from the spectral basis, forming only the `N x L_A` block
/// of the propagator that enters. Preferred for long chains.
pub fn build_z_from_basis(basis: &SpectralBasis, tj: f64, state: InitialState, cut: CutSpec) -> Result<CorrelationMatrix> {
    if !(tj.is_finite() && tj >= 0.0) {
        return Err(Error::domain(format!("time must be finite and nonnegative, got tJ = {tj}")));
    }
    let l = basis.sites();
    check_cut(l, state, cut)?;
    let occ = state.occupied_sites(l)?;
    let cols: Vec<usize> = (0..cut.la).collect();
    let b = basis.propagator_block(tj, &occ, &cols);
    // Z = conj(B) B^T
    let zf = b.conjugate() * b.transpose();
    Ok(CorrelationMatrix { z: ComplexMatrix::from_faer(zf.as_ref()), state, cut, tj })
}

pub fn build_swap_matrix(z: &CorrelationMatrix) -> SwapMatrix {
    let n = z.particles();
    let zm = &z.z;
    let a = ComplexMatrix::from_fn(2 * n, |r, c| {
        let zz = zm[(r % n, c % n)];
        if (r < n) == (c < n) {
            let delta = if r % n == c % n { ONE } else { C64::new(0.0, 0.0) };
            delta - zz
        } else {
            zz
        }
    });
    SwapMatrix { a, state: z.state, cut: z.cut, tj: z.tj }
}

/// `g = (1/N) sum_j max_l max(|z_{j,l}|, |delta_{j,l} - z_{j,l}|)`, read
/// from the first `N` rows of `A_Z`. The lower `N` rows are the same
/// entries in swapped column blocks and give the same maxima.
pub fn g_value(a: &SwapMatrix) -> f64 {
    let n = a.particles();
    let total: f64 = (0..n)
        .map(|j| a.a.row(j).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .sum();
    total / n as f64
}

/// Definitional form: the mean row infinity norm over all `2N` rows.
pub fn g_value_full_scan(a: &SwapMatrix) -> f64 {
    let m = a.size();
    let total: f64 = a.a.rows().map(|row| row.iter().map(|z| z.norm()).fold(0.0, f64::max)).sum();
    total / m as f64
}

/// `s~ = 1/2 - (1/N) sum_j |z_{j,j} - 1/2|`.
pub fn entropy_density_like(z: &CorrelationMatrix) -> f64 {
    let n = z.particles();
    let dev: f64 = (0..n).map(|j| (z.z[(j, j)].re - 0.5).abs()).sum();
    0.5 - dev / n as f64
}

/// The same quantity read from the diagonal `1 - z_{j,j}` of the upper
/// left block of `A_Z`.
pub fn entropy_density_like_from_swap(a: &SwapMatrix) -> f64 {
    let n = a.particles();
    let dev: f64 = (0..n).map(|j| (0.5 - a.a[(j, j)].re).abs()).sum();
    0.5 - dev / n as f64
}

/// `1e-5 (1 - g)^2 L~`, a rigorous lower bound on `S_2`.
pub fn volume_law_lower_bound(g: f64, l_tilde: usize) -> f64 {
    VOLUME_LAW_PREFACTOR * (1.0 - g).powi(2) * l_tilde as f64
}

/// `c (1 - g) L~`, the conjectured tighter bound. The constant is not
/// known; this value is only ever reported.
pub fn conjectured_bound(g: f64, l_tilde: usize, constant: f64) -> f64 {
    constant * (1.0 - g) * l_tilde as f64
}

/// Closed-form estimate `(e/2) x - ln(sqrt(pi e x) eps)` with `x = 2tJ`.
pub fn bessel_beta_estimate(tj: f64, eps: f64) -> f64 {
    let x = 2.0 * tj;
    let e = std::f64::consts::E;
    e / 2.0 * x - ((std::f64::consts::PI * e * x).sqrt() * eps).ln()
}

/// Smallest `beta >= 1` with `|J_n(2tJ)| < eps` for every `n >= beta`.
///
/// `J_n(x)` decays monotonically in `n` beyond the turning point `n ~ x`,
/// so the table is taken far enough past both that point and the
/// closed-form estimate for the tail condition to be checkable.
pub fn bessel_beta(tj: f64, eps: f64) -> Result<u64> {
    if !(tj.is_finite() && tj >= 0.0) {
        return Err(Error::domain(format!("tJ must be finite and nonnegative, got {tj}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    if tj == 0.0 {
        return Ok(1);
    }
    let x = 2.0 * tj;
    let seed = bessel_beta_estimate(tj, eps).max(x).ceil() as usize;
    let nmax = 2 * seed + 32;
    let table = bessel_j_table(nmax, x);
    let last_big = table.iter().rposition(|v| v.abs() >= eps);
    Ok(match last_big {
        Some(n) => n as u64 + 1,
        None => 1,
    }
    .max(1))
}

/// Block diagnostics of `Z^MI` at the half cut: the band of rows and
/// columns where `Z` differs from its initial value `diag(I, 0)` by more
/// than `eps`.
#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub sites: usize,
    pub la: usize,
    pub tj: f64,
    pub eps: f64,
    /// Zero-based first and last row of the band, if any.
    pub support: Option<(usize, usize)>,
    pub width: usize,
    pub beta: u64,
    pub two_beta: u64,
    pub four_tj: f64,
    /// `width / 4tJ` (`None` at `t = 0`).
    pub width_over_four_tj: Option<f64>,
    /// `width / 2beta`.
    pub width_over_two_beta: f64,
    /// Largest `|z - 1|` deviation on the diagonal identity block above
    /// the band, and largest `|z|` in the zero block below it.
    pub identity_residual: f64,
    pub zero_residual: f64,
    /// Whether the `(I, Z', 0)` block form applies, i.e. the band leaves
    /// an identity block above and a zero block below.
    pub block_form_valid: bool,
}

pub fn z_block_structure(z: &CorrelationMatrix, eps: f64) -> Result<StructureReport> {
    if z.state != InitialState::Mi {
        return Err(Error::domain("block structure report is defined for the MI state"));
    }
    let l = z.cut.sites;
    let la = z.cut.la;
    if 2 * la != l {
        return Err(Error::domain(format!("block structure report needs L_A = L/2, got L_A = {la} for L = {l}")));
    }
    let zm = &z.z;
    let init = |j: usize, k: usize| if j == k && j < la { 1.0 } else { 0.0 };
    let deviates = |j: usize| (0..l).any(|k| (zm[(j, k)] - C64::new(init(j, k), 0.0)).norm() > eps);
    let rows: Vec<usize> = (0..l).filter(|&j| deviates(j)).collect();
    let support = rows.first().map(|&lo| (lo, *rows.last().unwrap()));
    let width = support.map_or(0, |(lo, hi)| hi - lo + 1);
    let (lo, hi) = support.unwrap_or((la, la - 1));
    let mut identity_residual = 0.0f64;
    let mut zero_residual = 0.0f64;
    for j in 0..l {
        for k in 0..l {
            let d = (zm[(j, k)] - C64::new(init(j, k), 0.0)).norm();
            if j < lo && k < lo {
                identity_residual = identity_residual.max(d);
            } else if j > hi && k > hi {
                zero_residual = zero_residual.max(d);
            }
        }
    }
    let beta = bessel_beta(z.tj, eps)?;
    let four_tj = 4.0 * z.tj;
    Ok(StructureReport {
        sites: l,
        la,
        tj: z.tj,
        eps,
        support,
        width,
        beta,
        two_beta: 2 * beta,
        four_tj,
        width_over_four_tj: (four_tj > 0.0).then(|| width as f64 / four_tj),
        width_over_two_beta: width as f64 / (2 * beta) as f64,
        identity_residual,
        zero_residual,
        block_form_valid: support.map_or(true, |(lo, hi)| lo > 0 && hi + 1 < l),
    })
}
