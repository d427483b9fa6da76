//! Second Renyi entropy from the permanent formula, the Gaussian-state
//! reference, and the bound report attached to every point.

use serde::Serialize;

use crate::correlations::{
    build_swap_matrix, build_z_from_basis, entropy_density_like_from_swap, g_value, volume_law_lower_bound,
    CutSpec, InitialState, SwapMatrix,
};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::permanent::{Engine, Method, PermanentOptions};
use crate::single_particle::{Propagator, SpectralBasis};
use crate::stats::MeanEstimate;

/// Largest `|Im perm| / Re perm` accepted for a swap-matrix permanent.
pub const MAX_IMAG_RATIO: f64 = 1e-4;

/// Eigenvalues of a one-body matrix down to this are treated as roundoff
/// and clamped to zero.
pub const OCCUPATION_CLAMP: f64 = -1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct EntropyPoint {
    pub state: InitialState,
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "L_A")]
    pub la: usize,
    #[serde(rename = "tJ")]
    pub tj: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    pub perm_value: C64,
    pub perm_method: Method,
    pub perm_terms: u64,
    pub g: f64,
    pub s_tilde: f64,
    pub lower_bound: f64,
    #[serde(rename = "S2_gaussian")]
    pub s2_gaussian: Option<f64>,
}

impl EntropyPoint {
    /// `L~ = 2N`.
    pub fn l_tilde(&self) -> usize {
        2 * self.state.particle_count(self.sites).unwrap_or(0)
    }

    /// Fails with [`Error::BoundViolation`] unless `S2 >= 1e-5 (1 - g)^2 L~`.
    pub fn check_bound(&self) -> Result<()> {
        if self.s2 >= self.lower_bound {
            Ok(())
        } else {
            Err(Error::BoundViolation { s2: self.s2, bound: self.lower_bound, l: self.sites, t: self.tj })
        }
    }
}

/// `S_2 = -ln Re perm A_Z`, with `g`, `s~` and the rigorous lower bound.
pub fn renyi2(a: &SwapMatrix, engine: Engine, opts: &PermanentOptions) -> Result<EntropyPoint> {
    let p = engine.compute(a.matrix(), opts)?;
    let v = p.value;
    if !(v.re > 0.0) {
        return Err(Error::NumericalBreakdown(format!(
            "Re perm A_Z = {} is not positive (L~ = {}, tJ = {})",
            v.re,
            a.size(),
            a.tj()
        )));
    }
    if (v.im / v.re).abs() > MAX_IMAG_RATIO {
        return Err(Error::NumericalBreakdown(format!(
            "perm A_Z = {v} has |Im/Re| above {MAX_IMAG_RATIO} (L~ = {}, tJ = {})",
            a.size(),
            a.tj()
        )));
    }
    // + 0.0 turns -ln(1) = -0 into 0
    let s2 = -v.re.ln() + 0.0;
    let g = g_value(a);
    Ok(EntropyPoint {
        state: a.state(),
        sites: a.cut().sites(),
        la: a.cut().la(),
        tj: a.tj(),
        s2,
        perm_value: v,
        perm_method: p.method,
        perm_terms: p.terms,
        g,
        s_tilde: entropy_density_like_from_swap(a),
        lower_bound: volume_law_lower_bound(g, a.size()),
        s2_gaussian: None,
    })
}

/// Full pipeline for one time: `Z`, `A_Z`, permanent, and optionally the
/// Gaussian reference.
pub fn entropy_point(
    basis: &SpectralBasis,
    tj: f64,
    state: InitialState,
    cut: CutSpec,
    engine: Engine,
    opts: &PermanentOptions,
    gaussian: bool,
) -> Result<EntropyPoint> {
    let z = build_z_from_basis(basis, tj, state, cut)?;
    let mut point = renyi2(&build_swap_matrix(&z), engine, opts)?;
    if gaussian {
        point.s2_gaussian = Some(gaussian_renyi(&one_body_matrix_from_basis(basis, tj, state, cut)?, 2)?);
    }
    Ok(point)
}

/// `C_{j,l} = <b_j^dag b_l>(t)` for `j, l` in `A`:
/// `sum_{m occupied} conj(y_{m,j}) y_{m,l}`.
pub fn one_body_matrix(y: &Propagator, state: InitialState, cut: CutSpec) -> Result<ComplexMatrix> {
    let occ = state.occupied_sites(y.sites())?;
    if cut.sites() != y.sites() {
        return Err(Error::domain("cut and propagator disagree on L"));
    }
    Ok(ComplexMatrix::from_fn(cut.la(), |j, l| {
        occ.iter().map(|&m| y.get(m, j).conj() * y.get(m, l)).sum()
    }))
}

/// [`one_body_matrix`] from the spectral basis, forming only the occupied
/// rows and subsystem columns of the propagator.
pub fn one_body_matrix_from_basis(basis: &SpectralBasis, tj: f64, state: InitialState, cut: CutSpec) -> Result<ComplexMatrix> {
    if !(tj.is_finite() && tj >= 0.0) {
        return Err(Error::domain(format!("time must be finite and nonnegative, got tJ = {tj}")));
    }
    if cut.sites() != basis.sites() {
        return Err(Error::domain("cut and basis disagree on L"));
    }
    let occ = state.occupied_sites(basis.sites())?;
    let cols: Vec<usize> = (0..cut.la()).collect();
    let b = basis.propagator_block(tj, &occ, &cols);
    let c = b.adjoint() * &b;
    Ok(ComplexMatrix::from_faer(c.as_ref()))
}

/// Mode occupations `n_mu`, the eigenvalues of the one-body matrix, with
/// roundoff negatives clamped to zero.
pub fn mode_occupations(c: &ComplexMatrix) -> Result<Vec<f64>> {
    let herm = c.hermiticity_error();
    if herm > 1e-10 {
        return Err(Error::domain(format!("one-body matrix is not Hermitian (error {herm:e})")));
    }
    let ev = c.hermitian_eigenvalues()?;
    ev.into_iter()
        .map(|n| {
            if n < OCCUPATION_CLAMP {
                Err(Error::domain(format!("negative mode occupation {n:e}")))
            } else {
                Ok(n.max(0.0))
            }
        })
        .collect()
}

/// `S_alpha = 1/(alpha - 1) sum_mu ln[(n_mu + 1)^alpha - n_mu^alpha]` for
/// the Gaussian state with one-body matrix `c`.
pub fn gaussian_renyi(c: &ComplexMatrix, alpha: u32) -> Result<f64> {
    if alpha < 2 {
        return Err(Error::domain(format!("Renyi order must be an integer >= 2, got {alpha}")));
    }
    let a = alpha as i32;
    let s: f64 = mode_occupations(c)?
        .into_iter()
        .map(|n| ((n + 1.0).powi(a) - n.powi(a)).ln())
        .sum();
    Ok(s / (alpha - 1) as f64)
}

/// Average of `S_2^Gaussian` over the given times.
pub fn gaussian_time_average(basis: &SpectralBasis, state: InitialState, cut: CutSpec, times: &[f64]) -> Result<MeanEstimate> {
    let values = times
        .iter()
        .map(|&t| gaussian_renyi(&one_body_matrix_from_basis(basis, t, state, cut)?, 2))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanEstimate::of(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::build_z;
    use crate::single_particle::{propagator, solve_open_chain, LatticeSpec};

    fn basis(l: usize) -> SpectralBasis {
        solve_open_chain(LatticeSpec::unit(l).unwrap()).unwrap()
    }

    #[test]
    fn product_states_have_zero_entropy() {
        for state in [InitialState::Mi, InitialState::Cdw] {
            for l in [2, 4, 6, 10] {
                let p = entropy_point(&basis(l), 0.0, state, CutSpec::half(l).unwrap(), Engine::Bbfg, &PermanentOptions::default(), true)
                    .unwrap();
                assert_eq!(p.s2, 0.0);
                // a Fock state is not Gaussian: each filled mode in A gives ln 3
                let filled = state.occupied_sites(l).unwrap().iter().filter(|&&s| s < l / 2).count();
                assert!((p.s2_gaussian.unwrap() - filled as f64 * 3f64.ln()).abs() < 1e-13);
                assert_eq!(p.g, 1.0);
                assert_eq!(p.lower_bound, 0.0);
                p.check_bound().unwrap();
            }
        }
    }

    #[test]
    fn engines_agree_on_a_swap_matrix() {
        let b = basis(8);
        let cut = CutSpec::half(8).unwrap();
        let a = build_swap_matrix(&build_z(&propagator(&b, 1.1).unwrap(), InitialState::Cdw, cut).unwrap());
        let opts = PermanentOptions::default();
        let s: Vec<f64> = [Engine::Naive, Engine::Ryser, Engine::Bbfg, Engine::BbfgParallel { workers: 3 }]
            .iter()
            .map(|&e| renyi2(&a, e, &opts).unwrap().s2)
            .collect();
        for v in &s[1..] {
            assert!((v - s[0]).abs() < 1e-12);
        }
        assert!(s[0] > 0.0);
    }

    #[test]
    fn mi_one_body_matrix_is_identity() {
        for tj in [0.0, 0.6, 13.0] {
            let c = one_body_matrix_from_basis(&basis(10), tj, InitialState::Mi, CutSpec::half(10).unwrap()).unwrap();
            assert!(c.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-13);
            let s = gaussian_renyi(&c, 2).unwrap();
            assert!((s - 5.0 * 3f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn cdw_one_body_matrix() {
        let b = basis(8);
        let cut = CutSpec::half(8).unwrap();
        let c0 = one_body_matrix_from_basis(&b, 0.0, InitialState::Cdw, cut).unwrap();
        let want = ComplexMatrix::from_real(4, |j, l| if j == l && j % 2 == 1 { 1.0 } else { 0.0 });
        assert_eq!(c0, want);
        let y = propagator(&b, 2.2).unwrap();
        let c1 = one_body_matrix(&y, InitialState::Cdw, cut).unwrap();
        let c2 = one_body_matrix_from_basis(&b, 2.2, InitialState::Cdw, cut).unwrap();
        assert!(c1.max_abs_diff(&c2) < 1e-14);
        // particles in A are not conserved, but the trace is real and in [0, L_A]
        let tr = c1.trace();
        assert!(tr.im.abs() < 1e-14 && tr.re > 0.0 && tr.re < 4.0);
    }

    #[test]
    fn gaussian_renyi_domain() {
        let c = ComplexMatrix::identity(3);
        assert!(gaussian_renyi(&c, 1).is_err());
        assert!((gaussian_renyi(&c, 3).unwrap() - 3.0 * 7f64.ln() / 2.0).abs() < 1e-14);
        assert_eq!(gaussian_renyi(&ComplexMatrix::zeros(3), 2).unwrap(), 0.0);
        let bad = ComplexMatrix::from_real(2, |j, l| if j == l { -1e-3 } else { 0.0 });
        assert!(gaussian_renyi(&bad, 2).is_err());
        let tiny = ComplexMatrix::from_real(2, |j, l| if j == l { -1e-12 } else { 0.0 });
        assert_eq!(gaussian_renyi(&tiny, 2).unwrap(), 0.0);
    }

    #[test]
    fn bound_violation_is_reported() {
        let b = basis(4);
        let mut p = entropy_point(&b, 0.8, InitialState::Mi, CutSpec::half(4).unwrap(), Engine::Bbfg, &PermanentOptions::default(), false)
            .unwrap();
        p.check_bound().unwrap();
        p.s2 = p.lower_bound / 2.0;
        assert!(matches!(p.check_bound(), Err(Error::BoundViolation { .. })));
    }
}
