//! Random-state reference values.

use quench_renyi::correlations::CutSpec;
use quench_renyi::ed::{page_value, FockBasis};

/// One particle on two sites: `|a|^2` of a random state is uniform on
/// `[0, 1]`, so the mean of `-ln(u^2 + (1 - u)^2)` is `2 - pi/2`.
#[test]
fn one_particle_on_two_sites_matches_the_integral() {
    let basis = FockBasis::new(2, 1).unwrap();
    let p = page_value(&basis, CutSpec::new(2, 1).unwrap(), 20_000, 1).unwrap();
    let want = 2.0 - std::f64::consts::FRAC_PI_2;
    assert!((p.mean - want).abs() < 4.0 * p.stderr, "{} +- {} vs {want}", p.mean, p.stderr);
    assert!(p.stderr < 3e-3);
}

#[test]
fn standard_error_shrinks_as_one_over_root_samples() {
    let basis = FockBasis::new(4, 4).unwrap();
    let cut = CutSpec::half(4).unwrap();
    let small = page_value(&basis, cut, 256, 3).unwrap();
    let large = page_value(&basis, cut, 4096, 3).unwrap();
    let ratio = large.stderr / small.stderr;
    assert!((ratio - 0.25).abs() < 0.25 * 0.3, "{ratio}");
    let sigma = (small.stderr.powi(2) + large.stderr.powi(2)).sqrt();
    assert!((small.mean - large.mean).abs() < 4.0 * sigma);
    // random states sit far above a typical product state and below ln(dim A)
    assert!(large.mean > 1.0 && large.mean < (15f64).ln());
}
