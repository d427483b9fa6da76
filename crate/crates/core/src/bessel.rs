//! Integer-order Bessel functions of the first kind.
//!
//! `J_n(x)` is evaluated by Miller's downward recurrence
//! `J_{k-1} = (2k/x) J_k - J_{k+1}`, started well above both `n` and `x`
//! and normalized with `J_0 + 2 sum_k J_{2k} = 1`.

const RESCALE_ABOVE: f64 = 1e250;

/// Starting order for the downward recurrence. The recurrence is stable
/// downward and the spurious start values decay faster than any power once
/// the start lies a few `x^{1/3}` above the turning point.
fn start_order(nmax: usize, x: f64) -> usize {
    let top = (nmax as f64).max(x);
    let m = top + 40.0 + 8.0 * top.cbrt() + (20.0 * top).sqrt();
    let m = m.ceil() as usize;
    m + (m % 2)
}

/// `J_0(x), J_1(x), ..., J_nmax(x)` for `x >= 0`.
pub fn bessel_j_table(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j_table needs finite x >= 0, got {x}");
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = start_order(nmax, x);
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k, arbitrary tiny seed
    let mut norm = 0.0; // accumulates J_0 + 2 sum J_2k, seed-scaled
    for k in (1..=start).rev() {
        if k <= nmax {
            out[k] = j_cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * j_cur;
        }
        let j_prev = (2.0 * k as f64 / x) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            j_cur *= s;
            j_next *= s;
            norm *= s;
            for v in out.iter_mut().skip(k) {
                *v *= s;
            }
        }
    }
    // j_cur now holds J_0
    out[0] = j_cur;
    norm += j_cur;
    for v in &mut out {
        *v /= norm;
    }
    out
}

/// `J_n(x)` for integer `n` (either sign) and finite `x` (either sign).
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let v = bessel_j_table(order, x.abs())[order];
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
    let flips = (n < 0) as u32 + (x < 0.0) as u32;
    if order % 2 == 1 && flips % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `(x/2)^|n| / |n|!`, the elementary bound on `|J_n(x)|` for `x >= 0`.
pub fn bessel_power_bound(n: i64, x: f64) -> f64 {
    let n = n.unsigned_abs();
    if n == 0 {
        return 1.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    (n as f64 * (x / 2.0).ln() - log_fact).exp()
}
