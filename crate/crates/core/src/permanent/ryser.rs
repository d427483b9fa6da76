//! Ryser's inclusion-exclusion formula
//!
//! `perm A = (-1)^M sum_{S subset cols} (-1)^{|S|} prod_i sum_{j in S} a_{i,j}`
//!
//! with the nonempty column subsets visited in Gray-code order, so each step
//! adds or removes one column from the `M` running row sums.

use super::accum::{scale_pow2, Accumulator};
use crate::matrix::{ComplexMatrix, C64};

const RESEED_INTERVAL: u64 = 1 << 20;

fn row_sums(a: &[C64], m: usize, subset: u64, sums: &mut [C64]) {
    for (i, s) in sums.iter_mut().enumerate() {
        *s = (0..m).filter(|&j| subset >> j & 1 == 1).map(|j| a[i * m + j]).sum();
    }
}

pub(crate) fn ryser<A: Accumulator>(a: &ComplexMatrix) -> C64 {
    let m = a.dim();
    // exact power-of-two row scaling keeps the products in range
    let mut log2_scale = 0i64;
    let mut scaled = Vec::with_capacity(m * m);
    for row in a.rows() {
        let max = row.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
        let e = if max > 0.0 && max.is_finite() { max.log2().floor() as i64 + 1 } else { 0 };
        log2_scale += e;
        scaled.extend(row.iter().map(|z| C64::new(scale_pow2(z.re, -e), scale_pow2(z.im, -e))));
    }
    let mut sums = vec![C64::new(0.0, 0.0); m];
    let mut acc = A::default();
    let total = 1u64 << m;
    for k in 1..total {
        let g = k ^ (k >> 1);
        if k % RESEED_INTERVAL == 0 {
            row_sums(&scaled, m, g, &mut sums);
        } else {
            let j = k.trailing_zeros() as usize;
            if g >> j & 1 == 1 {
                for (i, s) in sums.iter_mut().enumerate() {
                    *s += scaled[i * m + j];
                }
            } else {
                for (i, s) in sums.iter_mut().enumerate() {
                    *s -= scaled[i * m + j];
                }
            }
        }
        let p: C64 = sums.iter().product();
        if g.count_ones() % 2 == 1 {
            acc.add(-p.re, -p.im);
        } else {
            acc.add(p.re, p.im);
        }
    }
    let v = acc.value();
    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
    C64::new(sign * scale_pow2(v.re, log2_scale), sign * scale_pow2(v.im, log2_scale))
}

/// Number of nonempty column subsets, `2^M - 1`.
pub(crate) fn ryser_terms(m: usize) -> u64 {
    (1u64 << m) - 1
}
