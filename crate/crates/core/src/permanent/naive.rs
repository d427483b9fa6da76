//! Definitional sum over permutations. Used as the oracle for the fast
//! methods, so it stays as plain as possible.

use super::accum::Accumulator;
use crate::matrix::{ComplexMatrix, C64};

fn visit<A: Accumulator>(a: &ComplexMatrix, row: usize, used: u64, partial: C64, acc: &mut A) {
    let m = a.dim();
    if row == m {
        acc.add(partial.re, partial.im);
        return;
    }
    for col in 0..m {
        if used & (1 << col) == 0 {
            visit(a, row + 1, used | (1 << col), partial * a[(row, col)], acc);
        }
    }
}

pub(crate) fn naive<A: Accumulator>(a: &ComplexMatrix) -> C64 {
    let mut acc = A::default();
    visit(a, 0, 0, C64::new(1.0, 0.0), &mut acc);
    acc.value()
}

/// `M!`, the number of permutation products.
pub(crate) fn naive_terms(m: usize) -> u64 {
    (1..=m as u64).product()
}
