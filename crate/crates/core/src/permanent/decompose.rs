//! Splitting a matrix along the connected components of its nonzero
//! pattern. If the rows and columns fall into groups such that every
//! nonzero entry joins a row and a column of the same group, the permanent
//! is the product of the group permanents; a group with more rows than
//! columns admits no permutation at all and forces the permanent to zero.

use super::{Method, PermanentResult};
use crate::error::Result;
use crate::matrix::{ComplexMatrix, C64};

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Rows and columns of each component, in order of first row.
fn components(a: &ComplexMatrix) -> Vec<(Vec<usize>, Vec<usize>)> {
    let m = a.dim();
    let mut sets = DisjointSets::new(2 * m);
    for i in 0..m {
        for j in 0..m {
            if a[(i, j)] != C64::new(0.0, 0.0) {
                sets.union(i, m + j);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    for node in 0..2 * m {
        let root = sets.find(node);
        let idx = match groups.iter().position(|g| g.0 == root) {
            Some(i) => i,
            None => {
                groups.push((root, Vec::new(), Vec::new()));
                groups.len() - 1
            }
        };
        if node < m {
            groups[idx].1.push(node);
        } else {
            groups[idx].2.push(node - m);
        }
    }
    groups.into_iter().map(|(_, r, c)| (r, c)).collect()
}

pub(crate) fn by_components(
    a: &ComplexMatrix,
    method: Method,
    opts: &super::PermanentOptions,
    mut direct: impl FnMut(&ComplexMatrix) -> Result<PermanentResult>,
) -> Result<PermanentResult> {
    let groups = components(a);
    if groups.len() == 1 {
        return direct(a);
    }
    let mut out = PermanentResult {
        value: C64::new(1.0, 0.0),
        method,
        terms: 0,
        accumulation: opts.accumulation,
        rescaled_terms: 0,
        components: groups.len(),
    };
    if groups.iter().any(|(r, c)| r.len() != c.len()) {
        out.value = C64::new(0.0, 0.0);
        return Ok(out);
    }
    for (rows, cols) in &groups {
        if rows.len() == 1 {
            out.value *= a[(rows[0], cols[0])];
            out.terms += 1;
            continue;
        }
        let block = ComplexMatrix::from_fn(rows.len(), |i, j| a[(rows[i], cols[j])]);
        let r = direct(&block)?;
        out.value *= r.value;
        out.terms += r.terms;
        out.rescaled_terms += r.rescaled_terms;
    }
    Ok(out)
}
