use crate::error::{Error, Result};

/// Largest fixed-`N` Hilbert space the oracle will enumerate.
pub const MAX_BASIS_SIZE: usize = 5_000_000;

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Number of ways to put `n` bosons on `l` sites.
pub fn sector_size(l: usize, n: usize) -> u64 {
    if l == 0 {
        return (n == 0) as u64;
    }
    binomial((n + l - 1) as u64, n as u64)
}

/// All occupation vectors of `N` bosons on `L` sites, in descending
/// lexicographic order: `(N, 0, ..)` first, `(.., 0, N)` last.
#[derive(Clone, Debug)]
pub struct FockBasis {
    sites: usize,
    particles: usize,
    occ: Vec<u8>,
}

impl FockBasis {
    pub fn new(sites: usize, particles: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::domain("a Fock basis needs at least one site"));
        }
        if particles > u8::MAX as usize {
            return Err(Error::domain(format!("at most 255 particles, got {particles}")));
        }
        let dim = sector_size(sites, particles);
        if dim > MAX_BASIS_SIZE as u64 {
            return Err(Error::SizeGuard { what: "Fock basis dimension", got: dim as usize, limit: MAX_BASIS_SIZE });
        }
        let mut occ = Vec::with_capacity(dim as usize * sites);
        let mut cur = vec![0u8; sites];
        cur[0] = particles as u8;
        loop {
            occ.extend_from_slice(&cur);
            if !next_descending(&mut cur) {
                break;
            }
        }
        debug_assert_eq!(occ.len(), dim as usize * sites);
        Ok(Self { sites, particles, occ })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.occ.len() / self.sites
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.occ[i * self.sites..(i + 1) * self.sites]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.occ.chunks_exact(self.sites)
    }

    /// Position of an occupation vector, or `None` if it is not in this
    /// sector.
    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        if occ.len() != self.sites || occ.iter().map(|&n| n as usize).sum::<usize>() != self.particles {
            return None;
        }
        Some(rank(occ))
    }
}

/// Steps to the next vector in descending lexicographic order.
fn next_descending(cur: &mut [u8]) -> bool {
    let l = cur.len();
    // rightmost nonzero entry that is not the last site
    let Some(i) = (0..l - 1).rev().find(|&i| cur[i] > 0) else {
        return false;
    };
    let tail: u8 = cur[i + 1..].iter().sum();
    cur[i] -= 1;
    cur[i + 1..].fill(0);
    cur[i + 1] = tail + 1;
    true
}

/// Rank of `occ` among vectors with the same length and total, in
/// descending lexicographic order.
pub(crate) fn rank(occ: &[u8]) -> usize {
    let l = occ.len();
    let mut left: usize = occ.iter().map(|&n| n as usize).sum();
    let mut r = 0u64;
    for (j, &n) in occ[..l.saturating_sub(1)].iter().enumerate() {
        let n = n as usize;
        // vectors that agree up to j and put more than n bosons on site j
        let rest = l - j - 1;
        for v in n + 1..=left {
            r += sector_size(rest, left - v);
        }
        left -= n;
    }
    r as usize
}
