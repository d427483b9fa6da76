//! Balasubramanian-Bax-Franklin-Glynn expansion
//!
//! `perm A = 2^{-(M-1)} sum_delta (prod_m delta_m) prod_l sum_j delta_j a_{j,l}`
//!
//! over `delta in {+1,-1}^M` with `delta_1 = +1`. The `2^{M-1}` sign vectors
//! are visited in reflected Gray-code order: step `k` flips component
//! `trailing_zeros(k) + 1`, so the `M` column sums need one vector update per
//! term and the sign of the term is `(-1)^k`.
//!
//! Rows and then columns are pre-scaled by exact powers of two so that
//! typical terms are O(1) whatever the magnitude of the input.

use std::thread;

use super::accum::{scale_pow2, Accumulator};
use crate::matrix::{ComplexMatrix, C64};

/// Lane count of the product reduction. Column-sum vectors are padded with
/// ones to a multiple of this, and kernels are monomorphized per block count.
const LANES: usize = 8;

/// `|p|^2` range in which the plain product is trusted (`|p|` in
/// `[1e-150, 1e150]`).
const NORM_SQR_LOW: f64 = 1e-300;
const NORM_SQR_HIGH: f64 = 1e300;

/// Column sums are recomputed from scratch at Gray indices that are
/// multiples of this, bounding the random-walk drift of the running sums.
const RESEED_INTERVAL: u64 = 1 << 20;

/// Row-rescaled copy of the input matrix, stored as blocks of `LANES`
/// columns. Row `j` occupies blocks `j * blocks .. (j + 1) * blocks`;
/// padding columns are zero.
pub(crate) struct Prepared {
    m: usize,
    blocks: usize,
    rows_re: Vec<[f64; LANES]>,
    rows_im: Vec<[f64; LANES]>,
    /// Gray update rows: row `2j` holds `+2 a_j`, row `2j + 1` holds `-2 a_j`.
    step_re: Vec<[f64; LANES]>,
    step_im: Vec<[f64; LANES]>,
    /// `perm(A) = 2^log2_scale * perm(prepared rows)`.
    log2_scale: i64,
}

/// Exponent `e` with `max * 2^-e` in `[0.5, 1)`, or 0 for an all-zero line.
fn pow2_exponent(max: f64) -> i64 {
    if max > 0.0 && max.is_finite() {
        max.log2().floor() as i64 + 1
    } else {
        0
    }
}

impl Prepared {
    pub(crate) fn new(a: &ComplexMatrix) -> Self {
        let m = a.dim();
        let blocks = m.div_ceil(LANES);
        // rows first, then columns, both by exact powers of two
        let row_e: Vec<i64> = a
            .rows()
            .map(|row| pow2_exponent(row.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max)))
            .collect();
        let scaled = |j: usize, l: usize, col_e: i64| {
            let z = a[(j, l)];
            let e = -row_e[j] - col_e;
            (scale_pow2(z.re, e), scale_pow2(z.im, e))
        };
        let col_e: Vec<i64> = (0..m)
            .map(|l| {
                let max = (0..m)
                    .map(|j| {
                        let (re, im) = scaled(j, l, 0);
                        re.abs().max(im.abs())
                    })
                    .fold(0.0, f64::max);
                pow2_exponent(max)
            })
            .collect();
        let mut rows_re = vec![[0.0; LANES]; m * blocks];
        let mut rows_im = vec![[0.0; LANES]; m * blocks];
        for j in 0..m {
            for l in 0..m {
                let (re, im) = scaled(j, l, col_e[l]);
                rows_re[j * blocks + l / LANES][l % LANES] = re;
                rows_im[j * blocks + l / LANES][l % LANES] = im;
            }
        }
        let step = |v: &Vec<[f64; LANES]>| {
            let mut out = Vec::with_capacity(2 * v.len());
            for row in v.chunks_exact(blocks) {
                out.extend(row.iter().map(|b| b.map(|x| 2.0 * x)));
                out.extend(row.iter().map(|b| b.map(|x| -2.0 * x)));
            }
            out
        };
        let step_re = step(&rows_re);
        let step_im = step(&rows_im);
        let log2_scale = row_e.iter().sum::<i64>() + col_e.iter().sum::<i64>();
        Self { m, blocks, rows_re, rows_im, step_re, step_im, log2_scale }
    }

    pub(crate) fn terms(&self) -> u64 {
        1u64 << (self.m - 1)
    }
}

pub(crate) struct ChunkSum<A> {
    pub(crate) acc: A,
    pub(crate) rescaled: u64,
}

#[inline(always)]
fn gray(k: u64) -> u64 {
    k ^ (k >> 1)
}

/// Product of the padded column sums with `LANES` independent partial
/// products, then a tree reduction across lanes.
#[inline(always)]
fn lane_product<const NB: usize>(sre: &[[f64; LANES]; NB], sim: &[[f64; LANES]; NB]) -> (f64, f64) {
    let mut pr = sre[0];
    let mut pi = sim[0];
    for b in 1..NB {
        for t in 0..LANES {
            let r = pr[t] * sre[b][t] - pi[t] * sim[b][t];
            let i = pr[t] * sim[b][t] + pi[t] * sre[b][t];
            pr[t] = r;
            pi[t] = i;
        }
    }
    let mut w = LANES;
    while w > 1 {
        w /= 2;
        for t in 0..w {
            let r = pr[t] * pr[t + w] - pi[t] * pi[t + w];
            let i = pr[t] * pi[t + w] + pi[t] * pr[t + w];
            pr[t] = r;
            pi[t] = i;
        }
    }
    (pr[0], pi[0])
}

/// Product of the first `m` column sums with a tracked binary exponent.
#[cold]
#[inline(never)]
pub(crate) fn scaled_product(sre: &[f64], sim: &[f64], m: usize) -> (f64, f64) {
    let (mut mr, mut mi, mut e) = (1.0f64, 0.0f64, 0i64);
    for l in 0..m {
        let r = mr * sre[l] - mi * sim[l];
        let i = mr * sim[l] + mi * sre[l];
        mr = r;
        mi = i;
        let mag = mr.abs().max(mi.abs());
        if mag == 0.0 {
            return (0.0, 0.0);
        }
        if !(2f64.powi(-100)..=2f64.powi(100)).contains(&mag) {
            let k = mag.log2().floor() as i64;
            mr = scale_pow2(mr, -k);
            mi = scale_pow2(mi, -k);
            e += k;
        }
    }
    (scale_pow2(mr, e), scale_pow2(mi, e))
}

#[inline(always)]
fn accumulate<A: Accumulator, const NB: usize>(
    sre: &[[f64; LANES]; NB],
    sim: &[[f64; LANES]; NB],
    m: usize,
    negative: bool,
    acc: &mut A,
    rescaled: &mut u64,
) {
    let (mut re, mut im) = lane_product(sre, sim);
    let n2 = re * re + im * im;
    if !(NORM_SQR_LOW..=NORM_SQR_HIGH).contains(&n2) {
        (re, im) = scaled_product(sre.as_flattened(), sim.as_flattened(), m);
        *rescaled += 1;
    }
    if negative {
        acc.add(-re, -im);
    } else {
        acc.add(re, im);
    }
}

#[inline(always)]
fn block_rows<const NB: usize>(v: &[[f64; LANES]], row: usize) -> &[[f64; LANES]; NB] {
    v[row * NB..row * NB + NB].try_into().expect("block row length")
}

#[inline(always)]
fn seed<const NB: usize>(p: &Prepared, k: u64, sre: &mut [[f64; LANES]; NB], sim: &mut [[f64; LANES]; NB]) {
    *sre = [[0.0; LANES]; NB];
    *sim = [[0.0; LANES]; NB];
    let g = gray(k);
    for j in 0..p.m {
        let sign = if j > 0 && (g >> (j - 1)) & 1 == 1 { -1.0 } else { 1.0 };
        let rr = block_rows::<NB>(&p.rows_re, j);
        let ri = block_rows::<NB>(&p.rows_im, j);
        for b in 0..NB {
            for t in 0..LANES {
                sre[b][t] += sign * rr[b][t];
                sim[b][t] += sign * ri[b][t];
            }
        }
    }
    for l in p.m..NB * LANES {
        sre[l / LANES][l % LANES] = 1.0;
    }
}

#[inline(always)]
fn chunk_body<A: Accumulator, const NB: usize>(p: &Prepared, start: u64, end: u64) -> ChunkSum<A> {
    let m = p.m;
    let mut sre = [[0.0; LANES]; NB];
    let mut sim = [[0.0; LANES]; NB];
    let mut acc = A::default();
    let mut rescaled = 0u64;
    if start >= end {
        return ChunkSum { acc, rescaled };
    }
    seed(p, start, &mut sre, &mut sim);
    accumulate(&sre, &sim, m, start & 1 == 1, &mut acc, &mut rescaled);
    for k in start + 1..end {
        if k % RESEED_INTERVAL == 0 {
            seed(p, k, &mut sre, &mut sim);
        } else {
            let bit = k.trailing_zeros() as usize;
            let row = 2 * (bit + 1) + ((gray(k) >> bit) & 1) as usize;
            let tr = block_rows::<NB>(&p.step_re, row);
            let ti = block_rows::<NB>(&p.step_im, row);
            for b in 0..NB {
                for t in 0..LANES {
                    sre[b][t] += tr[b][t];
                    sim[b][t] += ti[b][t];
                }
            }
        }
        accumulate(&sre, &sim, m, k & 1 == 1, &mut acc, &mut rescaled);
    }
    ChunkSum { acc, rescaled }
}

macro_rules! by_blocks {
    ($blocks:expr, $($f:ident)::+ => <$a:ty>($($arg:expr),*)) => {
        match $blocks {
            1 => $($f)::+::<$a, 1>($($arg),*),
            2 => $($f)::+::<$a, 2>($($arg),*),
            3 => $($f)::+::<$a, 3>($($arg),*),
            4 => $($f)::+::<$a, 4>($($arg),*),
            5 => $($f)::+::<$a, 5>($($arg),*),
            6 => $($f)::+::<$a, 6>($($arg),*),
            7 => $($f)::+::<$a, 7>($($arg),*),
            8 => $($f)::+::<$a, 8>($($arg),*),
            b => unreachable!("{b} lane blocks exceed the size guard"),
        }
    };
}

fn chunk_portable<A: Accumulator>(p: &Prepared, start: u64, end: u64) -> ChunkSum<A> {
    by_blocks!(p.blocks, chunk_body => <A>(p, start, end))
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn chunk_avx2<A: Accumulator>(p: &Prepared, start: u64, end: u64) -> ChunkSum<A> {
    by_blocks!(p.blocks, x86::chunk => <A>(p, start, end))
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    //! Hand-vectorized kernel: each block of `LANES` column sums is two
    //! 256-bit registers for the real parts and two for the imaginary parts.

    use std::arch::x86_64::*;

    use super::{block_rows, gray, scaled_product, seed, Accumulator, ChunkSum, Prepared, LANES, NORM_SQR_HIGH, NORM_SQR_LOW, RESEED_INTERVAL};

    type Block = [__m256d; 2];

    #[inline(always)]
    unsafe fn cmul(ar: __m256d, ai: __m256d, br: __m256d, bi: __m256d) -> (__m256d, __m256d) {
        (
            _mm256_fmsub_pd(ar, br, _mm256_mul_pd(ai, bi)),
            _mm256_fmadd_pd(ar, bi, _mm256_mul_pd(ai, br)),
        )
    }

    #[inline(always)]
    unsafe fn load(b: &[f64; LANES]) -> Block {
        [_mm256_loadu_pd(b.as_ptr()), _mm256_loadu_pd(b.as_ptr().add(4))]
    }

    #[inline(always)]
    unsafe fn store(v: &Block, out: &mut [f64; LANES]) {
        _mm256_storeu_pd(out.as_mut_ptr(), v[0]);
        _mm256_storeu_pd(out.as_mut_ptr().add(4), v[1]);
    }

    #[inline(always)]
    unsafe fn product<const NB: usize>(sre: &[Block; NB], sim: &[Block; NB]) -> (f64, f64) {
        // pairwise tree over the 2 * NB registers keeps the dependency
        // chain at log2(2 * NB) multiplications
        let mut vr = [_mm256_setzero_pd(); 16];
        let mut vi = [_mm256_setzero_pd(); 16];
        for b in 0..NB {
            vr[2 * b] = sre[b][0];
            vr[2 * b + 1] = sre[b][1];
            vi[2 * b] = sim[b][0];
            vi[2 * b + 1] = sim[b][1];
        }
        let mut n = 2 * NB;
        while n > 1 {
            let h = n.div_ceil(2);
            for t in 0..n - h {
                (vr[t], vi[t]) = cmul(vr[t], vi[t], vr[t + h], vi[t + h]);
            }
            n = h;
        }
        let (r, i) = (vr[0], vi[0]);
        let (rl, rh) = (_mm256_castpd256_pd128(r), _mm256_extractf128_pd::<1>(r));
        let (il, ih) = (_mm256_castpd256_pd128(i), _mm256_extractf128_pd::<1>(i));
        let r2 = _mm_sub_pd(_mm_mul_pd(rl, rh), _mm_mul_pd(il, ih));
        let i2 = _mm_add_pd(_mm_mul_pd(rl, ih), _mm_mul_pd(il, rh));
        let (a0, a1) = (_mm_cvtsd_f64(r2), _mm_cvtsd_f64(_mm_unpackhi_pd(r2, r2)));
        let (c0, c1) = (_mm_cvtsd_f64(i2), _mm_cvtsd_f64(_mm_unpackhi_pd(i2, i2)));
        (a0 * a1 - c0 * c1, a0 * c1 + c0 * a1)
    }

    #[inline(always)]
    unsafe fn reseed<const NB: usize>(p: &Prepared, k: u64, sre: &mut [Block; NB], sim: &mut [Block; NB]) {
        let mut re = [[0.0; LANES]; NB];
        let mut im = [[0.0; LANES]; NB];
        seed(p, k, &mut re, &mut im);
        for b in 0..NB {
            sre[b] = load(&re[b]);
            sim[b] = load(&im[b]);
        }
    }

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn chunk<A: Accumulator, const NB: usize>(p: &Prepared, start: u64, end: u64) -> ChunkSum<A> {
        let mut acc = A::default();
        let mut rescaled = 0u64;
        let mut sre = [[_mm256_setzero_pd(); 2]; NB];
        let mut sim = [[_mm256_setzero_pd(); 2]; NB];
        for k in start..end {
            if k == start || k % RESEED_INTERVAL == 0 {
                reseed(p, k, &mut sre, &mut sim);
            } else {
                let bit = k.trailing_zeros() as usize;
                // even rows of the step table add, odd rows subtract
                let row = 2 * (bit + 1) + ((gray(k) >> bit) & 1) as usize;
                let tr = block_rows::<NB>(&p.step_re, row);
                let ti = block_rows::<NB>(&p.step_im, row);
                for b in 0..NB {
                    let (dr, di) = (load(&tr[b]), load(&ti[b]));
                    for h in 0..2 {
                        sre[b][h] = _mm256_add_pd(sre[b][h], dr[h]);
                        sim[b][h] = _mm256_add_pd(sim[b][h], di[h]);
                    }
                }
            }
            let (mut re, mut im) = product(&sre, &sim);
            let n2 = re * re + im * im;
            if !(NORM_SQR_LOW..=NORM_SQR_HIGH).contains(&n2) {
                let mut fr = [[0.0; LANES]; NB];
                let mut fi = [[0.0; LANES]; NB];
                for b in 0..NB {
                    store(&sre[b], &mut fr[b]);
                    store(&sim[b], &mut fi[b]);
                }
                (re, im) = scaled_product(fr.as_flattened(), fi.as_flattened(), p.m);
                rescaled += 1;
            }
            // the term sign (-1)^k as a sign-bit flip
            let odd = (k & 1) << 63;
            acc.add(f64::from_bits(re.to_bits() ^ odd), f64::from_bits(im.to_bits() ^ odd));
        }
        ChunkSum { acc, rescaled }
    }
}

/// Sums the Gray-ordered terms with indices in `[start, end)`.
pub(crate) fn run_chunk<A: Accumulator>(p: &Prepared, start: u64, end: u64) -> ChunkSum<A> {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
            // SAFETY: the required CPU features were detected at runtime.
            return unsafe { chunk_avx2(p, start, end) };
        }
    }
    chunk_portable(p, start, end)
}

pub(crate) struct BbfgOutput {
    pub(crate) value: C64,
    pub(crate) terms: u64,
    pub(crate) rescaled: u64,
}

/// Splits the Gray sequence into `workers` contiguous chunks, each seeded
/// independently, and combines the partial sums in chunk order.
pub(crate) fn bbfg<A: Accumulator>(a: &ComplexMatrix, workers: usize) -> BbfgOutput {
    let p = Prepared::new(a);
    let total = p.terms();
    let workers = (workers.max(1) as u64).min(total) as usize;
    let bounds: Vec<u64> = (0..=workers)
        .map(|i| (total as u128 * i as u128 / workers as u128) as u64)
        .collect();
    let parts: Vec<ChunkSum<A>> = if workers == 1 {
        vec![run_chunk(&p, 0, total)]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = bounds
                .windows(2)
                .map(|w| {
                    let (lo, hi) = (w[0], w[1]);
                    let p = &p;
                    s.spawn(move || run_chunk::<A>(p, lo, hi))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("permanent worker panicked")).collect()
        })
    };
    let mut acc = A::default();
    let mut rescaled = 0;
    for part in &parts {
        acc.merge(&part.acc);
        rescaled += part.rescaled;
    }
    let exp = p.log2_scale - (p.m as i64 - 1);
    let v = acc.value();
    BbfgOutput {
        value: C64::new(scale_pow2(v.re, exp), scale_pow2(v.im, exp)),
        terms: total,
        rescaled,
    }
}
