use num_complex::Complex64;

/// Running sum of complex terms, monomorphized into the enumeration kernels.
pub(crate) trait Accumulator: Default + Copy + Send {
    fn add(&mut self, re: f64, im: f64);
    /// Folds another partial sum into this one.
    fn merge(&mut self, other: &Self);
    fn value(&self) -> Complex64;
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct PlainSum {
    re: f64,
    im: f64,
}

impl Accumulator for PlainSum {
    #[inline(always)]
    fn add(&mut self, re: f64, im: f64) {
        self.re += re;
        self.im += im;
    }

    fn merge(&mut self, other: &Self) {
        self.add(other.re, other.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Compensated summation, per component. Each addition is split exactly
/// into a rounded sum and its rounding error, and the errors are summed
/// separately, so many O(1) terms cancelling down to a small result keep
/// their accuracy.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    re: f64,
    im: f64,
    c_re: f64,
    c_im: f64,
}

#[inline(always)]
fn two_sum(sum: &mut f64, comp: &mut f64, x: f64) {
    // Knuth's branch-free two-sum: t + err == sum + x exactly
    let t = *sum + x;
    let bp = t - *sum;
    *comp += (*sum - (t - bp)) + (x - bp);
    *sum = t;
}

impl Accumulator for CompensatedSum {
    #[inline(always)]
    fn add(&mut self, re: f64, im: f64) {
        two_sum(&mut self.re, &mut self.c_re, re);
        two_sum(&mut self.im, &mut self.c_im, im);
    }

    fn merge(&mut self, other: &Self) {
        self.add(other.re, other.im);
        self.c_re += other.c_re;
        self.c_im += other.c_im;
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.c_re, self.im + self.c_im)
    }
}

/// `v * 2^e` without forming `2^e` (which may overflow on its own).
pub(crate) fn scale_pow2(mut v: f64, mut e: i64) -> f64 {
    const STEP: i64 = 1000;
    while e > STEP {
        v *= 2f64.powi(STEP as i32);
        e -= STEP;
    }
    while e < -STEP {
        v *= 2f64.powi(-STEP as i32);
        e += STEP;
    }
    v * 2f64.powi(e as i32)
}
