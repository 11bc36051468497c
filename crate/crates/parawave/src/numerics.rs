//! Small numerical utilities shared across the crate: compensated
//! summation, grid spacing helpers, and bracketed root finding.

/// Kahan compensated accumulator.
///
/// All norm and energy reductions in this crate run through this type in a
/// fixed (grid) order, so results are identical regardless of how the
/// surrounding computation is parallelized.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }

    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

/// `n` points from `lo` to `hi` inclusive. `n == 1` yields `[lo]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + k as f64 * step
            }
        })
        .collect()
}

/// `n` log-uniform points from `lo` to `hi` inclusive; requires `lo > 0`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / (n - 1) as f64;
    (0..n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n - 1 {
                hi
            } else {
                (llo + k as f64 * step).exp()
            }
        })
        .collect()
}

/// Bisection on a bracketing interval. `f(lo)` and `f(hi)` must have
/// opposite (nonzero) signs. Runs until the midpoint stops moving or
/// `|f(mid)| <= f_tol`, whichever comes first.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, f_tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 || fmid.abs() <= f_tol {
            return mid;
        }
        if (flo > 0.0) == (fmid > 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
