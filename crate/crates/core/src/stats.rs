//! Small descriptive-statistics helpers shared across modules.

use crate::Scalar;

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    xs.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize_lossy(xs.len())
}

/// Sample variance with divisor `n - 1`; NaN for fewer than two values.
pub fn sample_variance<T: Scalar>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::nan();
    }
    let m = mean(xs);
    let ss = xs.iter().fold(T::zero(), |a, &x| a + (x - m) * (x - m));
    ss / T::from_usize_lossy(xs.len() - 1)
}

/// True when every value equals the first one.
pub fn is_constant<T: Scalar>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

/// Pearson correlation, `None` when either input has zero variance.
pub fn pearson<T: Scalar>(a: &[T], b: &[T]) -> Option<T> {
    assert_eq!(a.len(), b.len(), "pearson inputs differ in length");
    if a.len() < 2 || is_constant(a) || is_constant(b) {
        return None;
    }
    let ma = mean(a);
    let mb = mean(b);
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == T::zero() || sbb == T::zero() {
        return None;
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    Some(r.max(-T::one()).min(T::one()))
}

/// Percentile with linear interpolation between order statistics
/// (position `(n - 1) * q` in the sorted sample, `q` in `[0, 1]`).
pub fn percentile_sorted<T: Scalar>(sorted: &[T], q: T) -> T {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let h = (T::from_usize_lossy(sorted.len() - 1)) * q;
    let lo = h.floor();
    let lo_idx = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let hi_idx = (lo_idx + 1).min(sorted.len() - 1);
    let frac = h - lo;
    sorted[lo_idx] + frac * (sorted[hi_idx] - sorted[lo_idx])
}
