//! One-dimensional searches used by the quality engine and the solvers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`. Returns `(x, f(x))` for the best point seen.
pub fn golden_section_min<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    if hi < lo {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Smallest `x` in `[lo, hi]` with `pred(x)`, assuming `pred(lo)` is false, `pred(hi)`
/// is true and the predicate is monotone. Returns the final bracket and evaluation count.
pub fn bisect_threshold<P>(mut pred: P, mut lo: f64, mut hi: f64, tol: f64) -> ((f64, f64), usize)
where
    P: FnMut(f64) -> bool,
{
    let mut evaluations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ((lo, hi), evaluations)
}
