use crate::scalar::Real;

/// Outcome of a bracketing root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket<T> {
    pub root: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops when `|f| < f_tol` or the bracket is narrower than `x_tol`.
pub fn bisect_root<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    mut lo: T,
    mut hi: T,
    f_tol: T,
    x_tol: T,
    max_iter: usize,
) -> RootBracket<T> {
    let two = T::lit(2.0);
    let mut f_lo = f(lo);
    for it in 1..=max_iter {
        let mid = lo + (hi - lo) / two;
        let f_mid = f(mid);
        if f_mid.abs() < f_tol || (hi - lo) < x_tol {
            return RootBracket {
                root: mid,
                iterations: it,
                converged: true,
            };
        }
        if (f_mid > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    RootBracket {
        root: lo + (hi - lo) / two,
        iterations: max_iter,
        converged: false,
    }
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Returns `(argmax, max, iterations)`.
pub fn golden_section_max<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    mut lo: T,
    mut hi: T,
    x_tol: T,
    max_iter: usize,
) -> (T, T, usize) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut it = 0;
    while (hi - lo) > x_tol && it < max_iter {
        it += 1;
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1, it)
    } else {
        (x2, f2, it)
    }
}
