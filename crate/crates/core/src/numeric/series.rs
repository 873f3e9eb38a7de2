//! Tail corrections for slowly converging series.
//!
//! The limiting degree law has a power-law tail, so series weighted by it
//! converge algebraically. Summing directly to a cut-off and adding an
//! Euler-Maclaurin estimate of the remainder gives near machine-precision
//! totals at a modest cut-off.

use crate::scalar::{KahanSum, Real};

/// `∫_start^∞ f(x) dx` by exp-sinh quadrature.
///
/// Suited to integrands that decay algebraically or faster. The step is
/// halved until two consecutive levels agree to `rel_tol`.
pub fn exp_sinh_integral<T: Real, F: Fn(T) -> T>(f: F, start: T, rel_tol: T) -> T {
    let half_pi = T::FRAC_PI_2();
    let t_max = T::lit(6.5);
    let node = |tau: T| -> Option<T> {
        let e = (half_pi * tau.sinh()).exp();
        let x = start + e;
        let w = half_pi * tau.cosh() * e;
        if !x.is_finite() || !w.is_finite() {
            return None;
        }
        let v = f(x) * w;
        v.is_finite().then_some(v)
    };
    let sum_level = |h: T, odd_only: bool| -> T {
        let mut acc = KahanSum::new();
        let steps = (t_max / h).to_usize().unwrap_or(0);
        let stride = if odd_only { 2 } else { 1 };
        let first = if odd_only { 1 } else { 0 };
        let mut i = first;
        while i <= steps {
            let tau = T::from_index(i) * h;
            if let Some(v) = node(tau) {
                acc.add(v);
            }
            if i > 0 {
                if let Some(v) = node(-tau) {
                    acc.add(v);
                }
            }
            i += stride;
        }
        acc.total()
    };
    let mut h = T::lit(0.5);
    let mut raw = sum_level(h, false);
    let mut est = raw * h;
    for _ in 0..8 {
        h = h / T::lit(2.0);
        raw = raw + sum_level(h, true);
        let next = raw * h;
        let done = (next - est).abs() <= rel_tol * next.abs();
        est = next;
        if done {
            break;
        }
    }
    est
}

/// Estimates `Σ_{k ≥ start} f(k)` for a smooth, eventually monotone `f`
/// that is defined for real arguments down to `start - 1`.
///
/// Uses the Euler-Maclaurin formula through the third-derivative term with
/// finite-difference derivatives.
pub fn euler_maclaurin_tail<T: Real, F: Fn(T) -> T>(f: F, start: usize) -> T {
    let k = T::from_index(start);
    let h = T::lit(0.5);
    let two = T::lit(2.0);
    let fm2 = f(k - two * h);
    let fm1 = f(k - h);
    let f0 = f(k);
    let fp1 = f(k + h);
    let fp2 = f(k + two * h);
    let d1 = (T::lit(8.0) * (fp1 - fm1) - (fp2 - fm2)) / (T::lit(12.0) * h);
    let d3 = (fp2 - two * fp1 + two * fm1 - fm2) / (two * h * h * h);
    let integral = exp_sinh_integral(&f, k, T::epsilon() * T::lit(64.0));
    integral + f0 / two - d1 / T::lit(12.0) + d3 / T::lit(720.0)
}
