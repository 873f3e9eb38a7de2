//! Limiting degree law of the Buckley-Osthus process and the asymptotic
//! quantities built from it.
//!
//! The law is
//! `p_1 = (a+1)/(2a+1)`, `p_k = (k+a-2)/(k+2a) p_{k-1}` for `k >= 2`,
//! with tail mass `P_{>k} = (k+a-1)/(a+1) p_k`. Series weighted by
//! `P_{>k+1}` converge algebraically, so they are summed directly up to a
//! cut-off and the remainder is added with an Euler-Maclaurin estimate over
//! the Gamma-function extension of `p_k` to real `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{euler_maclaurin_tail, ln_gamma_ratio};
use crate::scalar::{KahanSum, Real};

/// Default absolute tolerance for series truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

const MIN_DIRECT: usize = 64;
const MAX_DIRECT: usize = 1 << 17;

/// Limiting degree distribution at true parameter `a0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeLaw<T: Real = f64> {
    a0: T,
}

impl<T: Real> DegreeLaw<T> {
    pub fn new(a0: T) -> Result<Self> {
        if !(a0 > T::zero()) || !a0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "a0 = {a0} must be positive"
            )));
        }
        Ok(Self { a0 })
    }

    pub fn a0(&self) -> T {
        self.a0
    }

    pub fn p1(&self) -> T {
        let a = self.a0;
        (a + T::one()) / (a + a + T::one())
    }

    /// `p_1, p_2, ...` by the one-step recursion.
    pub fn iter(&self) -> impl Iterator<Item = T> {
        let a = self.a0;
        let two = T::lit(2.0);
        let mut k = 0usize;
        let mut p = T::zero();
        std::iter::from_fn(move || {
            k += 1;
            p = if k == 1 {
                (a + T::one()) / (two * a + T::one())
            } else {
                let kk = T::from_index(k);
                p * (kk + a - two) / (kk + two * a)
            };
            Some(p)
        })
    }

    /// `P_{>k} = Σ_{j>k} p_j` from `p_k`, for `k >= 1`.
    pub fn tail_after(&self, k: usize, p_k: T) -> T {
        let a = self.a0;
        (T::from_index(k) + a - T::one()) / (a + T::one()) * p_k
    }

    /// `Σ_{j>k} j p_j` from `p_k`, for `k >= 1`.
    pub fn first_moment_tail(&self, k: usize, p_k: T) -> T {
        let a = self.a0;
        let kk = T::from_index(k);
        self.tail_after(k, p_k) * ((a + T::one()) * kk + a + a) / a
    }

    /// `p_y` for real `y >= 1`, anchored at a known integer value `p_m`.
    fn p_real(&self, y: T, m: usize, p_m: T) -> T {
        let a = self.a0;
        let mm = T::from_index(m);
        let one = T::one();
        let (lo, hi) = (a - one, a + a + one);
        let log_ratio = ln_gamma_ratio(y, lo, hi) - ln_gamma_ratio(mm, lo, hi);
        p_m * log_ratio.exp()
    }

    /// `Σ_{k≥0} P_{>k+1} g(k)` for a smooth weight `g` defined on `k > -1`.
    ///
    /// Terms are summed directly until they fall below `tol` (at least 64
    /// and at most 2^17 of them); the remainder is an Euler-Maclaurin tail.
    pub fn tail_weighted_series<G: Fn(T) -> T>(&self, g: G, tol: T) -> T {
        let a = self.a0;
        let one = T::one();
        let mut acc = KahanSum::new();
        let mut m = 0usize;
        let mut p_m = T::zero();
        for p in self.iter() {
            m += 1;
            p_m = p;
            let k = m - 1;
            let term = self.tail_after(m, p) * g(T::from_index(k));
            acc.add(term);
            if (m >= MIN_DIRECT && term.abs() < tol) || m >= MAX_DIRECT {
                break;
            }
        }
        // The next unsummed index is k = m, i.e. P_{>m+1}.
        let term = |x: T| -> T {
            let y = x + one;
            (x + a) / (a + one) * self.p_real(y, m, p_m) * g(x)
        };
        acc.add(euler_maclaurin_tail(term, m));
        acc.total()
    }

    /// Limit of the scaled log-likelihood,
    /// `Σ_{k≥0} P_{>k+1} ln(a+k) - ln(a+1)`.
    pub fn limit_loglik(&self, a: T, tol: T) -> Result<T> {
        check_positive(a)?;
        Ok(self.tail_weighted_series(|k| (a + k).ln(), tol) - (a + T::one()).ln())
    }

    /// Derivative of [`limit_loglik`](Self::limit_loglik) in `a`.
    pub fn limit_score(&self, a: T, tol: T) -> Result<T> {
        check_positive(a)?;
        Ok(self.tail_weighted_series(|k| (a + k).recip(), tol) - (a + T::one()).recip())
    }

    /// `(σ², β)` of the asymptotic normal law of `sqrt(n)(â - a0)`.
    pub fn sigma2_beta(&self, tol: T) -> (T, T) {
        let a = self.a0;
        let s2 = self.tail_weighted_series(|k| (a + k).powi(-2), tol);
        let s1 = self.tail_weighted_series(|k| (a + k).recip(), tol);
        let c = (a + T::one()).recip();
        let sigma2 = s2 - T::lit(2.0) * c * s1 + c * c;
        let beta = s2 - c * c;
        (sigma2, beta)
    }
}

fn check_positive<T: Real>(a: T) -> Result<()> {
    if a > T::zero() && a.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("a = {a} must be positive")))
    }
}

/// Where to stop a materialized `p_k` sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Stop at the first `K` with `P_{>K} < tail_tol`.
    pub tail_tol: f64,
    /// Hard cap on the number of stored terms.
    pub max_len: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            tail_tol: DEFAULT_TAIL_TOL,
            max_len: 10_000,
        }
    }
}

impl Truncation {
    pub fn tail_tol(tol: f64) -> Self {
        Self {
            tail_tol: tol,
            max_len: usize::MAX,
        }
    }

    pub fn max_degree(k: usize) -> Self {
        Self {
            tail_tol: 0.0,
            max_len: k,
        }
    }
}

/// A truncated `p_k` sequence with the exact mass and first moment of the
/// part left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPk<T: Real = f64> {
    pub a0: T,
    /// `p[k-1] = p_k` for `k = 1..=K`.
    pub p: Vec<T>,
    /// `P_{>K}`.
    pub tail: T,
    /// `Σ_{k>K} k p_k`.
    pub tail_first_moment: T,
}

impl<T: Real> LimitPk<T> {
    pub fn k_max(&self) -> usize {
        self.p.len()
    }

    /// `Σ_{k≤K} p_k`.
    pub fn partial_mass(&self) -> T {
        let mut s = KahanSum::new();
        self.p.iter().for_each(|&x| s.add(x));
        s.total()
    }

    /// `Σ_{k≤K} k p_k`.
    pub fn partial_first_moment(&self) -> T {
        let mut s = KahanSum::new();
        for (i, &x) in self.p.iter().enumerate() {
            s.add(T::from_index(i + 1) * x);
        }
        s.total()
    }
}

/// Limiting degree frequencies `p_k` at `a0`, truncated per `trunc`.
pub fn limit_pk<T: Real>(a0: T, trunc: Truncation) -> Result<LimitPk<T>> {
    let law = DegreeLaw::new(a0)?;
    let tol = T::lit(trunc.tail_tol);
    let mut p = Vec::new();
    let mut tail = T::one();
    for (i, pk) in law.iter().enumerate() {
        if p.len() >= trunc.max_len.max(1) {
            break;
        }
        p.push(pk);
        tail = law.tail_after(i + 1, pk);
        if tail < tol {
            break;
        }
    }
    let last = *p.last().expect("at least one term");
    Ok(LimitPk {
        a0,
        tail,
        tail_first_moment: law.first_moment_tail(p.len(), last),
        p,
    })
}

/// `ℓ_∞(a)` at true parameter `a0`.
pub fn limit_loglik<T: Real>(a: T, a0: T) -> Result<T> {
    DegreeLaw::new(a0)?.limit_loglik(a, T::lit(DEFAULT_TAIL_TOL))
}

/// `ℓ_∞'(a)` at true parameter `a0`.
pub fn limit_score<T: Real>(a: T, a0: T) -> Result<T> {
    DegreeLaw::new(a0)?.limit_score(a, T::lit(DEFAULT_TAIL_TOL))
}

/// `(σ², β)` at `a0`; the asymptotic variance of `sqrt(n)(â - a0)` is
/// `σ² / β²`.
pub fn sigma2_beta<T: Real>(a0: T) -> Result<(T, T)> {
    Ok(DegreeLaw::new(a0)?.sigma2_beta(T::lit(DEFAULT_TAIL_TOL)))
}

/// Serializable summary of the limiting quantities at `a0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReportBo {
    pub a0: f64,
    pub p: Vec<f64>,
    pub tail_tol: f64,
    pub sigma2: f64,
    pub beta: f64,
    pub avar: f64,
}

impl LimitReportBo {
    pub fn compute(a0: f64, trunc: Truncation) -> Result<Self> {
        let law = DegreeLaw::new(a0)?;
        let pk = limit_pk(a0, trunc)?;
        let (sigma2, beta) = law.sigma2_beta(trunc.tail_tol.max(DEFAULT_TAIL_TOL));
        Ok(Self {
            a0,
            p: pk.p,
            tail_tol: trunc.tail_tol,
            sigma2,
            beta,
            avar: sigma2 / (beta * beta),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pochhammer_ln(x: f64, n: usize) -> f64 {
        (0..n).map(|j| (x + j as f64).ln()).sum()
    }

    #[test]
    fn lcd_law_closed_form() {
        let law = DegreeLaw::new(1.0f64).unwrap();
        for (i, p) in law.iter().take(200).enumerate() {
            let k = (i + 1) as f64;
            let want = 4.0 / (k * (k + 1.0) * (k + 2.0));
            assert!(
                (p - want).abs() <= 1e-15 * want.max(1e-300) + 1e-18,
                "k={k}"
            );
        }
        let mut it = law.iter();
        assert!((it.next().unwrap() - 2.0 / 3.0).abs() < 1e-16);
        assert!((it.next().unwrap() - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn recursion_matches_pochhammer_formula() {
        for a in [0.5f64, 1.0, 2.0] {
            let law = DegreeLaw::new(a).unwrap();
            for (i, p) in law.iter().take(50).enumerate() {
                let k = i + 1;
                let direct = ((a + 1.0).ln() + pochhammer_ln(a, k - 1)
                    - pochhammer_ln(2.0 * a + 1.0, k))
                .exp();
                assert!(
                    (p - direct).abs() < 1e-12 * direct.max(1e-12),
                    "a={a} k={k}"
                );
            }
        }
    }

    #[test]
    fn tail_identities_hold() {
        for a in [0.5f64, 1.0, 2.0] {
            let law = DegreeLaw::new(a).unwrap();
            let ps: Vec<f64> = law.iter().take(4000).collect();
            for k in [1usize, 2, 5, 20] {
                // Direct partial sums out to 4000 plus the analytic tail there.
                let tail_far = law.tail_after(4000, ps[3999]);
                let fm_far = law.first_moment_tail(4000, ps[3999]);
                let mass: f64 = ps[k..].iter().sum::<f64>() + tail_far;
                let fm: f64 = ps[k..]
                    .iter()
                    .enumerate()
                    .map(|(j, p)| (k + j + 1) as f64 * p)
                    .sum::<f64>()
                    + fm_far;
                assert!((law.tail_after(k, ps[k - 1]) - mass).abs() < 1e-13);
                assert!((law.first_moment_tail(k, ps[k - 1]) - fm).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn truncated_sequence_respects_tolerance() {
        let pk = limit_pk(2.0f64, Truncation::tail_tol(1e-8)).unwrap();
        assert!(pk.tail < 1e-8);
        let prev_tail = DegreeLaw::new(2.0)
            .unwrap()
            .tail_after(pk.k_max() - 1, pk.p[pk.k_max() - 2]);
        assert!(prev_tail >= 1e-8);
        let pk = limit_pk(0.5f64, Truncation::max_degree(10)).unwrap();
        assert_eq!(pk.k_max(), 10);
        assert!((pk.partial_mass() + pk.tail - 1.0).abs() < 1e-15);
    }

    #[test]
    fn series_tail_matches_long_direct_sum() {
        // For a0 = 2 the terms decay like k^-4, so a direct sum to 10^6 is
        // accurate to ~1e-18 and checks the tail estimate independently.
        let law = DegreeLaw::new(2.0f64).unwrap();
        let a = 2.0;
        let corrected = law.tail_weighted_series(|k| (a + k).recip(), 1e-3);
        let terms: Vec<f64> = law
            .iter()
            .take(1_000_000)
            .enumerate()
            .map(|(i, p)| law.tail_after(i + 1, p) / (a + i as f64))
            .collect();
        // Smallest terms first keeps the rounding error near one ulp.
        let direct: f64 = terms.iter().rev().sum();
        assert!((corrected - direct).abs() < 1e-13, "{}", corrected - direct);
    }

    #[test]
    fn score_at_truth_is_zero() {
        for a0 in [0.5f64, 1.0, 2.0] {
            let s = limit_score(a0, a0).unwrap();
            assert!(s.abs() < 1e-12, "a0={a0}: {s}");
        }
    }

    #[test]
    fn lcd_beta_closed_form() {
        // β(1) = π²/6 - 3/2 by partial fractions.
        let (sigma2, beta) = sigma2_beta(1.0f64).unwrap();
        let want = std::f64::consts::PI.powi(2) / 6.0 - 1.5;
        assert!((beta - want).abs() < 1e-12);
        assert!((sigma2 - want).abs() < 1e-12);
    }

    #[test]
    fn report_serializes_expected_keys() {
        let r = LimitReportBo::compute(1.0, Truncation::max_degree(5)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["a0", "p", "tail_tol", "sigma2", "beta", "avar"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(r.p.len(), 5);
        assert!((r.p[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_a0() {
        assert!(DegreeLaw::new(0.0f64).is_err());
        assert!(limit_loglik(1.0f64, -1.0).is_err());
        assert!(limit_loglik(0.0f64, 1.0).is_err());
    }
}
