use crate::error::{Error, Result};
use crate::graph::DegreeCounts;
use crate::numeric::ln_factorial;
use crate::scalar::{KahanSum, Real};

/// Scaled Buckley-Osthus log-likelihood and score for one set of degree
/// counts, with the tail counts `Z_{>k}` precomputed.
///
/// The scaled form is
/// `(1/n) [ Σ_{k≥0} Z_{>k+1} ln(a+k) - Σ_{j=1}^n ln(a + (j-1)/j) ]`,
/// which differs from `(1/n) ln L_n(a)` by the constant `ln(n!)/n`.
#[derive(Debug, Clone)]
pub struct BoObjective {
    n: u64,
    tail: Vec<u64>,
}

impl BoObjective {
    pub fn new(counts: &DegreeCounts) -> Result<Self> {
        if counts.n() == 0 {
            return Err(Error::EmptyData("degree counts are empty".into()));
        }
        Ok(Self {
            n: counts.n(),
            tail: counts.tail_counts(),
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn check<T: Real>(a: T) -> Result<()> {
        if a > T::zero() && a.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("a = {a} must be positive")))
        }
    }

    pub fn loglik<T: Real>(&self, a: T) -> Result<T> {
        Self::check(a)?;
        let mut acc = KahanSum::new();
        // Z_{>k+1} is tail[k + 1]; it vanishes once k + 1 reaches the max degree.
        for k in 0..self.tail.len().saturating_sub(1) {
            let z = self.tail[k + 1];
            if z > 0 {
                acc.add(T::from_count(z) * (a + T::from_index(k)).ln());
            }
        }
        for j in 1..=self.n {
            let frac = T::from_count(j - 1) / T::from_count(j);
            acc.add(-(a + frac).ln());
        }
        Ok(acc.total() / T::from_count(self.n))
    }

    pub fn exact_loglik<T: Real>(&self, a: T) -> Result<T> {
        let scaled = self.loglik(a)?;
        Ok(scaled - ln_factorial::<T>(self.n) / T::from_count(self.n))
    }

    /// Derivative of [`loglik`](Self::loglik) in `a`; equals the average
    /// per-step score `(1/n) Σ_k [1/(a + d_k - 1) - 1/(a + 1 - 1/k)]`.
    pub fn score<T: Real>(&self, a: T) -> Result<T> {
        Self::check(a)?;
        let mut acc = KahanSum::new();
        for k in 0..self.tail.len().saturating_sub(1) {
            let z = self.tail[k + 1];
            if z > 0 {
                acc.add(T::from_count(z) / (a + T::from_index(k)));
            }
        }
        for j in 1..=self.n {
            let frac = T::from_count(j - 1) / T::from_count(j);
            acc.add(-(a + frac).recip());
        }
        Ok(acc.total() / T::from_count(self.n))
    }
}

/// Scaled log-likelihood `ℓ_n(a)` (the constant `ln(n!)/n` dropped).
pub fn bo_loglik<T: Real>(counts: &DegreeCounts, a: T) -> Result<T> {
    BoObjective::new(counts)?.loglik(a)
}

/// `(1/n) ln L_n(a)`, the exact per-node log-likelihood, so that
/// `exp(n * bo_exact_loglik)` is the probability of any growth history
/// with these degree counts.
pub fn bo_exact_loglik<T: Real>(counts: &DegreeCounts, a: T) -> Result<T> {
    BoObjective::new(counts)?.exact_loglik(a)
}

/// Score `ℓ_n'(a)`.
pub fn bo_score<T: Real>(counts: &DegreeCounts, a: T) -> Result<T> {
    BoObjective::new(counts)?.score(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GrowthHistory;

    fn counts(targets: &[usize]) -> DegreeCounts {
        GrowthHistory::from_targets(targets)
            .unwrap()
            .degree_counts()
    }

    #[test]
    fn single_node_loglik_vanishes() {
        for a in [0.1f64, 1.0, 7.0] {
            assert!(bo_loglik(&counts(&[1]), a).unwrap().abs() < 1e-15);
            assert!(bo_exact_loglik(&counts(&[1]), a).unwrap().abs() < 1e-15);
            assert!(bo_score(&counts(&[1]), a).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn two_node_attachment_probability() {
        let c = counts(&[1, 1]);
        for a in [0.5f64, 1.0, 3.0] {
            let l = bo_exact_loglik(&c, a).unwrap();
            assert!(((2.0 * l).exp() - (a + 1.0) / (2.0 * a + 1.0)).abs() < 1e-15);
        }
        let l = bo_exact_loglik(&c, 1.0f64).unwrap();
        assert!(((2.0 * l).exp() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_and_exact_differ_by_log_factorial() {
        let c = counts(&[1, 1, 2, 1, 5, 3]);
        let d = bo_loglik(&c, 0.8f64).unwrap() - bo_exact_loglik(&c, 0.8f64).unwrap();
        assert!((d - 720f64.ln() / 6.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_a() {
        let c = counts(&[1, 1]);
        assert!(matches!(bo_loglik(&c, 0.0f64), Err(Error::Domain(_))));
        assert!(matches!(bo_score(&c, -1.0f64), Err(Error::Domain(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let c = counts(&[1, 1, 2, 1, 5, 3, 3, 1]);
        let l64 = bo_loglik(&c, 1.3f64).unwrap();
        let l32 = bo_loglik(&c, 1.3f32).unwrap();
        assert!((l64 - l32 as f64).abs() < 1e-5);
    }
}
