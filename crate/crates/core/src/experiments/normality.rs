use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bo::sigma2_beta;
use crate::error::{Error, Result};

/// Smallest sample the diagnostic accepts.
pub const MIN_ESTIMATES: usize = 50;

/// How closely standardized estimates `sqrt(n)(â - a0) β/σ` follow a
/// standard normal law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub n: usize,
    pub a0: f64,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    /// Kolmogorov-Smirnov distance to the standard normal.
    pub ks_distance: f64,
    /// `(theoretical, sample)` quantile pairs, one per estimate.
    pub quantiles: Vec<(f64, f64)>,
    /// All standardized values coincide.
    pub degenerate: bool,
}

/// Standardizes `estimates` of `a` at sample size `n` and compares them with
/// the standard normal.
pub fn normality_diagnostic(estimates: &[f64], n: usize, a0: f64) -> Result<NormalityReport> {
    if estimates.len() < MIN_ESTIMATES {
        return Err(Error::SampleSize {
            needed: MIN_ESTIMATES,
            found: estimates.len(),
        });
    }
    let (sigma2, beta) = sigma2_beta(a0)?;
    let scale = (n as f64).sqrt() * beta / sigma2.sqrt();
    let mut z: Vec<f64> = estimates.iter().map(|&a| (a - a0) * scale).collect();
    let r = z.len();
    let (mean, _, std) = super::summary::describe(&z);
    z.sort_by(f64::total_cmp);
    let std_normal = Normal::standard();
    let rf = r as f64;
    let mut ks = 0.0f64;
    for (i, &x) in z.iter().enumerate() {
        let f = std_normal.cdf(x);
        ks = ks.max((i + 1) as f64 / rf - f).max(f - i as f64 / rf);
    }
    let quantiles = z
        .iter()
        .enumerate()
        .map(|(i, &x)| (std_normal.inverse_cdf((i as f64 + 0.5) / rf), x))
        .collect();
    let degenerate = z.first() == z.last();
    if degenerate {
        log::warn!("all {r} standardized estimates are equal");
    }
    Ok(NormalityReport {
        n,
        a0,
        count: r,
        mean,
        std,
        ks_distance: ks,
        quantiles,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn synthetic_normal_draws_pass() {
        let (a0, n) = (1.0, 1000usize);
        let (s2, b) = sigma2_beta(a0).unwrap();
        let sd = (s2 / (b * b) / n as f64).sqrt();
        let dist = Normal::new(a0, sd).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws: Vec<f64> = (0..200)
            .map(|_| dist.inverse_cdf(rng.gen_range(1e-12..1.0)))
            .collect();
        let rep = normality_diagnostic(&draws, n, a0).unwrap();
        assert!(rep.ks_distance < 0.1, "{}", rep.ks_distance);
        assert!((rep.std - 1.0).abs() < 0.2);
        assert!(!rep.degenerate);
    }

    #[test]
    fn point_mass_is_flagged() {
        let rep = normality_diagnostic(&[2.0; 60], 1000, 1.0).unwrap();
        assert!(rep.degenerate);
        assert!(rep.ks_distance > 0.99);
    }

    #[test]
    fn too_few_estimates() {
        assert!(matches!(
            normality_diagnostic(&[1.0; 10], 100, 1.0),
            Err(Error::SampleSize {
                needed: 50,
                found: 10
            })
        ));
    }
}
