use serde::{Deserialize, Serialize};

use super::likelihood::{log_pairs, Denominator, HpamObjective};
use super::{num_pairs, pair_index};
use crate::error::{Error, Result};
use crate::graph::{CommunityStats, HpamParams};
use crate::numeric::cholesky_solve;
use crate::scalar::Real;

const GRAD_TOL: f64 = 1e-7;
const MAX_ITER: usize = 100_000;
const MAX_HALVINGS: usize = 60;
const MAX_STEP: f64 = 5.0;
const ARMIJO: f64 = 1e-4;

/// Fitted HPAM parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpamFitResult<T: Real = f64> {
    pub k: usize,
    pub pi_hat: Vec<T>,
    /// Row-major, symmetric, `gamma_hat[0] = 1`.
    pub gamma_hat: Vec<T>,
    pub loglik: T,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: T,
    pub mode: Denominator,
    /// 1-based communities with no members; `γ` entries touching them are
    /// left at the initial value.
    pub unidentified: Vec<usize>,
}

impl<T: Real> HpamFitResult<T> {
    pub fn gamma(&self, i: usize, j: usize) -> T {
        self.gamma_hat[i * self.k + j]
    }
}

/// `π̂_j = T_j / n`.
pub fn pi_mle<T: Real>(stats: &CommunityStats) -> Vec<T> {
    let n = T::from_index(stats.n());
    stats
        .t()
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            if t == 0 {
                log::warn!("community {} has no members; its estimate is 0", j + 1);
            }
            T::from_count(t) / n
        })
        .collect()
}

/// Maximizes the `γ` part of the log-likelihood over symmetric positive
/// matrices with `γ_11 = 1`.
///
/// Works in `η = ln γ` over the upper triangle, where the objective is
/// concave, using damped Newton steps with a backtracking line search.
pub fn gamma_mle<T: Real>(
    stats: &CommunityStats,
    init: &HpamParams<T>,
    mode: Denominator,
) -> Result<HpamFitResult<T>> {
    let k = stats.num_communities();
    if init.k() != k {
        return Err(Error::Dimension {
            expected: k,
            found: init.k(),
        });
    }
    if stats.n() < k {
        return Err(Error::DegenerateData(format!(
            "{} nodes cannot inform {k} communities",
            stats.n()
        )));
    }
    if stats.t()[0] == 0 {
        return Err(Error::DegenerateData(
            "community 1 is empty, so the normalization gamma_11 = 1 is not identified".into(),
        ));
    }
    let obj = HpamObjective::new(stats, mode)?;
    let empty: Vec<bool> = stats.t().iter().map(|&t| t == 0).collect();
    let unidentified: Vec<usize> = (0..k).filter(|&j| empty[j]).map(|j| j + 1).collect();
    for j in &unidentified {
        log::warn!("community {j} is empty; gamma entries touching it are not identified");
    }
    let mut free = Vec::new();
    for i in 0..k {
        for j in i..k {
            if (i, j) != (0, 0) && !empty[i] && !empty[j] {
                free.push(pair_index(k, i, j));
            }
        }
    }
    let np = num_pairs(k);
    let mut eta = log_pairs(k, init.gamma_matrix())?;
    let nf = free.len();

    let restrict = |g: &[T], h: &[T]| -> (Vec<T>, Vec<T>) {
        let gf: Vec<T> = free.iter().map(|&p| g[p]).collect();
        let mut hf = vec![T::zero(); nf * nf];
        if !h.is_empty() {
            for (a, &pa) in free.iter().enumerate() {
                for (b, &pb) in free.iter().enumerate() {
                    hf[a * nf + b] = h[pa * np + pb];
                }
            }
        }
        (gf, hf)
    };
    let inf_norm = |v: &[T]| v.iter().fold(T::zero(), |m, x| m.max(x.abs()));

    let mut iterations = 0;
    let mut converged = false;
    let (mut f, g, h) = obj.eta_derivatives(&eta, true);
    let (mut gf, mut hf) = restrict(&g, &h);
    let mut gnorm = inf_norm(&gf);
    while iterations < MAX_ITER {
        if nf == 0 || gnorm < T::lit(GRAD_TOL) {
            converged = true;
            break;
        }
        iterations += 1;
        let neg_h: Vec<T> = hf.iter().map(|&x| -x).collect();
        let mut dir = match cholesky_solve(&neg_h, &gf) {
            Some(d) if d.iter().zip(&gf).map(|(&a, &b)| a * b).sum::<T>() > T::zero() => d,
            _ => gf.clone(),
        };
        let big = inf_norm(&dir);
        if big > T::lit(MAX_STEP) {
            let s = T::lit(MAX_STEP) / big;
            dir.iter_mut().for_each(|d| *d = *d * s);
        }
        let slope: T = dir.iter().zip(&gf).map(|(&a, &b)| a * b).sum();
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial = eta.clone();
            for (a, &p) in free.iter().enumerate() {
                trial[p] = eta[p] + t * dir[a];
            }
            let (ft, _, _) = obj.eta_derivatives(&trial, false);
            if ft.is_finite() && ft >= f + T::lit(ARMIJO) * t * slope {
                accepted = Some(trial);
                break;
            }
            t = t / T::lit(2.0);
        }
        let Some(next) = accepted else {
            break;
        };
        eta = next;
        let (fv, g, h) = obj.eta_derivatives(&eta, true);
        f = fv;
        (gf, hf) = restrict(&g, &h);
        gnorm = inf_norm(&gf);
    }
    if !converged {
        log::warn!("gamma fit stopped after {iterations} iterations with gradient {gnorm}");
    }

    let mut gamma = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            gamma[i * k + j] = eta[pair_index(k, i, j)].exp();
        }
    }
    gamma[0] = T::one();
    let pi_hat = pi_mle::<T>(stats);
    let loglik = obj.pi_part(&pi_hat)? + obj.gamma_part(&gamma)?;
    Ok(HpamFitResult {
        k,
        pi_hat,
        gamma_hat: gamma,
        loglik,
        iterations,
        converged,
        gradient_norm: gnorm,
        mode,
        unidentified,
    })
}

/// `π̂` and `γ̂` together, starting `γ` at the all-ones matrix.
pub fn hpam_fit<T: Real>(stats: &CommunityStats, mode: Denominator) -> Result<HpamFitResult<T>> {
    gamma_mle(stats, &HpamParams::uniform(stats.num_communities()), mode)
}
