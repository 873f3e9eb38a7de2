use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::HpamParams;
use crate::scalar::{KahanSum, Real};

const DAMPING: f64 = 0.5;
const MAX_ITER: usize = 100_000;

/// Limits of `N_j^{n-1}/n` and `M_ij^n/n` under the true parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpamLimits<T: Real = f64> {
    pub k: usize,
    /// `p_j`, summing to 2.
    pub p0: Vec<T>,
    /// Row-major symmetric `θ_ij`; the upper triangle sums to 1.
    pub theta0: Vec<T>,
    /// Infinity norm of the fixed-point equation at `p0`, evaluated
    /// separately from the iteration.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> HpamLimits<T> {
    pub fn compute(params: &HpamParams<T>, tol: T) -> Result<Self> {
        let (p0, residual, iterations) = fixed_point_p(params, tol)?;
        let theta0 = theta_from_p(params, &p0)?;
        Ok(Self {
            k: params.k(),
            p0,
            theta0,
            residual,
            iterations,
        })
    }

    pub fn theta(&self, i: usize, j: usize) -> T {
        self.theta0[i * self.k + j]
    }
}

fn row_sums<T: Real>(params: &HpamParams<T>, p: &[T]) -> Vec<T> {
    let k = params.k();
    (0..k)
        .map(|l| (0..k).map(|j| params.gamma(l, j) * p[j]).sum())
        .collect()
}

/// `max_j |p_j (1 - Σ_l π_l γ_lj / S_l) - π_j|` with `S_l = Σ_k γ_lk p_k`.
pub fn fixed_point_residual<T: Real>(params: &HpamParams<T>, p: &[T]) -> T {
    let k = params.k();
    let s = row_sums(params, p);
    let pi = params.pi();
    (0..k)
        .map(|j| {
            let pull: T = (0..k).map(|l| pi[l] * params.gamma(l, j) / s[l]).sum();
            (p[j] * (T::one() - pull) - pi[j]).abs()
        })
        .fold(T::zero(), T::max)
}

/// Solves the fixed-point equation for `p` by damped iteration from
/// `p = 2π`. Returns `(p, residual, iterations)`.
pub fn fixed_point_p<T: Real>(params: &HpamParams<T>, tol: T) -> Result<(Vec<T>, T, usize)> {
    let k = params.k();
    let pi = params.pi();
    let w = T::lit(DAMPING);
    let mut p: Vec<T> = pi.iter().map(|&x| x + x).collect();
    let mut next = vec![T::zero(); k];
    for it in 0..=MAX_ITER {
        let residual = fixed_point_residual(params, &p);
        if residual < tol {
            let total: T = p.iter().copied().sum();
            if (total - T::lit(2.0)).abs() > tol.max(T::epsilon()) * T::lit(1e3) {
                return Err(Error::Solver {
                    iterations: it,
                    residual: (total - T::lit(2.0)).to_f64().unwrap_or(f64::NAN),
                });
            }
            return Ok((p, residual, it));
        }
        let s = row_sums(params, &p);
        for j in 0..k {
            let pull: T = (0..k).map(|l| pi[l] * params.gamma(l, j) / s[l]).sum();
            next[j] = (T::one() - w) * p[j] + w * (pi[j] + p[j] * pull);
        }
        std::mem::swap(&mut p, &mut next);
    }
    Err(Error::Solver {
        iterations: MAX_ITER,
        residual: fixed_point_residual(params, &p)
            .to_f64()
            .unwrap_or(f64::NAN),
    })
}

/// `θ_ij` from the fixed point `p`, as a symmetric row-major matrix. The
/// diagonal uses `π_i`.
pub fn theta_from_p<T: Real>(params: &HpamParams<T>, p: &[T]) -> Result<Vec<T>> {
    let k = params.k();
    if p.len() != k {
        return Err(Error::Dimension {
            expected: k,
            found: p.len(),
        });
    }
    let s = row_sums(params, p);
    let pi = params.pi();
    let one_way = |i: usize, j: usize| pi[i] * params.gamma(i, j) * p[j] / s[i];
    let mut theta = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            theta[i * k + j] = if i == j {
                one_way(i, i)
            } else {
                one_way(i, j) + one_way(j, i)
            };
        }
    }
    Ok(theta)
}

impl<T: Real> HpamLimits<T> {
    /// Limit of the `γ` part of the scaled log-likelihood at `gamma`
    /// (row-major, symmetric, any positive scale) when data come from
    /// `params0`, the parameters these limits were computed from.
    pub fn limit_loglik(&self, gamma: &[T], params0: &HpamParams<T>) -> Result<T> {
        let k = params0.k();
        if self.k != k {
            return Err(Error::Dimension {
                expected: self.k,
                found: k,
            });
        }
        if gamma.len() != k * k {
            return Err(Error::Dimension {
                expected: k * k,
                found: gamma.len(),
            });
        }
        if gamma.iter().any(|&g| !(g > T::zero())) {
            return Err(Error::Domain("gamma entries must be positive".into()));
        }
        let mut s = KahanSum::new();
        for i in 0..k {
            for j in i..k {
                s.add(self.theta(i, j) * gamma[i * k + j].ln());
            }
            let row: T = (0..k).map(|j| gamma[i * k + j] * self.p0[j]).sum();
            s.add(-params0.pi()[i] * row.ln());
        }
        Ok(s.total())
    }
}

/// [`HpamLimits::limit_loglik`] with the limits solved to `1e-12`.
pub fn limit_loglik_hpam<T: Real>(gamma: &[T], params0: &HpamParams<T>) -> Result<T> {
    HpamLimits::compute(params0, T::lit(1e-12))?.limit_loglik(gamma, params0)
}
