use serde::{Deserialize, Serialize};

use super::{num_pairs, pair_index};
use crate::error::{Error, Result};
use crate::graph::{CommunityStats, HpamParams};
use crate::numeric::ln_factorial;
use crate::scalar::{KahanSum, Real};

/// Which step denominator the likelihood uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Denominator {
    /// `Σ_j γ_{l_k j} N_j^{k-1} + γ_{l_k l_k}`: the exact one-step law.
    #[default]
    Exact,
    /// `Σ_j γ_{l_k j} N_j^{k-1} / k`, without the self-loop term. The first
    /// step would divide by zero, so it always uses the exact denominator.
    Scaled,
}

/// Scaled HPAM log-likelihood for one labeled history.
///
/// In exact mode the value is `(1/n) ln L` including `Σ_v ln (d(v)-1)!`;
/// the scaled mode omits that constant.
#[derive(Debug, Clone)]
pub struct HpamObjective<'a> {
    stats: &'a CommunityStats,
    mode: Denominator,
}

impl<'a> HpamObjective<'a> {
    pub fn new(stats: &'a CommunityStats, mode: Denominator) -> Result<Self> {
        if stats.n() == 0 {
            return Err(Error::EmptyData("history is empty".into()));
        }
        Ok(Self { stats, mode })
    }

    pub fn stats(&self) -> &CommunityStats {
        self.stats
    }

    pub fn mode(&self) -> Denominator {
        self.mode
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k != self.stats.num_communities() {
            return Err(Error::Dimension {
                expected: self.stats.num_communities(),
                found: k,
            });
        }
        Ok(())
    }

    /// Coefficients `c_j` with `D_k = Σ_j γ_{l_k j} c_j`.
    pub(crate) fn step_coefficients<T: Real>(&self, step: usize, out: &mut [T]) -> usize {
        let l = self.stats.labels()[step - 1] as usize;
        let mass = self.stats.mass_before(step);
        let scale = match self.mode {
            Denominator::Scaled if step > 1 => T::from_index(step).recip(),
            _ => T::one(),
        };
        for (c, &m) in out.iter_mut().zip(mass) {
            *c = T::from_count(m) * scale;
        }
        if self.mode == Denominator::Exact || step == 1 {
            out[l] = out[l] + T::one();
        }
        l
    }

    /// `Σ_{i≤j} M_ij`, indexed by unordered pair.
    pub(crate) fn pair_counts(&self) -> Vec<u64> {
        let k = self.stats.num_communities();
        let mut out = vec![0u64; num_pairs(k)];
        for i in 0..k {
            for j in i..k {
                out[pair_index(k, i, j)] = self.stats.m(i, j);
            }
        }
        out
    }

    /// `(1/n) Σ_j T_j ln π_j`, with `0 ln 0 = 0`.
    pub fn pi_part<T: Real>(&self, pi: &[T]) -> Result<T> {
        self.check_k(pi.len())?;
        let mut s = KahanSum::new();
        for (&t, &p) in self.stats.t().iter().zip(pi) {
            if t > 0 {
                s.add(T::from_count(t) * p.ln());
            }
        }
        Ok(s.total() / T::from_index(self.stats.n()))
    }

    /// The `γ`-dependent part, for a row-major symmetric matrix that need
    /// not be normalized.
    pub fn gamma_part<T: Real>(&self, gamma: &[T]) -> Result<T> {
        let k = self.stats.num_communities();
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
                let m = self.stats.m(i, j);
                if m > 0 {
                    s.add(T::from_count(m) * gamma[i * k + j].ln());
                }
            }
        }
        if self.mode == Denominator::Exact {
            for (d, count) in self.stats.degrees().iter() {
                s.add(T::from_count(count) * ln_factorial::<T>(d - 1));
            }
        }
        let mut c = vec![T::zero(); k];
        for step in 1..=self.stats.n() {
            let l = self.step_coefficients(step, &mut c);
            let row = &gamma[l * k..(l + 1) * k];
            let d: T = row.iter().zip(&c).map(|(&g, &c)| g * c).sum();
            s.add(-d.ln());
        }
        Ok(s.total() / T::from_index(self.stats.n()))
    }

    /// Full scaled log-likelihood at `params`.
    pub fn loglik<T: Real>(&self, params: &HpamParams<T>) -> Result<T> {
        self.check_k(params.k())?;
        Ok(self.pi_part(params.pi())? + self.gamma_part(params.gamma_matrix())?)
    }

    /// Gradient of [`gamma_part`](Self::gamma_part) with respect to each
    /// unordered pair `γ_ij = γ_ji` treated as one parameter, returned as a
    /// symmetric row-major matrix.
    pub fn gamma_gradient<T: Real>(&self, gamma: &[T]) -> Result<Vec<T>> {
        let k = self.stats.num_communities();
        let (_, g_eta, _) = self.eta_derivatives(&log_pairs(k, gamma)?, false);
        let mut out = vec![T::zero(); k * k];
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] = g_eta[pair_index(k, i, j)] / gamma[i * k + j];
            }
        }
        Ok(out)
    }

    /// Value, gradient and (optionally) Hessian of the `γ` part in the
    /// log-pair coordinates `η_p = ln γ_p`.
    pub(crate) fn eta_derivatives<T: Real>(
        &self,
        eta: &[T],
        with_hessian: bool,
    ) -> (T, Vec<T>, Vec<T>) {
        let k = self.stats.num_communities();
        let np = num_pairs(k);
        let n = T::from_index(self.stats.n());
        let counts = self.pair_counts();
        let gamma: Vec<T> = eta.iter().map(|e| e.exp()).collect();
        let mut value = KahanSum::new();
        let mut grad: Vec<KahanSum<T>> = (0..np).map(|_| KahanSum::new()).collect();
        for (p, &m) in counts.iter().enumerate() {
            if m > 0 {
                value.add(T::from_count(m) * eta[p]);
            }
            grad[p].add(T::from_count(m));
        }
        let mut hess = if with_hessian {
            vec![T::zero(); np * np]
        } else {
            Vec::new()
        };
        let mut c = vec![T::zero(); k];
        let mut q = vec![T::zero(); k];
        let mut idx = vec![0usize; k];
        for step in 1..=self.stats.n() {
            let l = self.step_coefficients(step, &mut c);
            let mut d = T::zero();
            for j in 0..k {
                idx[j] = pair_index(k, l, j);
                q[j] = gamma[idx[j]] * c[j];
                d = d + q[j];
            }
            value.add(-d.ln());
            for j in 0..k {
                q[j] = q[j] / d;
                grad[idx[j]].add(-q[j]);
            }
            if with_hessian {
                for a in 0..k {
                    if q[a] == T::zero() {
                        continue;
                    }
                    hess[idx[a] * np + idx[a]] = hess[idx[a] * np + idx[a]] - q[a];
                    for b in 0..k {
                        hess[idx[a] * np + idx[b]] = hess[idx[a] * np + idx[b]] + q[a] * q[b];
                    }
                }
            }
        }
        let grad = grad.iter().map(|g| g.total() / n).collect();
        for h in hess.iter_mut() {
            *h = *h / n;
        }
        (value.total() / n, grad, hess)
    }
}

pub(crate) fn log_pairs<T: Real>(k: usize, gamma: &[T]) -> Result<Vec<T>> {
    if gamma.len() != k * k {
        return Err(Error::Dimension {
            expected: k * k,
            found: gamma.len(),
        });
    }
    if gamma.iter().any(|&g| !(g > T::zero())) {
        return Err(Error::Domain("gamma entries must be positive".into()));
    }
    let mut eta = vec![T::zero(); num_pairs(k)];
    for i in 0..k {
        for j in i..k {
            eta[pair_index(k, i, j)] = gamma[i * k + j].ln();
        }
    }
    Ok(eta)
}

/// Scaled HPAM log-likelihood of a labeled history at `params`.
pub fn hpam_loglik<T: Real>(
    stats: &CommunityStats,
    params: &HpamParams<T>,
    mode: Denominator,
) -> Result<T> {
    HpamObjective::new(stats, mode)?.loglik(params)
}

/// Gradient of the `γ` part of the log-likelihood; see
/// [`HpamObjective::gamma_gradient`].
pub fn hpam_gamma_gradient<T: Real>(
    stats: &CommunityStats,
    gamma: &[T],
    mode: Denominator,
) -> Result<Vec<T>> {
    HpamObjective::new(stats, mode)?.gamma_gradient(gamma)
}
