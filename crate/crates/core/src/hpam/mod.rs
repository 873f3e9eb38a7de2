//! Hierarchical preferential attachment: likelihood with observed
//! memberships, maximum-likelihood fits, fixed-point limits and a
//! brute-force marginal likelihood over unobserved memberships.

mod fit;
mod likelihood;
mod limits;
mod marginal;

pub use fit::{gamma_mle, hpam_fit, pi_mle, HpamFitResult};
pub use likelihood::{hpam_gamma_gradient, hpam_loglik, Denominator, HpamObjective};
pub use limits::{
    fixed_point_p, fixed_point_residual, limit_loglik_hpam, theta_from_p, HpamLimits,
};
pub use marginal::{marginal_loglik_bruteforce, MAX_MARGINAL_LABELINGS, MAX_MARGINAL_NODES};

/// Index of the unordered pair `{i, j}` in upper-triangular row order.
pub(crate) fn pair_index(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * k - i * i.saturating_sub(1) / 2 + (j - i)
}

pub(crate) fn num_pairs(k: usize) -> usize {
    k * (k + 1) / 2
}
