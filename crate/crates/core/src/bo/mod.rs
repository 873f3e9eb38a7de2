//! Buckley-Osthus likelihood, maximum-likelihood fit and limiting
//! quantities.

mod likelihood;
mod limits;
mod mle;

pub use likelihood::{bo_exact_loglik, bo_loglik, bo_score, BoObjective};
pub use limits::{
    limit_loglik, limit_pk, limit_score, sigma2_beta, DegreeLaw, LimitPk, LimitReportBo, Truncation,
};
pub use mle::{bo_mle, BoFitResult, Boundary};
