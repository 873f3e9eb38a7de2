//! Numerical building blocks shared by the inference modules.

mod linalg;
mod scalar_search;
mod series;
mod special;

pub use linalg::cholesky_solve;
pub use scalar_search::{bisect_root, golden_section_max, RootBracket};
pub use series::{euler_maclaurin_tail, exp_sinh_integral};
pub use special::{ln_factorial, ln_gamma, ln_gamma_ratio};
