//! Maximum-likelihood estimation for preferential attachment graphs.
//!
//! Covers the Buckley-Osthus model (including the LCD special case), a
//! general degree-function variant used for simulation, and the
//! hierarchical preferential attachment model (HPAM) with community
//! memberships. Numerical code is generic over [`Real`] (`f32` or `f64`);
//! the aliases at the crate root fix it to `f64`.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bo;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod hpam;
pub mod ingest;
pub mod numeric;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{
    AttachEvent, BoDomain, BoParam, CommunityStats, DegreeCounts, GrowthHistory, HpamParams,
};
pub use scalar::Real;
pub use sim::{GrowthModel, SimConfig};

pub type BoFit = bo::BoFitResult<f64>;
pub type Params = HpamParams<f64>;
pub type Domain = BoDomain<f64>;
