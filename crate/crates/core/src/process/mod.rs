//! Process simulation: exact Gaussian reference samplers, the chaos
//! projection sampler, a partial-sum approximation, and the quadrature
//! oracles that price each sampler's truncation and projection bias.

pub mod covariance;
pub mod dmt;
pub mod exact;
pub mod fgn;
pub mod kernel;
pub mod moments;
pub mod params;
pub mod sampler;

pub use covariance::{covariance, fgn_autocovariance};
pub use dmt::{fourth_cumulant_order2, sample_dmt, sum_variance, DmtConfig, DmtSampler};
pub use exact::{sample_gaussian_exact, GaussianExactSampler};
pub use fgn::FgnGenerator;
pub use kernel::{
    increment_kernel, kernel_l, normalizing_constant, rescaled_domain, rescaled_increment_kernel,
    DEFAULT_NODES_PER_CELL,
};
pub use moments::{limit_fourth_cumulant_order2, truncated_second_moment};
pub use params::{HermiteParams, SamplePath, SimMethod};
pub use sampler::{sample_chaos, ChaosSampler};
