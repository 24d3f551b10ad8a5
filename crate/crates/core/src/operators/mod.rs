//! One-sided maximal functions, the forward fractional integral, forward
//! singular kernels with smooth truncation, commutators and kernel checks.

mod apply;
mod hormander;
mod kernels;
mod maximal;
mod sampled;

pub use apply::{
    apply_kernel, apply_to, commutator, commutator_difference_form, frac_int_plus, ApplyMode, EpsLadder, Integrand,
};
pub use hormander::{
    fractional_pointwise_case, hormander_check, hormander_ring_case, BoundKind, HormanderCase, HormanderReport,
    HormanderSampleSpec,
};
pub use kernels::{make_kernel, truncate_kernel, HormanderParams, KernelKind, OneSidedKernel, TruncationProfile};
pub use maximal::{default_h_ladder, maximal, MaximalVariant};
pub use sampled::{SampledFunction, SmoothnessTag, Term, UniformGrid};

use thiserror::Error;

use crate::numerics::NumericsError;
use crate::weights::WeightError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OperatorError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("T_eps f({x}) does not settle along the eps ladder; last rungs {trail:?}")]
    NonConvergentPV { x: f64, trail: Vec<(f64, f64)> },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Weight(#[from] WeightError),
}
