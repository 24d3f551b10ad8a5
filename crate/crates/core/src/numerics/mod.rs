//! Quadrature and global supremum search shared by every other module.

mod gauss;
mod quadrature;
mod search;

pub use gauss::{GaussLegendre, PANEL_ORDER};
pub use quadrature::{
    integrate, Endpoint, EndpointSingularity, IntegralEstimate, Integrator, LogIntegral,
    QuadOptions,
};
pub use search::{sup_search, ParamPoint, SearchShape, SearchSpec, SupEstimate};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("integrand is not integrable near x = {at}")]
    NonIntegrable { at: f64 },
    #[error("quadrature budget exhausted: value {} with error bound {}", .0.value, .0.error_bound)]
    ToleranceNotMet(IntegralEstimate),
    #[error("invalid integration interval ({lo}, {hi})")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("search domain is empty: {0}")]
    EmptyDomain(String),
    #[error("all {0} objective evaluations failed")]
    AllEvaluationsFailed(usize),
    #[error("invalid search spec: {0}")]
    InvalidSpec(String),
}
