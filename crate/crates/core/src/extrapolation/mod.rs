//! Parameter algebra of the extrapolation argument: endpoint exponents and
//! weights for a given `θ`, the choice of `θ`, and plan verification.

mod plan;
mod theta;
mod verify;

pub use plan::{solve, solve_diagonal, solve_offdiagonal, DerivedExponents, InterpolationPlan, PlanMode, PlanSkeleton};
pub use theta::{rhi_gammas, select_theta, split_exponent, GammaEstimate, ThetaSelection, BISECTION_RESIDUAL, THETA_GRID};
pub use verify::{
    counterexample_probe, is_member_at_scale, remark_sanity_legs, verify_plan, ClaimCap, PlanVerification,
    ProbeConclusion, ProbeReport, Residual, SanityLegs, PROBE_RUNGS, RECONSTRUCTION_SAMPLES,
};

use thiserror::Error;

use crate::weights::WeightError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExtrapolationError {
    #[error("theta = {theta} lies outside (0, {theta_max})")]
    ThetaOutOfRange { theta: f64, theta_max: f64 },
    #[error("1/p - theta/p1 is not positive at theta = {theta}")]
    ExponentCollapse { theta: f64 },
    #[error("endpoint exponents out of order: p0 = {p0} > q0 = {q0}")]
    OrderViolation { p0: f64, q0: f64 },
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("no admissible theta: min(gamma1, gamma2) = {gamma} must exceed 1")]
    NoAdmissibleTheta { gamma: f64 },
    #[error(transparent)]
    Weight(#[from] WeightError),
}
