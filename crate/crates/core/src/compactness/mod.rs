//! Riesz–Kolmogorov diagnostics for commutators over finite test families,
//! and the truncation, translation and tail experiments.

mod experiments;
mod family;
mod fit;
mod moduli;
mod report;

pub use experiments::{
    support_radius, tail_fit, translation_bound_exponent, translation_fit, truncation_error_experiment,
    TruncationErrorReport, DEFAULT_X_SAMPLES, DELTA_SLOPE_SLACK, EXPONENT_SLACK,
};
pub use family::{unit_ball_sampler, weighted_norm, FamilyProvenance, SamplerMode, TestFamily, NORM_TOLERANCE};
pub use fit::{power_fit, FitReport};
pub use moduli::{rk_moduli, CompactnessModuli, OperatorHandle, OutputProfile};
pub use report::{
    commutator_compactness_report, geometric_grid, Check, CompactnessConfig, CompactnessOperator, ExperimentReport,
    FamilySpec, FitSummary, Table, TauTarget, EXPONENT_RELATION_TOLERANCE,
};

use thiserror::Error;

use crate::numerics::NumericsError;
use crate::operators::OperatorError;
use crate::weights::WeightError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CompactnessError {
    #[error("normalization failed: {0}")]
    NormalizationFailure(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("exponents violate 1/q = 1/p - alpha with 1 < p < q: p = {p}, q = {q}, alpha = {alpha}")]
    ExponentRelationViolated { p: f64, q: f64, alpha: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
