//! Weights as closed-form expression trees and estimates of their one-sided
//! Muckenhoupt characteristics.

mod classes;
mod expr;
mod gap;
mod integrals;
mod rhi;
mod scalar;
mod tail;

pub use classes::{
    apq_transfer_check, class_constant, class_objective, dual_weight, ClassConstantReport, ClassExponents, ClassTag,
    MemberVerdict, TransferLeg, TransferReport, TripleWitness,
};
pub use expr::{Side, Weight};
pub use gap::{gap_condition_check, gapped_search_spec, GapReport, GAP_TOLERANCE};
pub use integrals::weight_integrator;
pub use rhi::{rhi_exponent, IntervalSampling, RhiEstimate, RhiSide};
pub use scalar::{fraction_string, Scalar};
pub use tail::{
    geometric_cutoffs, tail_integral_probe, TailReport, TailRung, TailVerdict, CONVERGENCE_RATIO, GROWTH_FACTOR,
    GROWTH_RUNGS,
};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum WeightError {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("invalid sampling: {0}")]
    InvalidSampling(String),
    #[error("no grid exponent admits a constant below {cap}: r = {r} already gives {ratio} on ({lo}, {hi})")]
    NoValidExponent { r: f64, ratio: f64, lo: f64, hi: f64, cap: f64 },
    #[error("tail probe inconclusive after {} rungs", rungs.len())]
    Inconclusive { rungs: Vec<TailRung> },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
