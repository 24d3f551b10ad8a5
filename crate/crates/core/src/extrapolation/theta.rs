//! Choice of `θ` so that the Hölder exponents stay inside the reverse Hölder range.

use serde::{Deserialize, Serialize};

use crate::weights::{dual_weight, rhi_exponent, IntervalSampling, RhiSide, Scalar, Weight};

use super::plan::{PlanMode, PlanSkeleton};
use super::ExtrapolationError;

/// Grid resolution of the scan preceding bisection.
pub const THETA_GRID: usize = 1000;
/// Bisection stops once `min γ - max{r, t}(θ)` drops below this.
pub const BISECTION_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSelection {
    pub theta: f64,
    pub theta_max: f64,
    /// `min(γ₁, γ₂)`.
    pub target: f64,
    pub r: f64,
    pub t: f64,
    /// `target - max{r, t}` at the returned `θ`; zero or positive.
    pub residual: f64,
    /// True when the bound `max{r, t} <= target` was reached before `θ_max`.
    pub constrained_by_gamma: bool,
}

/// `max{r(θ), t(θ)}` from the collapsed forms.
pub fn split_exponent(skeleton: &PlanSkeleton, theta: f64) -> Result<(f64, f64), ExtrapolationError> {
    let (r, t) = skeleton.collapsed_r_t(&Scalar::float(theta))?;
    Ok((r.value(), t.value()))
}

/// Scans `(0, θ_max)` on a grid and bisects the first crossing of
/// `max{r, t}(θ) = min(γ₁, γ₂)`. Without a crossing the last grid point
/// before `θ_max` is returned.
pub fn select_theta(skeleton: &PlanSkeleton, gamma1: f64, gamma2: f64) -> Result<ThetaSelection, ExtrapolationError> {
    skeleton.validate()?;
    let target = gamma1.min(gamma2);
    if !(target > 1.0) {
        return Err(ExtrapolationError::NoAdmissibleTheta { gamma: target });
    }
    let theta_max = skeleton.theta_max().value();
    if !(theta_max > 0.0) {
        return Err(ExtrapolationError::NoAdmissibleTheta { gamma: target });
    }
    let f = |th: f64| split_exponent(skeleton, th).map(|(r, t)| r.max(t));
    let mut lo = 0.0;
    let mut crossing = None;
    for i in 1..THETA_GRID {
        let th = theta_max * i as f64 / THETA_GRID as f64;
        if f(th)? > target {
            crossing = Some(th);
            break;
        }
        lo = th;
    }
    let theta = match crossing {
        None => lo,
        Some(mut hi) => {
            // f(lo) <= target < f(hi); f(0) = 1
            for _ in 0..200 {
                if lo > 0.0 && target - f(lo)? < BISECTION_RESIDUAL {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid)? <= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };
    if !(theta > 0.0) {
        return Err(ExtrapolationError::NoAdmissibleTheta { gamma: target });
    }
    let (r, t) = split_exponent(skeleton, theta)?;
    Ok(ThetaSelection {
        theta,
        theta_max,
        target,
        r,
        t,
        residual: target - r.max(t),
        constrained_by_gamma: crossing.is_some(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub gamma1: f64,
    pub gamma2: f64,
    /// `(label, r)` for each reverse Hölder leg.
    pub legs: Vec<(String, f64)>,
}

/// Reverse Hölder exponents feeding [`select_theta`]: `γ₁` from `w` and
/// `w₁^{-1/(p₁-1)}` on left halves, `γ₂` from `w₁` and `w^{-1/(p-1)}` on right
/// halves, all with the class exponents of the diagonal plan.
pub fn rhi_gammas(
    skeleton: &PlanSkeleton,
    w: &Weight,
    w1: &Weight,
    sampling: &IntervalSampling,
    r_grid: &[f64],
    cap: f64,
) -> Result<GammaEstimate, ExtrapolationError> {
    let (cp, cp1) = match skeleton {
        PlanSkeleton::Diagonal { lambda, p, p1 } => (p / lambda, p1 / lambda),
        PlanSkeleton::Offdiagonal { .. } => {
            return Err(ExtrapolationError::InvalidExponents(format!(
                "reverse Hölder legs are defined for {:?} plans only",
                PlanMode::Diagonal
            )))
        }
    };
    let legs = [
        ("w, left halves", w.clone(), RhiSide::LeftHalf),
        ("w1^(-1/(p1-1)), left halves", dual_weight(w1, &cp1), RhiSide::LeftHalf),
        ("w1, right halves", w1.clone(), RhiSide::RightHalf),
        ("w^(-1/(p-1)), right halves", dual_weight(w, &cp), RhiSide::RightHalf),
    ];
    let mut out = Vec::with_capacity(4);
    for (label, weight, side) in legs {
        let est = rhi_exponent(&weight, side, sampling, r_grid, cap)?;
        out.push((label.to_string(), est.r));
    }
    Ok(GammaEstimate {
        gamma1: out[0].1.min(out[1].1),
        gamma2: out[2].1.min(out[3].1),
        legs: out,
    })
}
