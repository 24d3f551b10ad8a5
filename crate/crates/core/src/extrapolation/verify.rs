//! Checks of a finished plan, and the probe showing that the endpoint weight
//! can fall outside the forward class when both inputs are forward weights.

use serde::{Deserialize, Serialize};

use crate::numerics::SearchSpec;
use crate::weights::{
    class_constant, geometric_cutoffs, tail_integral_probe, ClassConstantReport, ClassExponents, ClassTag,
    MemberVerdict, Scalar, TailReport, TailVerdict, Weight, WeightError,
};

use super::plan::{InterpolationPlan, PlanMode};
use super::ExtrapolationError;

/// Points sampled for the pointwise reconstruction residual.
pub const RECONSTRUCTION_SAMPLES: usize = 401;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    /// The residual is exactly zero in rational arithmetic.
    pub exact_zero: bool,
}

impl Residual {
    fn of(name: &str, s: Scalar) -> Self {
        Self {
            name: name.to_string(),
            value: s.value(),
            exact_zero: s.is_exact() && s.is_zero(),
        }
    }
}

/// Comparison value `[w]^{p₁/(p₁-θp)} [w₁]^{θp/(p₁-θp)}` built from the
/// forward constant of `w` and the backward constant of `w₁`. Reported, never
/// asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCap {
    pub w_constant: f64,
    pub w1_constant: f64,
    pub cap: f64,
    pub w0_within_cap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanVerification {
    /// `max |log lhs - log rhs|` of the reconstruction identity on samples.
    pub reconstruction_residual: f64,
    /// The two sides simplify to the same expression tree.
    pub exact_identity: bool,
    pub exponent_residuals: Vec<Residual>,
    pub w0_class_report: ClassConstantReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim_cap: Option<ClaimCap>,
}

pub fn verify_plan(plan: &InterpolationPlan, spec: &SearchSpec) -> Result<PlanVerification, ExtrapolationError> {
    let one = Scalar::one();
    let th = &plan.theta;
    let om = &one - th;
    let (lhs, rhs) = match plan.mode {
        PlanMode::Diagonal => (
            plan.w.powf(&plan.p.recip()),
            plan.w0.powf(&(&om / &plan.p0)).times(&plan.w1.powf(&(th / &plan.p1))),
        ),
        PlanMode::Offdiagonal => (plan.w.clone(), plan.w0.powf(&om).times(&plan.w1.powf(th))),
    };
    let hw = spec.half_width;
    let mut reconstruction_residual = 0.0f64;
    for i in 0..RECONSTRUCTION_SAMPLES {
        let x = -hw + 2.0 * hw * i as f64 / (RECONSTRUCTION_SAMPLES - 1) as f64;
        let (a, b) = (lhs.log_eval(x), rhs.log_eval(x));
        if a.is_finite() && b.is_finite() {
            reconstruction_residual = reconstruction_residual.max((a - b).abs());
        } else if a != b {
            reconstruction_residual = f64::INFINITY;
        }
    }

    let mut exponent_residuals = vec![Residual::of(
        "1/p - (1-θ)/p0 - θ/p1",
        &(&plan.p.recip() - &(&om / &plan.p0)) - &(th / &plan.p1),
    )];
    if let (Some(q), Some(q0), Some(q1)) = (&plan.q, &plan.q0, &plan.q1) {
        exponent_residuals.push(Residual::of("1/q - (1-θ)/q0 - θ/q1", &(&q.recip() - &(&om / q0)) - &(th / q1)));
    }
    exponent_residuals.push(Residual::of("r - s", &plan.r_theta - &plan.s_theta));
    exponent_residuals.push(Residual::of("t - u", &plan.t_theta - &plan.u_theta));

    let (tag, exps) = match (plan.mode, &plan.q0) {
        (PlanMode::Offdiagonal, Some(q0)) => (ClassTag::ApqPlus, ClassExponents::pq(plan.p0.clone(), q0.clone())),
        _ => (ClassTag::ApPlus, ClassExponents::p(&plan.p0 / &plan.lambda)),
    };
    let w0_class_report = class_constant(&plan.w0, tag, &exps, spec)?;

    let claim_cap = match plan.mode {
        PlanMode::Diagonal => claim_cap(plan, spec, w0_class_report.value()).ok(),
        PlanMode::Offdiagonal => None,
    };

    Ok(PlanVerification {
        reconstruction_residual,
        exact_identity: lhs.same_as(&rhs),
        exponent_residuals,
        w0_class_report,
        claim_cap,
    })
}

fn claim_cap(plan: &InterpolationPlan, spec: &SearchSpec, w0_constant: f64) -> Result<ClaimCap, WeightError> {
    let cp = &plan.p / &plan.lambda;
    let cp1 = &plan.p1 / &plan.lambda;
    let fw = class_constant(&plan.w, ClassTag::ApPlus, &ClassExponents::p(cp.clone()), spec)?;
    let bw1 = class_constant(&plan.w1, ClassTag::ApMinus, &ClassExponents::p(cp1.clone()), spec)?;
    let th = plan.theta.value();
    let (p, p1) = (cp.value(), cp1.value());
    let denom = p1 - th * p;
    let cap = fw.value().powf(p1 / denom) * bw1.value().powf(th * p / denom);
    Ok(ClaimCap {
        w_constant: fw.value(),
        w1_constant: bw1.value(),
        cap,
        w0_within_cap: w0_constant <= cap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeConclusion {
    #[serde(rename = "violates A_p^+ necessary condition")]
    Violation,
    #[serde(rename = "no violation detected")]
    NoViolation,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl ProbeConclusion {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Violation => "violates A_p^+ necessary condition",
            Self::NoViolation => "no violation detected",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub q: Scalar,
    pub q1: Scalar,
    pub theta: Scalar,
    pub q0: Scalar,
    pub w0: Weight,
    pub tail_verdict: Option<TailVerdict>,
    pub tail: Option<TailReport>,
    pub conclusion: ProbeConclusion,
}

/// Rungs of the tail ladder used by the probe.
pub const PROBE_RUNGS: usize = 16;

/// With `w = e^{x³}` and `w₁ = e^x`, forms
/// `w₀ = w₁^{θq₀/(q₁(1-θ))} w^{-q₀/(q(1-θ))}` and tests `∫_0^∞ w₀` for
/// convergence; a convergent tail rules out forward-class membership.
pub fn counterexample_probe(
    q: impl Into<Scalar>,
    q1: impl Into<Scalar>,
    theta: impl Into<Scalar>,
) -> Result<ProbeReport, ExtrapolationError> {
    let (q, q1, theta) = (q.into(), q1.into(), theta.into());
    if !(q.value() > 1.0) || !(q1.value() > 1.0) || !q.value().is_finite() || !q1.value().is_finite() {
        return Err(ExtrapolationError::InvalidExponents(format!("need q, q1 > 1, got {q}, {q1}")));
    }
    if !(theta.value() > 0.0 && theta.value() < 1.0) {
        return Err(ExtrapolationError::ThetaOutOfRange {
            theta: theta.value(),
            theta_max: 1.0,
        });
    }
    let one = Scalar::one();
    let om = &one - &theta;
    let denom = &q.recip() - &(&theta / &q1);
    if !(denom.value() > 0.0) {
        return Err(ExtrapolationError::ExponentCollapse { theta: theta.value() });
    }
    let q0 = &om / &denom;
    let scale = &q0 / &om;
    let a = &(&theta / &q1) * &scale;
    let b = -(&scale / &q);
    let w1 = Weight::exp_linear(1);
    let w = Weight::exp_poly([0, 0, 0, 1]);
    let w0 = w1.powf(&a).times(&w.powf(&b));
    let (tail_verdict, tail) = match tail_integral_probe(&w0, 0.0, &geometric_cutoffs(0.0, PROBE_RUNGS)) {
        Ok(rep) => (Some(rep.verdict), Some(rep)),
        Err(WeightError::Inconclusive { .. }) => (None, None),
        Err(e) => return Err(e.into()),
    };
    let conclusion = match tail_verdict {
        Some(TailVerdict::Convergent) => ProbeConclusion::Violation,
        Some(TailVerdict::Divergent) => ProbeConclusion::NoViolation,
        None => ProbeConclusion::Inconclusive,
    };
    Ok(ProbeReport {
        q,
        q1,
        theta,
        q0,
        w0,
        tail_verdict,
        tail,
        conclusion,
    })
}

/// The two facts the probe relies on: `e^x` has a finite forward `A_2`
/// constant, and `∫_0^∞ e^{x³}` diverges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityLegs {
    pub exp_forward_a2: ClassConstantReport,
    pub cubic_tail: TailReport,
}

pub fn remark_sanity_legs(spec: &SearchSpec) -> Result<SanityLegs, ExtrapolationError> {
    let exp_forward_a2 = class_constant(&Weight::exp_linear(1), ClassTag::ApPlus, &ClassExponents::p(2), spec)?;
    let cubic_tail = tail_integral_probe(&Weight::exp_poly([0, 0, 0, 1]), 0.0, &geometric_cutoffs(0.0, PROBE_RUNGS))?;
    Ok(SanityLegs {
        exp_forward_a2,
        cubic_tail,
    })
}

/// True when the class report shows a finite constant on every rung.
pub fn is_member_at_scale(report: &ClassConstantReport) -> bool {
    report.member_verdict == MemberVerdict::MemberAtScale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrapolation::plan::{solve_diagonal, solve_offdiagonal};

    #[test]
    fn constant_weights_plan() {
        let plan = solve_diagonal(1, 2, 4, &Weight::one(), &Weight::one(), Scalar::ratio(1, 3)).unwrap();
        let v = verify_plan(&plan, &SearchSpec::default()).unwrap();
        assert!(v.exact_identity);
        assert!(v.reconstruction_residual <= 1e-12);
        assert!(v.exponent_residuals.iter().all(|r| r.exact_zero), "{:?}", v.exponent_residuals);
        // (p0 - 1)^{p0 - 1} / p0^{p0} at p0 = 8/5
        let want = 0.6f64.powf(0.6) / 1.6f64.powf(1.6);
        assert!((v.w0_class_report.value() - want).abs() < 1e-6, "{}", v.w0_class_report.value());
        assert!(v.claim_cap.is_some());
    }

    #[test]
    fn cubic_setup_has_bounded_w0_with_plan_formula() {
        // The plan formula's w0 = e^{2x³ - x} is eventually increasing.
        let plan = solve_diagonal(1, 2, 2, &Weight::exp_poly([0, 0, 0, 1]), &Weight::exp_linear(1), Scalar::ratio(1, 2)).unwrap();
        assert!(plan.w0.same_as(&Weight::exp_poly([0, -1, 0, 2])));
        let v = verify_plan(&plan, &SearchSpec::default()).unwrap();
        assert!(v.exact_identity && v.reconstruction_residual <= 1e-12);
        assert!(is_member_at_scale(&v.w0_class_report), "{:?}", v.w0_class_report.member_verdict);
    }

    #[test]
    fn offdiagonal_identity() {
        let plan = solve_offdiagonal(2, 4, 3, 6, &Weight::exp_linear(1), &Weight::power(0.0, Scalar::ratio(1, 4)), Scalar::ratio(1, 4)).unwrap();
        let v = verify_plan(&plan, &SearchSpec::default()).unwrap();
        assert!(v.exact_identity && v.reconstruction_residual <= 1e-12);
        assert_eq!(v.exponent_residuals.len(), 4);
        assert!(v.exponent_residuals.iter().all(|r| r.exact_zero));
    }

    #[test]
    fn probe_example() {
        let rep = counterexample_probe(2, 2, Scalar::ratio(1, 2)).unwrap();
        assert_eq!(rep.q0, Scalar::int(2));
        assert!(rep.w0.same_as(&Weight::exp_poly([0, 1, 0, -2])));
        assert_eq!(rep.tail_verdict, Some(TailVerdict::Convergent));
        assert_eq!(rep.conclusion.as_str(), "violates A_p^+ necessary condition");
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["conclusion"], "violates A_p^+ necessary condition");
    }

    #[test]
    fn sanity_legs() {
        let legs = remark_sanity_legs(&SearchSpec::default()).unwrap();
        assert!(legs.exp_forward_a2.value() <= 0.25 + 1e-9);
        assert_eq!(legs.cubic_tail.verdict, TailVerdict::Divergent);
    }
}
