//! Interpolation plans: the endpoint exponent, the endpoint weight and the
//! Hölder split exponents for a given `θ`, in exact arithmetic.

use serde::{Deserialize, Serialize};

use crate::weights::{Scalar, Weight};

use super::ExtrapolationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    Diagonal,
    Offdiagonal,
}

/// Exponent data fixed before `θ` is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanSkeleton {
    /// `w ∈ A^+_{p/λ}`, `w₁ ∈ A^-_{p₁/λ}`.
    Diagonal { lambda: Scalar, p: Scalar, p1: Scalar },
    /// `w ∈ A^+_{p,q}`, `w₁ ∈ A^-_{p₁,q₁}`.
    Offdiagonal { p: Scalar, q: Scalar, p1: Scalar, q1: Scalar },
}

/// Everything in a plan that depends only on the exponents and `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedExponents {
    pub p0: Scalar,
    pub q0: Option<Scalar>,
    pub eps: Scalar,
    pub delta: Scalar,
    pub r: Scalar,
    pub s: Scalar,
    pub t: Scalar,
    pub u: Scalar,
}

fn one() -> Scalar {
    Scalar::one()
}

impl PlanSkeleton {
    pub fn diagonal(lambda: impl Into<Scalar>, p: impl Into<Scalar>, p1: impl Into<Scalar>) -> Self {
        Self::Diagonal {
            lambda: lambda.into(),
            p: p.into(),
            p1: p1.into(),
        }
    }

    pub fn offdiagonal(p: impl Into<Scalar>, q: impl Into<Scalar>, p1: impl Into<Scalar>, q1: impl Into<Scalar>) -> Self {
        Self::Offdiagonal {
            p: p.into(),
            q: q.into(),
            p1: p1.into(),
            q1: q1.into(),
        }
    }

    pub fn mode(&self) -> PlanMode {
        match self {
            Self::Diagonal { .. } => PlanMode::Diagonal,
            Self::Offdiagonal { .. } => PlanMode::Offdiagonal,
        }
    }

    pub fn validate(&self) -> Result<(), ExtrapolationError> {
        let bad = |m: String| Err(ExtrapolationError::InvalidExponents(m));
        match self {
            Self::Diagonal { lambda, p, p1 } => {
                let l = lambda.value();
                if !(l >= 1.0) || !l.is_finite() {
                    return bad(format!("lambda must be at least 1, got {lambda}"));
                }
                for (name, v) in [("p", p), ("p1", p1)] {
                    if !(v.value() > l) || !v.value().is_finite() {
                        return bad(format!("{name} must lie in (lambda, ∞), got {v}"));
                    }
                }
            }
            Self::Offdiagonal { p, q, p1, q1 } => {
                for (a, b, na, nb) in [(p, q, "p", "q"), (p1, q1, "p1", "q1")] {
                    if !(a.value() > 1.0) || !(b.value() >= a.value()) || !b.value().is_finite() {
                        return bad(format!("need 1 < {na} <= {nb} < ∞, got {a}, {b}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Supremum of admissible `θ`: positivity of `1/p - θ/p₁` (and the `q`
    /// version), `p₀ > λ` (or `p₀ > 1`), and `p₀ <= q₀` off the diagonal.
    pub fn theta_max(&self) -> Scalar {
        let mut bounds = vec![one()];
        match self {
            Self::Diagonal { lambda, p, p1 } => {
                let (cp, cp1) = (p / lambda, p1 / lambda);
                bounds.push(&cp1 / &cp);
                bounds.push(&(&one() - &cp.recip()) / &(&one() - &cp1.recip()));
            }
            Self::Offdiagonal { p, q, p1, q1 } => {
                bounds.push(p1 / p);
                bounds.push(q1 / q);
                bounds.push(&(&one() - &p.recip()) / &(&one() - &p1.recip()));
                let gap1 = &p1.recip() - &q1.recip();
                if gap1.value() > 0.0 {
                    bounds.push(&(&p.recip() - &q.recip()) / &gap1);
                }
            }
        }
        bounds
            .into_iter()
            .reduce(|a, b| if b.value() < a.value() { b } else { a })
            .expect("non-empty")
    }

    /// Endpoint exponents and split parameters at `θ`.
    pub fn exponents(&self, theta: &Scalar) -> Result<DerivedExponents, ExtrapolationError> {
        self.validate()?;
        let th = theta.value();
        if !(th > 0.0 && th < 1.0) {
            return Err(ExtrapolationError::ThetaOutOfRange {
                theta: th,
                theta_max: self.theta_max().value(),
            });
        }
        let om = &one() - theta;
        match self {
            Self::Diagonal { lambda, p, p1 } => {
                let denom = &p.recip() - &(theta / p1);
                if !(denom.value() > 0.0) {
                    return Err(ExtrapolationError::ExponentCollapse { theta: th });
                }
                let p0 = &om / &denom;
                if !(p0.value() > lambda.value()) {
                    return Err(ExtrapolationError::ThetaOutOfRange {
                        theta: th,
                        theta_max: self.theta_max().value(),
                    });
                }
                // Hölder splits in the class exponents P = p / λ.
                let (cp, cp0, cp1) = (p / lambda, &p0 / lambda, p1 / lambda);
                let (cpc, cp0c, cp1c) = (cp.conjugate(), cp0.conjugate(), cp1.conjugate());
                let eps = &(theta * &cp) / &cp1c;
                let delta = &(theta * &cpc) / &cp1;
                let onep = &one() + &eps;
                let oned = &one() + &delta;
                let r = &(&cp0 * &onep) / &(&cp * &om);
                let s = &(&(theta * &cp0) * &onep) / &(&(&cp1c * &om) * &eps);
                let t = &(&cp0c * &oned) / &(&cpc * &om);
                let u = &(&(theta * &cp0c) * &oned) / &(&(&cp1 * &om) * &delta);
                Ok(DerivedExponents {
                    p0,
                    q0: None,
                    eps,
                    delta,
                    r,
                    s,
                    t,
                    u,
                })
            }
            Self::Offdiagonal { p, q, p1, q1 } => {
                let dp = &p.recip() - &(theta / p1);
                let dq = &q.recip() - &(theta / q1);
                if !(dp.value() > 0.0) || !(dq.value() > 0.0) {
                    return Err(ExtrapolationError::ExponentCollapse { theta: th });
                }
                let p0 = &om / &dp;
                let q0 = &om / &dq;
                if !(p0.value() > 1.0) {
                    return Err(ExtrapolationError::ThetaOutOfRange {
                        theta: th,
                        theta_max: self.theta_max().value(),
                    });
                }
                if p0.value() > q0.value() {
                    return Err(ExtrapolationError::OrderViolation {
                        p0: p0.value(),
                        q0: q0.value(),
                    });
                }
                let (pc, p0c, p1c) = (p.conjugate(), p0.conjugate(), p1.conjugate());
                let eps = &(q * theta) / &p1c;
                let delta = &(theta * &pc) / q1;
                let onep = &one() + &eps;
                let oned = &one() + &delta;
                let r = &(&q0 * &onep) / &(q * &om);
                let s = &(&(theta * &q0) * &onep) / &(&(&p1c * &om) * &eps);
                let t = &(&p0c * &oned) / &(&pc * &om);
                let u = &(&(&p0c * theta) * &oned) / &(&(q1 * &om) * &delta);
                Ok(DerivedExponents {
                    p0,
                    q0: Some(q0),
                    eps,
                    delta,
                    r,
                    s,
                    t,
                    u,
                })
            }
        }
    }

    /// `(r(θ), t(θ))` from the collapsed closed forms, evaluated independently
    /// of [`PlanSkeleton::exponents`]; `θ = 0` gives `(1, 1)`.
    pub fn collapsed_r_t(&self, theta: &Scalar) -> Result<(Scalar, Scalar), ExtrapolationError> {
        let om = &one() - theta;
        match self {
            Self::Diagonal { lambda, p, p1 } => {
                let (cp, cp1) = (p / lambda, p1 / lambda);
                let denom = &cp.recip() - &(theta / &cp1);
                if !(denom.value() > 0.0) {
                    return Err(ExtrapolationError::ExponentCollapse { theta: theta.value() });
                }
                let cp0 = &om / &denom;
                let (cpc, cp0c, cp1c) = (cp.conjugate(), cp0.conjugate(), cp1.conjugate());
                let r = &(&cp0 * &(&cp1c + &(theta * &cp))) / &(&(&cp * &cp1c) * &om);
                let t = &(&cp0c * &(&cp1 + &(theta * &cpc))) / &(&(&cpc * &cp1) * &om);
                Ok((r, t))
            }
            Self::Offdiagonal { p, q, p1, q1 } => {
                let dp = &p.recip() - &(theta / p1);
                let dq = &q.recip() - &(theta / q1);
                if !(dp.value() > 0.0) || !(dq.value() > 0.0) {
                    return Err(ExtrapolationError::ExponentCollapse { theta: theta.value() });
                }
                let (p0, q0) = (&om / &dp, &om / &dq);
                let (pc, p0c, p1c) = (p.conjugate(), p0.conjugate(), p1.conjugate());
                let r = &(&q0 * &(&p1c + &(theta * q))) / &(&(q * &p1c) * &om);
                let t = &(&p0c * &(q1 + &(theta * &pc))) / &(&(q1 * &pc) * &om);
                Ok((r, t))
            }
        }
    }
}

/// A complete plan. Exponents serialize as `{"exact": "n/d", "value": f}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationPlan {
    pub mode: PlanMode,
    #[serde(with = "rendered")]
    pub lambda: Scalar,
    #[serde(with = "rendered")]
    pub theta: Scalar,
    #[serde(with = "rendered")]
    pub theta_max: Scalar,
    #[serde(with = "rendered")]
    pub p: Scalar,
    #[serde(with = "rendered")]
    pub p0: Scalar,
    #[serde(with = "rendered")]
    pub p1: Scalar,
    #[serde(with = "rendered_opt", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Scalar>,
    #[serde(with = "rendered_opt", default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<Scalar>,
    #[serde(with = "rendered_opt", default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<Scalar>,
    #[serde(with = "rendered")]
    pub eps: Scalar,
    #[serde(with = "rendered")]
    pub delta: Scalar,
    #[serde(with = "rendered")]
    pub r_theta: Scalar,
    #[serde(with = "rendered")]
    pub s_theta: Scalar,
    #[serde(with = "rendered")]
    pub t_theta: Scalar,
    #[serde(with = "rendered")]
    pub u_theta: Scalar,
    pub w: Weight,
    pub w1: Weight,
    pub w0: Weight,
}

impl InterpolationPlan {
    pub fn skeleton(&self) -> PlanSkeleton {
        match self.mode {
            PlanMode::Diagonal => PlanSkeleton::Diagonal {
                lambda: self.lambda.clone(),
                p: self.p.clone(),
                p1: self.p1.clone(),
            },
            PlanMode::Offdiagonal => PlanSkeleton::Offdiagonal {
                p: self.p.clone(),
                q: self.q.clone().expect("off-diagonal plan carries q"),
                p1: self.p1.clone(),
                q1: self.q1.clone().expect("off-diagonal plan carries q1"),
            },
        }
    }
}

/// Builds the plan for `skeleton` at `theta`.
pub fn solve(skeleton: &PlanSkeleton, w: &Weight, w1: &Weight, theta: &Scalar) -> Result<InterpolationPlan, ExtrapolationError> {
    w.validate()?;
    w1.validate()?;
    let ex = skeleton.exponents(theta)?;
    let om = &one() - theta;
    let (lambda, p, p1, q, q1, w0) = match skeleton {
        PlanSkeleton::Diagonal { lambda, p, p1 } => {
            let a = &ex.p0 / &(p * &om);
            let b = -(&(theta * &ex.p0) / &(p1 * &om));
            let w0 = w.powf(&a).times(&w1.powf(&b));
            (lambda.clone(), p.clone(), p1.clone(), None, None, w0)
        }
        PlanSkeleton::Offdiagonal { p, q, p1, q1 } => {
            let a = om.recip();
            let b = -(theta / &om);
            let w0 = w.powf(&a).times(&w1.powf(&b));
            (one(), p.clone(), p1.clone(), Some(q.clone()), Some(q1.clone()), w0)
        }
    };
    Ok(InterpolationPlan {
        mode: skeleton.mode(),
        lambda,
        theta: theta.clone(),
        theta_max: skeleton.theta_max(),
        p,
        p0: ex.p0,
        p1,
        q,
        q0: ex.q0,
        q1,
        eps: ex.eps,
        delta: ex.delta,
        r_theta: ex.r,
        s_theta: ex.s,
        t_theta: ex.t,
        u_theta: ex.u,
        w: w.clone(),
        w1: w1.clone(),
        w0,
    })
}

pub fn solve_diagonal(
    lambda: impl Into<Scalar>,
    p: impl Into<Scalar>,
    p1: impl Into<Scalar>,
    w: &Weight,
    w1: &Weight,
    theta: impl Into<Scalar>,
) -> Result<InterpolationPlan, ExtrapolationError> {
    solve(&PlanSkeleton::diagonal(lambda, p, p1), w, w1, &theta.into())
}

pub fn solve_offdiagonal(
    p: impl Into<Scalar>,
    q: impl Into<Scalar>,
    p1: impl Into<Scalar>,
    q1: impl Into<Scalar>,
    w: &Weight,
    w1: &Weight,
    theta: impl Into<Scalar>,
) -> Result<InterpolationPlan, ExtrapolationError> {
    solve(&PlanSkeleton::offdiagonal(p, q, p1, q1), w, w1, &theta.into())
}

#[derive(Serialize, Deserialize)]
struct Rendered {
    exact: Option<String>,
    value: f64,
}

impl Rendered {
    fn of(s: &Scalar) -> Self {
        Self {
            exact: s.is_exact().then(|| s.fraction_text()),
            value: s.value(),
        }
    }

    fn into_scalar<E: serde::de::Error>(self) -> Result<Scalar, E> {
        match self.exact {
            Some(text) => text.parse().map_err(E::custom),
            None => Ok(Scalar::float(self.value)),
        }
    }
}

mod rendered {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Rendered;
    use crate::weights::Scalar;

    pub fn serialize<S: Serializer>(s: &Scalar, ser: S) -> Result<S::Ok, S::Error> {
        Rendered::of(s).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Scalar, D::Error> {
        Rendered::deserialize(de)?.into_scalar()
    }
}

mod rendered_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Rendered;
    use crate::weights::Scalar;

    pub fn serialize<S: Serializer>(s: &Option<Scalar>, ser: S) -> Result<S::Ok, S::Error> {
        s.as_ref().map(Rendered::of).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Scalar>, D::Error> {
        Option::<Rendered>::deserialize(de)?.map(Rendered::into_scalar).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn diagonal_example() {
        let w = Weight::exp_poly([0, 0, 0, 1]);
        let w1 = Weight::exp_linear(1);
        let plan = solve_diagonal(1, 2, 4, &w, &w1, r(1, 3)).unwrap();
        assert_eq!(plan.p0, r(8, 5));
        assert_eq!(plan.eps, r(1, 2));
        assert_eq!(plan.delta, r(1, 6));
        assert_eq!(plan.r_theta, r(9, 5));
        assert_eq!(plan.s_theta, plan.r_theta);
        assert_eq!(plan.t_theta, r(7, 3));
        assert_eq!(plan.u_theta, plan.t_theta);
        let want = w.powf(&r(6, 5)).times(&w1.powf(&r(-1, 5)));
        assert!(plan.w0.same_as(&want), "{:?}", plan.w0);
    }

    #[test]
    fn offdiagonal_example() {
        let w = Weight::exp_linear(1);
        let w1 = Weight::power(0.0, r(1, 2));
        let plan = solve_offdiagonal(2, 4, 3, 6, &w, &w1, r(1, 4)).unwrap();
        assert_eq!(plan.p0, r(9, 5));
        assert_eq!(plan.q0, Some(r(18, 5)));
        let want = w.powf(&r(4, 3)).times(&w1.powf(&r(-1, 3)));
        assert!(plan.w0.same_as(&want));
        assert_eq!(plan.r_theta, plan.s_theta);
        assert_eq!(plan.t_theta, plan.u_theta);
    }

    #[test]
    fn collapsed_forms_agree() {
        let sk = [PlanSkeleton::diagonal(1, 2, 4), PlanSkeleton::diagonal(2, 3, 5), PlanSkeleton::offdiagonal(2, 4, 3, 6)];
        for s in &sk {
            for th in [r(1, 10), r(1, 5), r(1, 4)] {
                let ex = s.exponents(&th).unwrap();
                let (rc, tc) = s.collapsed_r_t(&th).unwrap();
                assert_eq!(ex.r, rc, "{s:?}");
                assert_eq!(ex.t, tc, "{s:?}");
            }
            let (r0, t0) = s.collapsed_r_t(&Scalar::zero()).unwrap();
            assert!(r0.is_one() && t0.is_one());
        }
    }

    #[test]
    fn theta_max_values() {
        // min(1, 4/2, (1/2)/(3/4)) = 2/3
        assert_eq!(PlanSkeleton::diagonal(1, 2, 4).theta_max(), r(2, 3));
        let s = PlanSkeleton::diagonal(1, 2, 4);
        assert!(matches!(s.exponents(&r(2, 3)), Err(ExtrapolationError::ThetaOutOfRange { .. })));
        assert!(s.exponents(&r(13, 20)).is_ok());
        // p1 < p: 1/p - θ/p1 vanishes at θ = p1/p
        let s = PlanSkeleton::diagonal(1, 4, 2);
        assert!(matches!(s.exponents(&r(1, 2)), Err(ExtrapolationError::ExponentCollapse { .. })));
    }

    #[test]
    fn offdiagonal_order_violation() {
        // 1/p - 1/q = 0 while 1/p1 - 1/q1 > 0 forces p0 > q0 for every θ
        let s = PlanSkeleton::offdiagonal(2, 2, 2, 4);
        assert!(matches!(s.exponents(&r(1, 4)), Err(ExtrapolationError::OrderViolation { .. })));
    }

    #[test]
    fn json_renders_fractions() {
        let plan = solve_diagonal(1, 2, 4, &Weight::one(), &Weight::one(), r(1, 3)).unwrap();
        let v = serde_json::to_value(&plan).unwrap();
        assert_eq!(v["p0"]["exact"], "8/5");
        assert_eq!(v["p0"]["value"], 1.6);
        assert_eq!(v["theta"]["exact"], "1/3");
        let back: InterpolationPlan = serde_json::from_value(v).unwrap();
        assert_eq!(back, plan);
    }
}
