use proptest::prelude::*;

use onesided_core::extrapolation::{solve, InterpolationPlan, PlanSkeleton};
use onesided_core::weights::{Scalar, Weight};

fn exactly_zero(s: &Scalar) -> bool {
    s.is_exact() && s.is_zero()
}

/// `1 + n/d`, an exponent above 1.
fn above_one() -> impl Strategy<Value = Scalar> {
    (1i64..=24, 1i64..=6).prop_map(|(n, d)| &Scalar::one() + &Scalar::ratio(n, d))
}

fn weights() -> (Weight, Weight) {
    (
        Weight::exp_poly([Scalar::ratio(1, 3), Scalar::ratio(-2, 7), Scalar::ratio(1, 5)]),
        Weight::exp_poly([Scalar::zero(), Scalar::ratio(5, 4)]),
    )
}

fn theta_of(skeleton: &PlanSkeleton, j: i64) -> Scalar {
    &skeleton.theta_max() * &Scalar::ratio(j, 10)
}

fn check_hoelder_pairs(plan: &InterpolationPlan) -> Result<(), TestCaseError> {
    prop_assert_eq!(&plan.r_theta, &plan.s_theta);
    prop_assert_eq!(&plan.t_theta, &plan.u_theta);
    let (r, t) = plan.skeleton().collapsed_r_t(&plan.theta).unwrap();
    prop_assert_eq!(&r, &plan.r_theta);
    prop_assert_eq!(&t, &plan.t_theta);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagonal_plans_are_exact(lambda in 0i64..=8, a in above_one(), b in above_one(), j in 1i64..=9) {
        let lambda = &Scalar::one() + &Scalar::ratio(lambda, 4);
        let (p, p1) = (&lambda * &a, &lambda * &b);
        let skeleton = PlanSkeleton::diagonal(lambda.clone(), p.clone(), p1.clone());
        let theta = theta_of(&skeleton, j);
        let (w, w1) = weights();
        let plan = solve(&skeleton, &w, &w1, &theta).unwrap();
        let one = Scalar::one();
        let convexity = &(&(&lambda / &p) - &(&(&one - &theta) * &(&lambda / &plan.p0))) - &(&theta * &(&lambda / &p1));
        prop_assert!(exactly_zero(&convexity), "{}", convexity);
        prop_assert!(plan.p0.value() > lambda.value());
        let rebuilt = plan.w0.powf(&(&(&one - &theta) / &plan.p0)).times(&w1.powf(&(&theta / &p1)));
        prop_assert!(rebuilt.same_as(&w.powf(&p.recip())));
        check_hoelder_pairs(&plan)?;
    }

    #[test]
    fn offdiagonal_plans_are_exact(p in above_one(), dq in 0i64..=12, p1 in above_one(), dq1 in 0i64..=12, j in 1i64..=9) {
        let q = &p + &Scalar::ratio(dq, 4);
        let q1 = &p1 + &Scalar::ratio(dq1, 4);
        let skeleton = PlanSkeleton::offdiagonal(p.clone(), q.clone(), p1.clone(), q1.clone());
        // p = q with p1 < q1 leaves no admissible theta.
        prop_assume!(skeleton.theta_max().value() > 0.0);
        let theta = theta_of(&skeleton, j);
        let (w, w1) = weights();
        let plan = solve(&skeleton, &w, &w1, &theta).unwrap();
        let one = Scalar::one();
        let q0 = plan.q0.clone().unwrap();
        let cp = &(&p.recip() - &(&(&one - &theta) / &plan.p0)) - &(&theta / &p1);
        let cq = &(&q.recip() - &(&(&one - &theta) / &q0)) - &(&theta / &q1);
        prop_assert!(exactly_zero(&cp) && exactly_zero(&cq));
        prop_assert!(plan.p0.value() > 1.0 && plan.p0.value() <= q0.value());
        let rebuilt = plan.w0.powf(&(&one - &theta)).times(&w1.powf(&theta));
        prop_assert!(rebuilt.same_as(&w));
        check_hoelder_pairs(&plan)?;
    }

    #[test]
    fn offdiagonal_degenerates_to_diagonal(p in above_one(), p1 in above_one(), j in 1i64..=9) {
        let diag = PlanSkeleton::diagonal(1, p.clone(), p1.clone());
        let off = PlanSkeleton::offdiagonal(p.clone(), p.clone(), p1.clone(), p1.clone());
        prop_assert_eq!(diag.theta_max(), off.theta_max());
        let theta = theta_of(&diag, j);
        // Diagonal weights are the p-th powers of the off-diagonal ones.
        let (w, w1) = weights();
        let d = solve(&diag, &w.powf(&p), &w1.powf(&p1), &theta).unwrap();
        let o = solve(&off, &w, &w1, &theta).unwrap();
        prop_assert_eq!(&d.p0, &o.p0);
        prop_assert_eq!(o.q0.as_ref(), Some(&o.p0));
        for (a, b) in [(&d.eps, &o.eps), (&d.delta, &o.delta), (&d.r_theta, &o.r_theta), (&d.t_theta, &o.t_theta)] {
            prop_assert_eq!(a, b);
        }
        prop_assert!(d.w0.same_as(&o.w0.powf(&o.p0)));
    }
}
