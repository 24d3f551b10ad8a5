use proptest::prelude::*;

use onesided_core::compactness::{rk_moduli, unit_ball_sampler, weighted_norm, OperatorHandle, SamplerMode, NORM_TOLERANCE};
use onesided_core::operators::{make_kernel, truncate_kernel, ApplyMode, KernelKind, SampledFunction};
use onesided_core::weights::{Scalar, Weight};

fn commutator_handle() -> OperatorHandle {
    let kernel = truncate_kernel(&make_kernel(KernelKind::CzHilbert, None).unwrap(), 0.1).unwrap();
    OperatorHandle::Commutator {
        symbol: SampledFunction::c1_bump(0.0, 1.0),
        kernel,
        mode: ApplyMode::Truncated,
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn sampled_members_are_normalized(seed in 0u64..1000, slope in -2i64..=2) {
        let w = Weight::exp_linear(Scalar::ratio(slope, 4));
        let fam = unit_ball_sampler(2.0, &w, 6, seed, &[SamplerMode::RandomBumps, SamplerMode::Indicators]).unwrap();
        for f in &fam.members {
            prop_assert!((weighted_norm(f, 2.0, &w).unwrap() - 1.0).abs() <= NORM_TOLERANCE);
        }
    }

    #[test]
    fn moduli_are_monotone_and_homogeneous(seed in 0u64..1000, c in 0.1..5.0f64) {
        let fam = unit_ball_sampler(2.0, &Weight::one(), 3, seed, &[SamplerMode::RandomBumps]).unwrap();
        let op = commutator_handle();
        let (h, m) = ([0.005, 0.02], [2.0, 4.0, 8.0, 16.0]);
        let base = rk_moduli(&op, &fam, &h, &m, 2.0).unwrap();
        prop_assert!(base.tau_nonincreasing());
        let scaled = rk_moduli(&op, &fam.scaled(c), &h, &m, 2.0).unwrap();
        prop_assert!(close(scaled.bound_b, c * base.bound_b, 1e-6));
        for (a, b) in base.omega.iter().zip(&scaled.omega).chain(base.tau.iter().zip(&scaled.tau)) {
            prop_assert_eq!(a.0, b.0);
            prop_assert!(close(b.1, c * a.1, 1e-6), "{} vs {}", b.1, c * a.1);
        }
    }
}
