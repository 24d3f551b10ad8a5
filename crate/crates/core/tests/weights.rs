use proptest::prelude::*;

use onesided_core::numerics::SearchSpec;
use onesided_core::weights::{class_constant, dual_weight, ClassExponents, ClassTag, Scalar, Weight};

fn constant(w: &Weight, tag: ClassTag, p: &Scalar) -> f64 {
    class_constant(w, tag, &ClassExponents::p(p.clone()), &SearchSpec::default()).unwrap().value()
}

fn exponent() -> impl Strategy<Value = Scalar> {
    (1i64..=8).prop_map(|n| &Scalar::one() + &Scalar::ratio(n, 4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn constants_ignore_scaling_and_translation(p in exponent(), slope in -4i64..=4, c in 1i64..=9, tau in -3.0..3.0f64) {
        let w = Weight::exp_linear(Scalar::ratio(slope, 4));
        let base = constant(&w, ClassTag::ApPlus, &p);
        let scaled = constant(&w.times(&Weight::constant(Scalar::ratio(c, 3))), ClassTag::ApPlus, &p);
        let shifted = constant(&w.shifted(tau), ClassTag::ApPlus, &p);
        prop_assert!((scaled - base).abs() <= 1e-4 * base);
        prop_assert!((shifted - base).abs() <= 1e-4 * base);
    }

    #[test]
    fn reflection_swaps_sides(p in exponent(), slope in 0i64..=4) {
        let w = Weight::exp_linear(Scalar::ratio(slope, 4));
        let plus = constant(&w, ClassTag::ApPlus, &p);
        let minus = constant(&w.reflected(), ClassTag::ApMinus, &p);
        prop_assert!((plus - minus).abs() <= 1e-4 * plus);
    }

    #[test]
    fn dual_constant_is_a_power(p in exponent(), slope in 0i64..=4) {
        let w = Weight::exp_linear(Scalar::ratio(slope, 4));
        let pc = p.conjugate();
        let forward = constant(&w, ClassTag::ApPlus, &p);
        let backward = constant(&dual_weight(&w, &p), ClassTag::ApMinus, &pc);
        let want = forward.powf(pc.value() - 1.0);
        prop_assert!((backward - want).abs() <= 1e-2 * want);
    }
}
