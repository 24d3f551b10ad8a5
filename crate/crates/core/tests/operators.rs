use proptest::prelude::*;

use onesided_core::operators::{
    apply_kernel, commutator, default_h_ladder, frac_int_plus, make_kernel, maximal, truncate_kernel, ApplyMode,
    HormanderParams, KernelKind, MaximalVariant, SampledFunction,
};

fn bump() -> impl Strategy<Value = SampledFunction> {
    (-3.0..3.0f64, 0.2..2.0f64, 0.1..3.0f64).prop_map(|(c, r, a)| SampledFunction::c1_bump(c, r).scaled(a))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maximal_is_sublinear_and_homogeneous(f in bump(), g in bump(), c in -3.0..3.0f64, x in -4.0..4.0f64) {
        let ladder = default_h_ladder();
        for v in [MaximalVariant::Plus, MaximalVariant::Minus, MaximalVariant::TwoSided] {
            let mf = maximal(&f, &v, x, &ladder).unwrap();
            let mg = maximal(&g, &v, x, &ladder).unwrap();
            let sum = maximal(&f.plus(&g), &v, x, &ladder).unwrap();
            prop_assert!(sum <= mf + mg + 1e-9);
            let scaled = maximal(&f.scaled(c), &v, x, &ladder).unwrap();
            prop_assert!(close(scaled, c.abs() * mf, 1e-9));
        }
    }

    #[test]
    fn maximal_commutes_with_translation(f in bump(), tau in -2.0..2.0f64, x in -4.0..4.0f64) {
        let ladder = default_h_ladder();
        let a = maximal(&f, &MaximalVariant::Plus, x, &ladder).unwrap();
        let b = maximal(&f.translated(tau), &MaximalVariant::Plus, x + tau, &ladder).unwrap();
        prop_assert!(close(a, b, 1e-7));
    }

    #[test]
    fn fractional_integral_is_linear_and_positive(
        f in bump(), g in bump(), a in -2.0..2.0f64, alpha in 0.2..0.8f64, x in -4.0..4.0f64,
    ) {
        let tf = frac_int_plus(&f, alpha, x).unwrap();
        let tg = frac_int_plus(&g, alpha, x).unwrap();
        prop_assert!(tf >= 0.0 && tg >= 0.0);
        let combo = frac_int_plus(&f.scaled(a).plus(&g), alpha, x).unwrap();
        prop_assert!(close(combo, a * tf + tg, 1e-6));
    }

    #[test]
    fn truncation_sits_below_the_full_operator(f in bump(), delta in 0.01..0.5f64, x in -4.0..4.0f64) {
        let k = make_kernel(KernelKind::Fractional { alpha: 0.5 }, None).unwrap();
        let full = apply_kernel(&k, &f, x, ApplyMode::Truncated).unwrap();
        let cut = apply_kernel(&truncate_kernel(&k, delta).unwrap(), &f, x, ApplyMode::Truncated).unwrap();
        prop_assert!(cut >= -1e-12 && cut <= full + 1e-9);
    }

    #[test]
    fn commutator_is_antisymmetric_in_b_and_linear_in_f(
        b in bump(), f in bump(), g in bump(), a in -2.0..2.0f64, x in -4.0..4.0f64,
    ) {
        let k = truncate_kernel(&make_kernel(KernelKind::CzHilbert, None).unwrap(), 0.1).unwrap();
        let m = ApplyMode::Truncated;
        let v = commutator(&b, &k, &f, x, m).unwrap();
        let neg = commutator(&b.scaled(-1.0), &k, &f, x, m).unwrap();
        prop_assert!(close(neg, -v, 1e-9));
        let vg = commutator(&b, &k, &g, x, m).unwrap();
        let combo = commutator(&b, &k, &f.scaled(a).plus(&g), x, m).unwrap();
        prop_assert!(close(combo, a * v + vg, 1e-6));
    }

    #[test]
    fn kernels_respect_their_size_bound(x in -10.0..10.0f64, d in 1e-6..100.0f64, alpha in 0.05..0.95f64, delta in 0.01..0.9f64) {
        let kernels = [
            make_kernel(KernelKind::Fractional { alpha }, None).unwrap(),
            make_kernel(KernelKind::CzHilbert, Some(HormanderParams { r: 2.0, gamma: 1.0 })).unwrap(),
        ];
        for k in kernels {
            prop_assert!(k.size_ratio(x, x + d) <= 1.0 + 1e-12);
            prop_assert!(truncate_kernel(&k, delta).unwrap().size_ratio(x, x + d) <= 1.0 + 1e-12);
            prop_assert_eq!(k.eval(x, x - d), 0.0);
        }
    }
}
