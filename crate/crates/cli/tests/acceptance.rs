//! Acceptance suite: fourteen criteria at their pinned tolerances, one
//! PASS/FAIL line each. Exits non-zero when any criterion fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use onesided_core::compactness::{
    commutator_compactness_report, rk_moduli, tail_fit, translation_fit, truncation_error_experiment,
    unit_ball_sampler, OperatorHandle, SamplerMode, TestFamily,
};
use onesided_core::extrapolation::{counterexample_probe, solve, PlanSkeleton, ProbeConclusion};
use onesided_core::numerics::SearchSpec;
use onesided_core::operators::{
    frac_int_plus, hormander_check, make_kernel, truncate_kernel, HormanderParams, HormanderSampleSpec, KernelKind,
    SampledFunction,
};
use onesided_core::weights::{
    apq_transfer_check, class_constant, dual_weight, gap_condition_check, ClassExponents, ClassTag, Scalar,
    TailVerdict, Weight,
};
use onesided_lab::config::Experiment;
use onesided_lab::{load_config, run, ExperimentConfig};

type Verdict = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn constant(w: &Weight, tag: ClassTag, p: Scalar) -> Result<onesided_core::weights::ClassConstantReport, String> {
    class_constant(w, tag, &ClassExponents::p(p), &SearchSpec::default()).map_err(err)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn constant_weight_exactness() -> Verdict {
    let mut worst: f64 = 0.0;
    for p in [Scalar::ratio(3, 2), Scalar::int(2), Scalar::int(3)] {
        let pv = p.value();
        let want = (pv - 1.0).powf(pv - 1.0) / pv.powf(pv);
        let got = constant(&Weight::one(), ClassTag::ApPlus, p)?.value();
        worst = worst.max(rel(got, want));
    }
    ensure(worst <= 1e-4, format!("max relative error {worst:.2e} (limit 1e-4)"))
}

fn exponential_one_sidedness() -> Verdict {
    let e = Weight::exp_linear(1);
    let plus = constant(&e, ClassTag::ApPlus, Scalar::int(2))?;
    let minus = constant(&e, ClassTag::ApMinus, Scalar::int(2))?;
    let v = plus.value();
    let depth = plus.estimate.refinement_levels;
    ensure(
        (0.245..=0.2501).contains(&v) && depth >= 4 && minus.is_divergent(),
        format!("[e^x]_A2+ = {v:.6} at depth {depth}; A2- verdict {:?}", minus.member_verdict),
    )
}

fn windowed_exponential() -> Weight {
    let window = Weight::piecewise(vec![-1.0, 1.0], vec![Weight::one(), Weight::constant(2), Weight::one()]);
    Weight::product(vec![Weight::exp_linear(1), window])
}

fn duality_identity() -> Verdict {
    let mut worst: f64 = 0.0;
    for w in [Weight::one(), Weight::exp_linear(1), windowed_exponential()] {
        for p in [Scalar::int(2), Scalar::int(3)] {
            let pc = p.conjugate();
            let forward = constant(&w, ClassTag::ApPlus, p.clone())?;
            let backward = constant(&dual_weight(&w, &p), ClassTag::ApMinus, pc.clone())?;
            if forward.is_divergent() || backward.is_divergent() {
                return Err(format!("divergent leg at p = {p}"));
            }
            worst = worst.max(rel(backward.value(), forward.value().powf(pc.value() - 1.0)));
        }
    }
    ensure(worst <= 1e-2, format!("max relative residual {worst:.2e} over 6 cases (limit 1e-2)"))
}

fn transfer_identity() -> Verdict {
    let mut worst: f64 = 0.0;
    for w in [Weight::one(), Weight::exp_linear(Scalar::ratio(1, 4))] {
        for (p, q) in [(2, 2), (2, 4)] {
            let rep = apq_transfer_check(&w, &Scalar::int(p), &Scalar::int(q), &SearchSpec::default()).map_err(err)?;
            let leg = rep.legs.iter().find(|l| l.name == "w^q in A+").ok_or("missing forward leg")?;
            worst = worst.max(leg.residual.ok_or_else(|| format!("divergent leg for (p, q) = ({p}, {q})"))?);
        }
    }
    ensure(worst <= 1e-2, format!("max relative residual {worst:.2e} over 4 cases (limit 1e-2)"))
}

fn random_weight(rng: &mut ChaCha8Rng) -> Weight {
    match rng.gen_range(0..3) {
        0 => Weight::constant(Scalar::ratio(rng.gen_range(1..=8), 4)),
        1 => Weight::exp_linear(Scalar::ratio(rng.gen_range(-4..=4), 4)),
        _ => {
            let center = rng.gen_range(-2.0..2.0);
            let exponent = Scalar::ratio(rng.gen_range(-4..=4), 10);
            Weight::truncated_power(center, exponent, rng.gen_range(0.5..2.0))
        }
    }
}

fn gap_dominance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let two = Scalar::int(2);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let (u, v) = (random_weight(&mut rng), random_weight(&mut rng));
        let rep = gap_condition_check(&u, &v, &two, &two, 4.0, f64::INFINITY, &SearchSpec::default()).map_err(err)?;
        let ratio = rep.ungapped_max / rep.gapped_max;
        if !(ratio <= 1.0 + 1e-3) {
            return Err(format!("pair {i}: ungapped {} exceeds gapped {}", rep.ungapped_max, rep.gapped_max));
        }
        worst = worst.max(ratio);
    }
    ensure(true, format!("max ungapped/gapped {worst:.4} over 20 pairs (limit 1.001)"))
}

fn random_fraction(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Scalar {
    Scalar::ratio(rng.gen_range(lo..=hi), den)
}

fn interpolation_algebra() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let one = Scalar::one();
    let w = Weight::exp_poly([Scalar::ratio(1, 3), Scalar::ratio(-2, 7)]);
    let w1 = Weight::exp_poly([Scalar::zero(), Scalar::ratio(5, 4), Scalar::ratio(1, 9)]);
    for i in 0..50 {
        let lambda = &one + &random_fraction(&mut rng, 0, 8, 4);
        // class exponents p/λ and p1/λ in (1, 5]
        let p = &lambda * &(&one + &random_fraction(&mut rng, 1, 16, 4));
        let p1 = &lambda * &(&one + &random_fraction(&mut rng, 1, 16, 4));
        let skeleton = PlanSkeleton::diagonal(lambda.clone(), p.clone(), p1.clone());
        let theta_max = skeleton.theta_max();
        let theta = &theta_max * &random_fraction(&mut rng, 1, 9, 10);
        let plan = solve(&skeleton, &w, &w1, &theta).map_err(err)?;
        let big_p = &p / &lambda;
        let (big_p0, big_p1) = (&plan.p0 / &lambda, &p1 / &lambda);
        let convexity = &(&big_p.recip() - &(&(&one - &theta) / &big_p0)) - &(&theta / &big_p1);
        let exact_zero = |s: &Scalar| s.is_exact() && s.is_zero();
        if !exact_zero(&convexity) {
            return Err(format!("tuple {i}: convexity residual {convexity}"));
        }
        if !(plan.r_theta == plan.s_theta && plan.t_theta == plan.u_theta) {
            return Err(format!("tuple {i}: r = {}, s = {}, t = {}, u = {}", plan.r_theta, plan.s_theta, plan.t_theta, plan.u_theta));
        }
        let lhs = plan.w0.powf(&(&(&one - &theta) / &plan.p0)).times(&w1.powf(&(&theta / &p1)));
        if !lhs.same_as(&w.powf(&p.recip())) {
            return Err(format!("tuple {i}: reconstruction differs"));
        }
    }
    Ok("50 tuples: convexity, reconstruction, r = s and t = u exact".into())
}

fn endpoint_counterexample() -> Verdict {
    let rep = counterexample_probe(2, 2, Scalar::ratio(1, 2)).map_err(err)?;
    let tree = rep.w0.same_as(&Weight::exp_poly([0, 1, 0, -2]));
    let tail = rep.tail.as_ref().ok_or("tail probe inconclusive")?;
    let beyond_six = tail
        .rungs
        .iter()
        .filter(|r| r.cutoff > 6.0)
        .all(|r| r.log_increment < 1e-10f64.ln());
    let far = rep.w0.log_integral(1.0, 6.0, 64.0).map_err(err)?.log_value;
    let sweep_bad: Vec<f64> = (1..10)
        .map(|k| Scalar::ratio(k, 10))
        .filter_map(|t| match counterexample_probe(2, 2, t.clone()) {
            Ok(r) if r.tail_verdict == Some(TailVerdict::Convergent) => None,
            _ => Some(t.value()),
        })
        .collect();
    ensure(
        tree && rep.conclusion == ProbeConclusion::Violation && beyond_six && far < 1e-10f64.ln() && sweep_bad.is_empty(),
        format!(
            "w0 = e^(x-2x^3): {tree}; conclusion {:?}; ln of the integral over (6, 64) = {far:.1}; non-convergent sweep points {sweep_bad:?}",
            rep.conclusion.as_str()
        ),
    )
}

fn fractional_closed_forms() -> Verdict {
    let chi = SampledFunction::indicator(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for x in [-1.0f64, 0.0, 0.75] {
        let want = 2.0 * ((1.0 - x).sqrt() - (-x).max(0.0).sqrt());
        worst = worst.max((frac_int_plus(&chi, 0.5, x).map_err(err)? - want).abs());
    }
    ensure(worst <= 1e-6, format!("max abs error {worst:.2e} (limit 1e-6)"))
}

fn fractional_smoothness() -> Verdict {
    let k = make_kernel(KernelKind::Fractional { alpha: 0.5 }, None).map_err(err)?;
    let spec = HormanderSampleSpec {
        pointwise_samples: 10_000,
        ..HormanderSampleSpec::default()
    };
    let rep = hormander_check(&k, None, &spec).map_err(err)?;
    ensure(
        rep.samples >= 10_000 && rep.max_ratio <= 1.0 + 1e-9,
        format!("{} samples, max ratio {:.6} (limit 1 + 1e-9)", rep.samples, rep.max_ratio),
    )
}

fn smoothstep_bump() -> SampledFunction {
    SampledFunction::c1_bump(0.0, 1.0)
}

fn family32() -> Result<TestFamily, String> {
    unit_ball_sampler(2.0, &Weight::one(), 32, 11, &[SamplerMode::RandomBumps, SamplerMode::Indicators]).map_err(err)
}

fn hilbert_delta(delta: f64) -> Result<onesided_core::operators::OneSidedKernel, String> {
    let k = make_kernel(KernelKind::CzHilbert, Some(HormanderParams { r: 2.0, gamma: 1.0 })).map_err(err)?;
    truncate_kernel(&k, delta).map_err(err)
}

fn truncation_linearity() -> Verdict {
    let k = make_kernel(KernelKind::CzHilbert, None).map_err(err)?;
    let family = unit_ball_sampler(2.0, &Weight::one(), 8, 1, &[SamplerMode::RandomBumps]).map_err(err)?;
    let rep = truncation_error_experiment(&smoothstep_bump(), &k, &family, &[0.1, 0.05, 0.025], None).map_err(err)?;
    let e = rep.fit.fitted_exponent;
    ensure(
        (e - 1.0).abs() <= 0.15 && rep.constant_spread <= 2.0,
        format!("delta exponent {e:.4} (1 ± 0.15), constant spread {:.3} (limit 2)", rep.constant_spread),
    )
}

fn translation_exponent() -> Verdict {
    let delta = 0.1;
    let h: Vec<f64> = (0..6).map(|i| 1e-3 * (delta / 8.0 / 1e-3f64).powf(i as f64 / 5.0)).collect();
    let fit = translation_fit(&smoothstep_bump(), &hilbert_delta(delta)?, &family32()?, &h).map_err(err)?;
    ensure(
        fit.fitted_exponent >= 0.4,
        format!("fitted exponent {:.4} on h in [1e-3, delta/8] (limit 0.4)", fit.fitted_exponent),
    )
}

fn tail_slope() -> Verdict {
    let r = [4.0, 8.0, 16.0, 32.0, 64.0];
    let fit = tail_fit(&smoothstep_bump(), &hilbert_delta(0.1)?, &family32()?, &r).map_err(err)?;
    ensure(
        fit.fitted_exponent <= -0.4,
        format!("fitted slope {:.4} on R in [4, 64] (limit -0.4, theory -0.5)", fit.fitted_exponent),
    )
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn config(name: &str) -> Result<ExperimentConfig, String> {
    load_config(&configs_dir().join(name)).map_err(err)
}

fn moduli_contract() -> Verdict {
    let mut notes = Vec::new();
    for name in ["commutator-cz.json", "commutator-fractional.json"] {
        let Experiment::CommutatorReport(c) = config(name)?.experiment else {
            return Err(format!("{name} is not a commutator report"));
        };
        let b = c.symbol.build().map_err(err)?;
        let rep = commutator_compactness_report(&b, c.operator, &c.weight, &c.settings).map_err(err)?;
        let m = &rep.moduli;
        let increasing = m.omega.windows(2).all(|w| w[0].1 < w[1].1);
        let (first, last) = (m.omega[0].1, m.omega[m.omega.len() - 1].1);
        if !(m.tau_nonincreasing() && increasing && first <= 0.5 * last) {
            return Err(format!("{name}: tau {:?}, omega {:?}", m.tau, m.omega));
        }
        notes.push(format!("{name}: omega {first:.2e} -> {last:.2e}"));
    }
    let one = Weight::one();
    let translates = unit_ball_sampler(2.0, &one, 10, 0, &[SamplerMode::Translates]).map_err(err)?;
    let m = rk_moduli(&OperatorHandle::Identity, &translates, &[0.1], &[2.0, 5.0, 7.5], 2.0).map_err(err)?;
    if !m.tau.iter().all(|(_, t)| (t - 1.0).abs() < 1e-6) {
        return Err(format!("translates: tau {:?}", m.tau));
    }
    let mut dilate_omegas = Vec::new();
    for n in [4, 8, 16] {
        let fam = unit_ball_sampler(2.0, &one, n, 0, &[SamplerMode::Dilates]).map_err(err)?;
        let m = rk_moduli(&OperatorHandle::Identity, &fam, &[0.1], &[1.0], 2.0).map_err(err)?;
        dilate_omegas.push(m.omega[0].1);
    }
    if !dilate_omegas.iter().all(|w| *w >= 1.0) {
        return Err(format!("dilates: omega(0.1) {dilate_omegas:?}"));
    }
    notes.push(format!("translates tau = 1; dilates omega(0.1) = {dilate_omegas:.4?}"));
    Ok(notes.join("; "))
}

fn determinism() -> Verdict {
    let names = [
        "class-constant.json",
        "counterexample.json",
        "interpolate.json",
        "truncation-error.json",
        "rk-moduli-translates.json",
        "commutator-cz.json",
    ];
    let tmp = tempfile::tempdir().map_err(err)?;
    for name in names {
        let c = config(name)?;
        let mut bytes = Vec::new();
        for round in 0..2 {
            let dir = tmp.path().join(format!("{name}-{round}"));
            run(&c, &dir).map_err(err)?;
            bytes.push(std::fs::read(dir.join("report.json")).map_err(err)?);
        }
        if bytes[0] != bytes[1] {
            return Err(format!("{name}: report.json differs between runs"));
        }
    }
    Ok(format!("{} configs byte-identical across reruns", names.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 14] = [
        ("constant-weight A_p^+ exactness", constant_weight_exactness),
        ("e^x one-sidedness", exponential_one_sidedness),
        ("duality identity", duality_identity),
        ("A_pq transfer identity", transfer_identity),
        ("gap lemma dominance", gap_dominance),
        ("interpolation algebra exactness", interpolation_algebra),
        ("endpoint-weight counterexample", endpoint_counterexample),
        ("fractional closed forms", fractional_closed_forms),
        ("fractional smoothness bound", fractional_smoothness),
        ("truncation-error linearity", truncation_linearity),
        ("translation-continuity exponent", translation_exponent),
        ("tail-decay slope", tail_slope),
        ("RK moduli contract", moduli_contract),
        ("end-to-end determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name} ({secs:.1}s): {detail}", i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
