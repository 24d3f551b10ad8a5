//! Quantitative checks on truncated commutators: truncation error in `δ`,
//! translation continuity in `h` and tail decay in `R`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::operators::{commutator, default_h_ladder, maximal, ApplyMode, MaximalVariant, OneSidedKernel, SampledFunction};

use super::family::TestFamily;
use super::fit::{power_fit, FitReport};
use super::moduli::{rk_moduli, OperatorHandle};
use super::CompactnessError;

/// Points sampled per member when none are given.
pub const DEFAULT_X_SAMPLES: usize = 65;

/// Slack on fitted exponents.
pub const EXPONENT_SLACK: f64 = 0.1;

/// Allowed deviation of the fitted `δ`-exponent from 1.
pub const DELTA_SLOPE_SLACK: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationErrorReport {
    pub fit: FitReport,
    /// `(δ, max ratio / δ)`.
    pub constants: Vec<(f64, f64)>,
    /// `max / min` of the per-`δ` constants; 1 when all vanish.
    pub constant_spread: f64,
    /// Every measured value is at most `C δ^e (1 + residual)`.
    pub self_consistent: bool,
}

impl TruncationErrorReport {
    pub fn passed(&self) -> bool {
        self.fit.passed() && self.constant_spread <= 2.0
    }
}

fn check_symbol(b: &SampledFunction) -> Result<(), CompactnessError> {
    b.validate()?;
    if !b.derivative_bound().is_finite() {
        return Err(CompactnessError::PreconditionViolated("symbol must be Lipschitz (C¹ bump or smoother)".into()));
    }
    Ok(())
}

fn family_hull(family: &TestFamily) -> (f64, f64) {
    family
        .members
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f.support[0]), hi.max(f.support[1])))
}

/// For each `δ`, the largest `|[b, T]f(x) - [b, T^δ]f(x)| / (‖b'‖_∞ Mf(x))`
/// over the family and the sample points; fitted against `δ`.
pub fn truncation_error_experiment(
    b: &SampledFunction,
    k: &OneSidedKernel,
    family: &TestFamily,
    delta_grid: &[f64],
    x_samples: Option<&[f64]>,
) -> Result<TruncationErrorReport, CompactnessError> {
    check_symbol(b)?;
    let mut deltas = delta_grid.to_vec();
    deltas.sort_by(f64::total_cmp);
    if deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
        return Err(CompactnessError::PreconditionViolated("delta grid must lie in (0, 1)".into()));
    }
    let full = k.untruncated();
    let truncated = deltas
        .iter()
        .map(|&d| crate::operators::truncate_kernel(&full, d))
        .collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<f64> = match x_samples {
        Some(xs) => xs.to_vec(),
        None => {
            let (lo, hi) = family_hull(family);
            let n = DEFAULT_X_SAMPLES;
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }
    };
    let lip = b.derivative_bound();
    let ladder = default_h_ladder();
    let pairs: Vec<(&SampledFunction, f64)> = family.members.iter().flat_map(|f| xs.iter().map(move |&x| (f, x))).collect();
    let ratios: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(f, x)| {
            let exact = commutator(b, &full, f, x, ApplyMode::Truncated)?;
            let mf = maximal(f, &MaximalVariant::TwoSided, x, &ladder)?;
            truncated
                .iter()
                .map(|kd| {
                    let diff = (exact - commutator(b, kd, f, x, ApplyMode::Truncated)?).abs();
                    Ok(if diff == 0.0 { 0.0 } else { diff / (lip * mf) })
                })
                .collect::<Result<Vec<_>, CompactnessError>>()
        })
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = (0..deltas.len())
        .map(|i| ratios.iter().map(|r| r[i]).fold(0.0, f64::max))
        .collect();
    let fit = power_fit("truncation_error", &deltas, &values)?.judged(1.0, |e, _| (e - 1.0).abs() <= DELTA_SLOPE_SLACK);
    let constants: Vec<(f64, f64)> = deltas.iter().zip(&values).map(|(d, v)| (*d, v / d)).collect();
    let (cmin, cmax) = constants.iter().fold((f64::INFINITY, 0.0f64), |(a, b), c| (a.min(c.1), b.max(c.1)));
    let constant_spread = if cmax == 0.0 { 1.0 } else { cmax / cmin };
    let self_consistent = fit.exact_zero
        || deltas.iter().zip(&values).all(|(d, v)| {
            *v <= fit.fitted_constant * d.powf(fit.fitted_exponent) * (1.0 + fit.residual) * (1.0 + 1e-12)
        });
    Ok(TruncationErrorReport {
        fit,
        constants,
        constant_spread,
        self_consistent,
    })
}

fn truncated_commutator(b: &SampledFunction, k_delta: &OneSidedKernel) -> Result<OperatorHandle, CompactnessError> {
    check_symbol(b)?;
    k_delta.validate()?;
    if k_delta.delta.is_none() {
        return Err(CompactnessError::PreconditionViolated("kernel must be truncated".into()));
    }
    Ok(OperatorHandle::Commutator {
        symbol: b.clone(),
        kernel: *k_delta,
        mode: ApplyMode::Truncated,
    })
}

/// Exponent `min(γ - 1/r', 1)` of the translation bound.
pub fn translation_bound_exponent(k_delta: &OneSidedKernel) -> Result<f64, CompactnessError> {
    let params = k_delta
        .hormander
        .ok_or_else(|| CompactnessError::PreconditionViolated("kernel carries no Hörmander parameters".into()))?;
    let rc = params.r / (params.r - 1.0);
    Ok((params.gamma - 1.0 / rc).min(1.0))
}

pub(crate) fn judge_translation(omega: &[(f64, f64)], bound_exponent: f64) -> Result<FitReport, CompactnessError> {
    let (h, v): (Vec<f64>, Vec<f64>) = omega.iter().copied().unzip();
    Ok(power_fit("translation", &h, &v)?.judged(bound_exponent - EXPONENT_SLACK, |e, t| e >= t))
}

pub(crate) fn judge_tail(tau: &[(f64, f64)], decay: f64) -> Result<FitReport, CompactnessError> {
    let (r, v): (Vec<f64>, Vec<f64>) = tau.iter().copied().unzip();
    Ok(power_fit("tail", &r, &v)?.judged(-decay + EXPONENT_SLACK, |e, t| e <= t))
}

/// Translation modulus of `[b, T^δ]` over the family, in `L^p` with the
/// family's `p`; requires `h < δ/4`.
pub fn translation_fit(
    b: &SampledFunction,
    k_delta: &OneSidedKernel,
    family: &TestFamily,
    h_grid: &[f64],
) -> Result<FitReport, CompactnessError> {
    let op = truncated_commutator(b, k_delta)?;
    let delta = k_delta.delta.unwrap_or_default();
    if h_grid.iter().any(|h| !(*h > 0.0 && *h < delta / 4.0)) {
        return Err(CompactnessError::PreconditionViolated(format!("h grid must lie in (0, δ/4) = (0, {})", delta / 4.0)));
    }
    let bound = translation_bound_exponent(k_delta)?;
    let moduli = rk_moduli(&op, family, h_grid, &[], family.p())?;
    judge_translation(&moduli.omega, bound)
}

/// Largest `|x|` in the support of `b`.
pub fn support_radius(b: &SampledFunction) -> f64 {
    if b.is_zero() {
        return 0.0;
    }
    b.support[0].abs().max(b.support[1].abs())
}

/// Tail norms `‖χ_{|x| > R} [b, T^δ] f‖_p` over the family; requires every
/// `R` beyond the support radius of `b`.
pub fn tail_fit(
    b: &SampledFunction,
    k_delta: &OneSidedKernel,
    family: &TestFamily,
    r_grid: &[f64],
) -> Result<FitReport, CompactnessError> {
    let op = truncated_commutator(b, k_delta)?;
    let r0 = support_radius(b);
    if r_grid.iter().any(|r| !(*r > r0)) {
        return Err(CompactnessError::PreconditionViolated(format!("R grid must lie beyond the symbol's support radius {r0}")));
    }
    let p = family.p();
    let moduli = rk_moduli(&op, family, &[], r_grid, p)?;
    judge_tail(&moduli.tau, k_delta.size_exponent() - 1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compactness::family::{unit_ball_sampler, SamplerMode};
    use crate::operators::{make_kernel, truncate_kernel, HormanderParams, KernelKind, UniformGrid};
    use crate::weights::Weight;

    fn small_family(p: f64) -> TestFamily {
        unit_ball_sampler(p, &Weight::one(), 2, 3, &[SamplerMode::RandomBumps]).unwrap()
    }

    fn hilbert_delta(delta: f64) -> OneSidedKernel {
        let k = make_kernel(KernelKind::CzHilbert, Some(HormanderParams { r: 2.0, gamma: 1.0 })).unwrap();
        truncate_kernel(&k, delta).unwrap()
    }

    #[test]
    fn constant_symbol_has_no_truncation_error() {
        let b = SampledFunction::zero(UniformGrid::standard());
        let k = make_kernel(KernelKind::CzHilbert, None).unwrap();
        let r = truncation_error_experiment(&b, &k, &small_family(2.0), &[0.1, 0.05], Some(&[0.0, 0.5])).unwrap();
        assert!(r.fit.exact_zero);
        assert!(r.passed());
    }

    #[test]
    fn truncation_error_is_linear() {
        let b = SampledFunction::c1_bump(0.0, 1.0);
        let k = make_kernel(KernelKind::CzHilbert, None).unwrap();
        let xs: Vec<f64> = (0..9).map(|i| -1.5 + 0.35 * i as f64).collect();
        let r = truncation_error_experiment(&b, &k, &small_family(2.0), &[0.025, 0.05, 0.1], Some(&xs)).unwrap();
        assert!((r.fit.fitted_exponent - 1.0).abs() < 0.15, "{:?}", r.fit);
        assert!(r.constant_spread <= 2.0);
    }

    #[test]
    fn guards() {
        let b = SampledFunction::c1_bump(0.0, 2.0);
        let k = hilbert_delta(0.1);
        let fam = small_family(2.0);
        assert!(matches!(tail_fit(&b, &k, &fam, &[1.0, 4.0]), Err(CompactnessError::PreconditionViolated(_))));
        assert!(matches!(translation_fit(&b, &k, &fam, &[0.01, 0.05]), Err(CompactnessError::PreconditionViolated(_))));
        let chi = SampledFunction::indicator(0.0, 1.0);
        assert!(matches!(tail_fit(&chi, &k, &fam, &[4.0, 8.0]), Err(CompactnessError::PreconditionViolated(_))));
    }

    #[test]
    fn zero_symbol_moduli_vanish() {
        let b = SampledFunction::zero(UniformGrid::standard());
        let k = hilbert_delta(0.1);
        let fam = small_family(2.0);
        assert!(translation_fit(&b, &k, &fam, &[0.005, 0.01]).unwrap().exact_zero);
        assert!(tail_fit(&b, &k, &fam, &[4.0, 8.0]).unwrap().exact_zero);
    }
}
