//! Sampled checks of kernel smoothness: ring integrals of an `L^r`-Hörmander
//! condition, and the pointwise bound for the fractional kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::apply::operator_integrator;
use super::kernels::{HormanderParams, KernelKind, OneSidedKernel};
use super::OperatorError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HormanderSampleSpec {
    /// Number of balls `B = (c - R, c + R)`.
    pub balls: usize,
    /// Pairs `x, x' ∈ ½B` per ball.
    pub pairs_per_ball: usize,
    /// Rings `A_m(B)` for `m = 1..=max_ring`.
    pub max_ring: u32,
    /// Centres drawn from `[-center_range, center_range]`.
    pub center_range: f64,
    /// Radii drawn log-uniformly from this range.
    pub radius_range: (f64, f64),
    /// Number of pointwise triples for the fractional check.
    pub pointwise_samples: usize,
    pub seed: u64,
}

impl Default for HormanderSampleSpec {
    fn default() -> Self {
        Self {
            balls: 16,
            pairs_per_ball: 4,
            max_ring: 8,
            center_range: 4.0,
            radius_range: (0.05, 2.0),
            pointwise_samples: 10_000,
            seed: 0x5eed,
        }
    }
}

impl HormanderSampleSpec {
    fn validate(&self) -> Result<(), OperatorError> {
        let (lo, hi) = self.radius_range;
        if self.balls == 0 || self.pairs_per_ball == 0 || self.max_ring == 0 || self.pointwise_samples == 0 {
            return Err(OperatorError::InvalidParams("sample counts must be positive".into()));
        }
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) || !(self.center_range >= 0.0) {
            return Err(OperatorError::InvalidParams("need 0 < radius lo <= hi and center_range >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `C |x - x'|^{γ - 1/r'} |B|^{-γ} 2^{-mγ}`.
    Ring,
    /// Maximum of the ring bound and `C |x - x'| |B|^{-(1 + 1/r')} 2^{-(1 + 1/r') m}`.
    TruncatedRing,
    /// `2^{1-α} (|x - x'| / |x - y|)^{1-α} |x - y|^{α-1}` for `|x - y| > 2|x - x'|`.
    Pointwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HormanderCase {
    pub center: f64,
    pub radius: f64,
    pub x: f64,
    pub x_prime: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HormanderReport {
    pub kernel: OneSidedKernel,
    pub params: Option<HormanderParams>,
    pub bound_kind: BoundKind,
    pub samples: usize,
    pub max_ratio: f64,
    /// `max_ratio` times the kernel's size constant: the smallest constant the
    /// samples allow in the bound.
    pub fitted_constant: f64,
    pub worst_case: Option<HormanderCase>,
}

fn ratio(lhs: f64, bound: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / bound
    }
}

/// One ring: `(∫_{A_m(B)} |K(x,y) - K(x',y)|^r dy)^{1/r}` against the claimed bound.
pub fn hormander_ring_case(
    k: &OneSidedKernel,
    params: HormanderParams,
    center: f64,
    radius: f64,
    x: f64,
    x_prime: f64,
    m: u32,
) -> Result<HormanderCase, OperatorError> {
    params.validate()?;
    if !(radius > 0.0) || m == 0 {
        return Err(OperatorError::InvalidGeometry(format!("need radius > 0 and m >= 1, got {radius}, {m}")));
    }
    let half = 0.5 * radius;
    if (x - center).abs() > half || (x_prime - center).abs() > half {
        return Err(OperatorError::InvalidGeometry(format!(
            "x = {x} and x' = {x_prime} must lie in ½B = [{}, {}]",
            center - half,
            center + half
        )));
    }
    let r = params.r;
    let inv_rc = 1.0 - 1.0 / r;
    let gamma = params.gamma;
    let c = k.size_constant;
    let t = (x - x_prime).abs();
    let len_b = 2.0 * radius;
    let two_m = 2f64.powi(m as i32);
    let mut bound = c * t.powf(gamma - inv_rc) * len_b.powf(-gamma) * two_m.powf(-gamma);
    if k.delta.is_some() {
        let e = 1.0 + inv_rc;
        bound = bound.max(c * t * len_b.powf(-e) * two_m.powf(-e));
    }
    let lhs = if t == 0.0 {
        0.0
    } else {
        let inner = radius * two_m / 2.0;
        let outer = radius * two_m;
        let mut breaks = Vec::new();
        if let Some(d) = k.delta {
            for p in [x, x_prime] {
                breaks.extend([p + d, p + 2.0 * d, p - d, p - 2.0 * d]);
            }
        }
        let g = |y: f64| (k.eval(x, y) - k.eval(x_prime, y)).abs().powf(r);
        let integ = operator_integrator();
        let mut total = 0.0;
        for (lo, hi) in [(center + inner, center + outer), (center - outer, center - inner)] {
            let bs: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
            total += integ.integrate(&g, lo, hi, &bs, None)?.value;
        }
        total.powf(1.0 / r)
    };
    Ok(HormanderCase {
        center,
        radius,
        x,
        x_prime,
        ring: Some(m),
        y: None,
        lhs,
        bound,
        ratio: ratio(lhs, bound),
    })
}

/// Pointwise fractional smoothness at one admissible triple.
pub fn fractional_pointwise_case(alpha: f64, x: f64, x_prime: f64, y: f64) -> Result<HormanderCase, OperatorError> {
    let t = (x - x_prime).abs();
    let dist = (x - y).abs();
    if !(dist > 2.0 * t) {
        return Err(OperatorError::InvalidGeometry(format!("need |x - y| > 2|x - x'|, got {dist} and {t}")));
    }
    let k = |a: f64, b: f64| if b > a { (b - a).powf(alpha - 1.0) } else { 0.0 };
    let lhs = (k(x, y) - k(x_prime, y)).abs() + (k(y, x) - k(y, x_prime)).abs();
    let beta = 1.0 - alpha;
    let bound = 2f64.powf(beta) * (t / dist).powf(beta) * dist.powf(-beta);
    Ok(HormanderCase {
        center: x,
        radius: 2.0 * t,
        x,
        x_prime,
        ring: None,
        y: Some(y),
        lhs,
        bound,
        ratio: ratio(lhs, bound),
    })
}

/// Seeded sampled check. Untruncated fractional kernels use the pointwise
/// bound; every other kernel uses ring integrals with `params` (or the
/// kernel's own Hörmander parameters).
pub fn hormander_check(
    k: &OneSidedKernel,
    params: Option<HormanderParams>,
    spec: &HormanderSampleSpec,
) -> Result<HormanderReport, OperatorError> {
    k.validate()?;
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (rlo, rhi) = spec.radius_range;

    let (kind, cases): (BoundKind, Vec<HormanderCase>) = match (k.kind, k.delta) {
        (KernelKind::Fractional { alpha }, None) => {
            let triples: Vec<(f64, f64, f64)> = (0..spec.pointwise_samples)
                .map(|_| {
                    let x = rng.gen_range(-spec.center_range..=spec.center_range);
                    let t = rlo * (rhi / rlo).powf(rng.gen::<f64>());
                    let xp = if rng.gen::<bool>() { x + t } else { x - t };
                    // |x - y| / (2t) log-uniform in (1, 10^4]
                    let factor = 1.0 + 10f64.powf(rng.gen_range(-6.0..4.0));
                    let y = if rng.gen::<bool>() { x + 2.0 * t * factor } else { x - 2.0 * t * factor };
                    (x, xp, y)
                })
                .collect();
            let cases = triples
                .par_iter()
                .map(|&(x, xp, y)| fractional_pointwise_case(alpha, x, xp, y))
                .collect::<Result<_, _>>()?;
            (BoundKind::Pointwise, cases)
        }
        _ => {
            let params = params.or(k.hormander).ok_or_else(|| {
                OperatorError::InvalidParams("ring check needs Hörmander parameters (r, gamma)".into())
            })?;
            let mut jobs = Vec::new();
            for _ in 0..spec.balls {
                let c = rng.gen_range(-spec.center_range..=spec.center_range);
                let radius = rlo * (rhi / rlo).powf(rng.gen::<f64>());
                for _ in 0..spec.pairs_per_ball {
                    let x = c + radius * rng.gen_range(-0.5..=0.5);
                    let xp = c + radius * rng.gen_range(-0.5..=0.5);
                    for m in 1..=spec.max_ring {
                        jobs.push((c, radius, x, xp, m));
                    }
                }
            }
            let cases = jobs
                .par_iter()
                .map(|&(c, radius, x, xp, m)| hormander_ring_case(k, params, c, radius, x, xp, m))
                .collect::<Result<_, _>>()?;
            let kind = if k.delta.is_some() { BoundKind::TruncatedRing } else { BoundKind::Ring };
            (kind, cases)
        }
    };
    let worst = cases
        .iter()
        .copied()
        .fold(None::<HormanderCase>, |acc, c| match acc {
            Some(a) if a.ratio >= c.ratio => Some(a),
            _ => Some(c),
        });
    let max_ratio = worst.map_or(0.0, |w| w.ratio);
    Ok(HormanderReport {
        kernel: *k,
        params: if kind == BoundKind::Pointwise { None } else { params.or(k.hormander) },
        bound_kind: kind,
        samples: cases.len(),
        max_ratio,
        fitted_constant: max_ratio * k.size_constant,
        worst_case: worst,
    })
}
