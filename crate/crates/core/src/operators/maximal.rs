//! One-sided, two-sided and measure-weighted maximal functions sampled on a
//! ladder of interval lengths.

use serde::{Deserialize, Serialize};

use crate::weights::Weight;

use super::apply::operator_integrator;
use super::sampled::SampledFunction;
use super::OperatorError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MaximalVariant {
    /// `sup_h (1/h) ∫_x^{x+h} |f|`.
    Plus,
    /// `sup_h (1/h) ∫_{x-h}^x |f|`.
    Minus,
    /// `sup_{I ∋ x} (avg_I |f|^{r'})^{1/r'}` over intervals `(x - h₁, x + h₂)`.
    RPower { r_prime: f64 },
    /// Uncentred two-sided Hardy–Littlewood function; `RPower` with `r' = 1`.
    TwoSided,
    /// `sup_{y < x} (1/μ(y, x)) ∫_y^x |f| dμ` with `dμ = density(t) dt`.
    MeasureMinus { density: Weight },
}

/// Lengths `2^{k/4}`, `k = -40..=40`.
pub fn default_h_ladder() -> Vec<f64> {
    (-40..=40).map(|k| 2f64.powf(k as f64 / 4.0)).collect()
}

fn check_ladder(ladder: &[f64]) -> Result<(), OperatorError> {
    if ladder.is_empty() || ladder.iter().any(|h| !(*h > 0.0) || !h.is_finite()) || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(OperatorError::InvalidParams("h ladder must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// `∫_lo^hi |f|^power · density`, clipped to the support of `f`.
fn band(f: &SampledFunction, power: f64, density: Option<&Weight>, lo: f64, hi: f64) -> Result<f64, OperatorError> {
    let lo = lo.max(f.support[0]);
    let hi = hi.min(f.support[1]);
    if !(lo < hi) {
        return Ok(0.0);
    }
    let mut breaks = f.breakpoints();
    if let Some(w) = density {
        breaks.extend(w.breakpoints());
        breaks.extend(w.singular_points());
    }
    breaks.retain(|b| *b > lo && *b < hi);
    let g = |y: f64| {
        let v = f.eval(y).abs();
        if v == 0.0 {
            return 0.0;
        }
        let v = if power == 1.0 { v } else { v.powf(power) };
        match density {
            Some(w) => v * w.eval(y),
            None => v,
        }
    };
    Ok(operator_integrator().integrate(&g, lo, hi, &breaks, None)?.value)
}

/// Cumulative `∫` of `|f|^power` over `(x, x + h_k)` (or `(x - h_k, x)` when
/// `backward`) for each ladder length.
fn cumulative(f: &SampledFunction, power: f64, x: f64, ladder: &[f64], backward: bool) -> Result<Vec<f64>, OperatorError> {
    let mut out = Vec::with_capacity(ladder.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &h in ladder {
        acc += if backward { band(f, power, None, x - h, x - prev)? } else { band(f, power, None, x + prev, x + h)? };
        out.push(acc);
        prev = h;
    }
    Ok(out)
}

pub fn maximal(f: &SampledFunction, variant: &MaximalVariant, x: f64, ladder: &[f64]) -> Result<f64, OperatorError> {
    check_ladder(ladder)?;
    if f.support_len() <= 0.0 {
        return Ok(0.0);
    }
    match variant {
        MaximalVariant::Plus | MaximalVariant::Minus => {
            let sums = cumulative(f, 1.0, x, ladder, matches!(variant, MaximalVariant::Minus))?;
            Ok(sums.iter().zip(ladder).map(|(s, h)| s / h).fold(0.0, f64::max))
        }
        MaximalVariant::TwoSided => two_sided(f, 1.0, x, ladder),
        MaximalVariant::RPower { r_prime } => {
            if !(*r_prime >= 1.0) || !r_prime.is_finite() {
                return Err(OperatorError::InvalidParams(format!("r' must be at least 1, got {r_prime}")));
            }
            two_sided(f, *r_prime, x, ladder)
        }
        MaximalVariant::MeasureMinus { density } => {
            density.validate()?;
            let mut best = 0.0f64;
            let (mut num, mut den, mut prev) = (0.0, 0.0, 0.0);
            for &h in ladder {
                num += band(f, 1.0, Some(density), x - h, x - prev)?;
                den += density.log_integral(1.0, x - h, x - prev)?.log_value.exp();
                prev = h;
                if den > 0.0 {
                    best = best.max(num / den);
                }
            }
            Ok(best)
        }
    }
}

fn two_sided(f: &SampledFunction, power: f64, x: f64, ladder: &[f64]) -> Result<f64, OperatorError> {
    let right = cumulative(f, power, x, ladder, false)?;
    let left = cumulative(f, power, x, ladder, true)?;
    let mut best = 0.0f64;
    // index 0 stands for the degenerate side of length 0
    for i in 0..=ladder.len() {
        let (li, hi_) = if i == 0 { (0.0, 0.0) } else { (left[i - 1], ladder[i - 1]) };
        for j in 0..=ladder.len() {
            if i == 0 && j == 0 {
                continue;
            }
            let (rj, hj) = if j == 0 { (0.0, 0.0) } else { (right[j - 1], ladder[j - 1]) };
            best = best.max((li + rj) / (hi_ + hj));
        }
    }
    Ok(if power == 1.0 { best } else { best.powf(1.0 / power) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plus_examples() {
        let chi = SampledFunction::indicator(0.0, 1.0);
        let l = default_h_ladder();
        assert!((maximal(&chi, &MaximalVariant::Plus, -1.0, &l).unwrap() - 0.5).abs() < 1e-12);
        assert!((maximal(&chi, &MaximalVariant::Plus, 0.5, &l).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(maximal(&chi, &MaximalVariant::Plus, 2.0, &l).unwrap(), 0.0);
        assert!((maximal(&chi, &MaximalVariant::Minus, 2.0, &l).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_sided_dominates_one_sided() {
        let f = SampledFunction::c1_bump(0.0, 1.0);
        let l = default_h_ladder();
        for x in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            let p = maximal(&f, &MaximalVariant::Plus, x, &l).unwrap();
            let m = maximal(&f, &MaximalVariant::Minus, x, &l).unwrap();
            let t = maximal(&f, &MaximalVariant::TwoSided, x, &l).unwrap();
            assert!(t >= p.max(m) - 1e-14 && t <= 1.0 + 1e-12);
            let r = maximal(&f, &MaximalVariant::RPower { r_prime: 2.0 }, x, &l).unwrap();
            assert!(r >= t - 1e-12, "Hölder");
        }
    }

    #[test]
    fn measure_minus_with_lebesgue_is_minus() {
        let f = SampledFunction::c1_bump(0.0, 1.0);
        let l = default_h_ladder();
        let mu = MaximalVariant::MeasureMinus { density: Weight::one() };
        for x in [0.2, 1.5] {
            let a = maximal(&f, &mu, x, &l).unwrap();
            let b = maximal(&f, &MaximalVariant::Minus, x, &l).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn zero_function() {
        let z = SampledFunction::zero(crate::operators::UniformGrid::standard());
        assert_eq!(maximal(&z, &MaximalVariant::Plus, 0.0, &default_h_ladder()).unwrap(), 0.0);
    }
}
