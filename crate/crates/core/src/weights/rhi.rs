//! Reverse Hölder exponents on half intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expr::Weight;
use super::WeightError;

/// Which half of each interval carries the `w^r` average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhiSide {
    /// Left half, the forward (`A+`) convention.
    LeftHalf,
    /// Right half, the backward (`A-`) convention.
    RightHalf,
}

/// Intervals `(x, x + l)` inside `[-half_width, half_width]`, with `lengths`
/// log-spaced lengths in `[min_length, max_length]` and `positions` evenly
/// spaced left endpoints per length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntervalSampling {
    pub half_width: f64,
    pub min_length: f64,
    pub max_length: f64,
    pub lengths: usize,
    pub positions: usize,
}

impl Default for IntervalSampling {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            min_length: 1e-2,
            max_length: 4.0,
            lengths: 12,
            positions: 17,
        }
    }
}

impl IntervalSampling {
    pub fn intervals(&self) -> Result<Vec<(f64, f64)>, WeightError> {
        let bad = |m: &str| Err(WeightError::InvalidSampling(m.to_string()));
        if !(self.min_length > 0.0) || !(self.max_length >= self.min_length) {
            return bad("need 0 < min_length <= max_length");
        }
        if self.max_length > 2.0 * self.half_width {
            return bad("max_length exceeds the window");
        }
        if self.lengths == 0 || self.positions == 0 {
            return bad("need at least one length and one position");
        }
        let mut out = Vec::with_capacity(self.lengths * self.positions);
        for i in 0..self.lengths {
            let frac = if self.lengths == 1 { 1.0 } else { i as f64 / (self.lengths - 1) as f64 };
            let len = self.min_length * (self.max_length / self.min_length).powf(frac);
            let room = 2.0 * self.half_width - len;
            for j in 0..self.positions {
                let pos = if self.positions == 1 { 0.5 } else { j as f64 / (self.positions - 1) as f64 };
                let lo = -self.half_width + room * pos;
                out.push((lo, lo + len));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhiEstimate {
    pub r: f64,
    pub constant: f64,
    /// Smallest admissible constant for every probed `r`.
    pub constants: Vec<(f64, f64)>,
    /// Interval attaining the constant for the returned `r`.
    pub worst_interval: (f64, f64),
    pub cap: f64,
}

/// Largest `r` on the grid for which `(avg_half w^r)^{1/r} <= C avg_I w` on every
/// sampled interval with `C <= cap`, together with the smallest such `C`.
pub fn rhi_exponent(
    w: &Weight,
    side: RhiSide,
    sampling: &IntervalSampling,
    r_grid: &[f64],
    cap: f64,
) -> Result<RhiEstimate, WeightError> {
    w.validate()?;
    if r_grid.is_empty() || r_grid.iter().any(|r| !(*r > 1.0) || !r.is_finite()) {
        return Err(WeightError::InvalidSampling("r grid must be non-empty with every r > 1".into()));
    }
    let mut grid = r_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let intervals = sampling.intervals()?;

    let base: Vec<f64> = intervals
        .par_iter()
        .map(|&(lo, hi)| w.log_average(1.0, lo, hi))
        .collect::<Result<_, _>>()?;

    let mut constants = Vec::with_capacity(grid.len());
    let mut worst = Vec::with_capacity(grid.len());
    for &r in &grid {
        let ratios: Vec<f64> = intervals
            .par_iter()
            .zip(base.par_iter())
            .map(|(&(lo, hi), &log_avg)| {
                let mid = 0.5 * (lo + hi);
                let (hl, hh) = match side {
                    RhiSide::LeftHalf => (lo, mid),
                    RhiSide::RightHalf => (mid, hi),
                };
                w.log_average(r, hl, hh).map(|lr| (lr / r - log_avg).exp())
            })
            .collect::<Result<_, _>>()?;
        let (idx, c) = ratios
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bc), (i, &c)| if c > bc { (i, c) } else { (bi, bc) });
        constants.push((r, c));
        worst.push(intervals[idx]);
    }

    match constants.iter().rposition(|&(_, c)| c <= cap) {
        Some(i) => Ok(RhiEstimate {
            r: constants[i].0,
            constant: constants[i].1,
            worst_interval: worst[i],
            constants,
            cap,
        }),
        None => Err(WeightError::NoValidExponent {
            r: constants[0].0,
            ratio: constants[0].1,
            lo: worst[0].0,
            hi: worst[0].1,
            cap,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_weight_every_r() {
        let est = rhi_exponent(&Weight::one(), RhiSide::LeftHalf, &IntervalSampling::default(), &[1.5, 2.0, 4.0], 1.0 + 1e-9).unwrap();
        assert_eq!(est.r, 4.0);
        assert!((est.constant - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exponential_on_left_halves() {
        let est = rhi_exponent(&Weight::exp_linear(1), RhiSide::LeftHalf, &IntervalSampling::default(), &[1.1, 1.5, 2.0], 10.0).unwrap();
        assert!(est.r > 1.0 && est.constant.is_finite() && est.constant <= 1.0 + 1e-6, "{est:?}");
    }

    #[test]
    fn exponential_on_wrong_side_fails() {
        let sampling = IntervalSampling {
            max_length: 16.0,
            ..IntervalSampling::default()
        };
        let err = rhi_exponent(&Weight::exp_linear(1), RhiSide::RightHalf, &sampling, &[1.01, 1.1, 1.5, 2.0], 2.0).unwrap_err();
        match err {
            WeightError::NoValidExponent { hi, lo, ratio, .. } => {
                assert!(ratio > 2.0);
                assert!(hi - lo > 8.0);
            }
            e => panic!("{e:?}"),
        }
    }
}
