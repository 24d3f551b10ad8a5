//! Divergence test for `∫_a^∞ w`.

use serde::{Deserialize, Serialize};

use super::expr::Weight;
use super::WeightError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVerdict {
    Convergent,
    Divergent,
}

/// One rung of the ladder: partial integral `∫_a^cutoff w` and the increment
/// since the previous rung, both as natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRung {
    pub cutoff: f64,
    pub log_partial: f64,
    pub log_increment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub verdict: TailVerdict,
    pub a: f64,
    pub rungs: Vec<TailRung>,
}

/// Relative increment below which the tail counts as converged.
pub const CONVERGENCE_RATIO: f64 = 1e-12;
/// Per-rung growth factor and number of consecutive rungs marking divergence.
pub const GROWTH_FACTOR: f64 = 2.0;
pub const GROWTH_RUNGS: usize = 3;

/// Cutoffs `a + 2^k`, `k = 0..count`.
pub fn geometric_cutoffs(a: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| a + 2f64.powi(k as i32)).collect()
}

/// Walks the cutoff ladder until the partial integrals either stop moving
/// (relative increment below `CONVERGENCE_RATIO`) or keep at least doubling
/// for `GROWTH_RUNGS` consecutive rungs.
pub fn tail_integral_probe(w: &Weight, a: f64, cutoffs: &[f64]) -> Result<TailReport, WeightError> {
    w.validate()?;
    if cutoffs.is_empty() || cutoffs[0] <= a || cutoffs.windows(2).any(|c| !(c[0] < c[1])) {
        return Err(WeightError::InvalidSampling("cutoffs must increase strictly from above a".into()));
    }
    let log_growth = GROWTH_FACTOR.ln() - 1e-9;
    let mut rungs: Vec<TailRung> = Vec::with_capacity(cutoffs.len());
    let mut prev = a;
    let mut log_total = f64::NEG_INFINITY;
    let mut growth_run = 0;
    for &c in cutoffs {
        let inc = w.log_integral(1.0, prev, c)?.log_value;
        let new_total = log_add(log_total, inc);
        if rungs.len() >= 1 {
            if inc - new_total < CONVERGENCE_RATIO.ln() {
                rungs.push(TailRung {
                    cutoff: c,
                    log_partial: new_total,
                    log_increment: inc,
                });
                return Ok(TailReport {
                    verdict: TailVerdict::Convergent,
                    a,
                    rungs,
                });
            }
            if new_total - log_total >= log_growth {
                growth_run += 1;
            } else {
                growth_run = 0;
            }
        }
        rungs.push(TailRung {
            cutoff: c,
            log_partial: new_total,
            log_increment: inc,
        });
        if growth_run >= GROWTH_RUNGS {
            return Ok(TailReport {
                verdict: TailVerdict::Divergent,
                a,
                rungs,
            });
        }
        log_total = new_total;
        prev = c;
    }
    Err(WeightError::Inconclusive { rungs })
}

fn log_add(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((x - m).exp() + (y - m).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_diverges() {
        let rep = tail_integral_probe(&Weight::one(), 0.0, &geometric_cutoffs(0.0, 12)).unwrap();
        assert_eq!(rep.verdict, TailVerdict::Divergent);
    }

    #[test]
    fn cubic_decay_converges() {
        let w = Weight::exp_poly([0, 1, 0, -2]);
        let rep = tail_integral_probe(&w, 0.0, &geometric_cutoffs(0.0, 12)).unwrap();
        assert_eq!(rep.verdict, TailVerdict::Convergent);
    }

    #[test]
    fn exponential_diverges() {
        let rep = tail_integral_probe(&Weight::exp_linear(1), 0.0, &geometric_cutoffs(0.0, 12)).unwrap();
        assert_eq!(rep.verdict, TailVerdict::Divergent);
    }

    #[test]
    fn slowly_decaying_is_inconclusive() {
        // ∫ (1+x)^{-1.01} converges far too slowly for the ladder.
        let w = Weight::power(-1.0, -1.01);
        let r = tail_integral_probe(&w, 0.0, &geometric_cutoffs(0.0, 10));
        assert!(matches!(r, Err(WeightError::Inconclusive { .. })), "{r:?}");
    }
}
