//! Log-domain integrals of real powers of a weight.

use crate::numerics::{EndpointSingularity, Integrator, LogIntegral, NumericsError, QuadOptions};

use super::expr::{Side, Weight};

/// Quadrature settings used for every weight integral.
pub fn weight_integrator() -> Integrator {
    Integrator::new(QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-11,
        max_evals: 60_000,
    })
}

impl Weight {
    /// `ln ∫_lo^hi w^k`, split at power centres and piecewise breaks; power
    /// singularities sitting on a piece endpoint are removed by substitution.
    pub fn log_integral(&self, k: f64, lo: f64, hi: f64) -> Result<LogIntegral, NumericsError> {
        self.log_integral_with(&weight_integrator(), k, lo, hi)
    }

    pub fn log_integral_with(&self, integrator: &Integrator, k: f64, lo: f64, hi: f64) -> Result<LogIntegral, NumericsError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(NumericsError::InvalidInterval { lo, hi });
        }
        let centers = self.singular_points();
        let mut cuts: Vec<f64> = centers
            .iter()
            .chain(self.breakpoints().iter())
            .copied()
            .filter(|x| *x > lo && *x < hi)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut nodes = Vec::with_capacity(cuts.len() + 2);
        nodes.push(lo);
        nodes.extend(cuts);
        nodes.push(hi);

        let is_center = |x: f64| centers.contains(&x);
        let mut segments: Vec<(f64, f64, Option<EndpointSingularity>, Option<f64>)> = Vec::new();
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            let beta_a = if is_center(a) { k * self.local_exponent(a, Side::Right) } else { 0.0 };
            let beta_b = if is_center(b) { k * self.local_exponent(b, Side::Left) } else { 0.0 };
            if beta_a <= -1.0 {
                return Err(NumericsError::NonIntegrable { at: a });
            }
            if beta_b <= -1.0 {
                return Err(NumericsError::NonIntegrable { at: b });
            }
            match (beta_a != 0.0, beta_b != 0.0) {
                (true, true) => {
                    let m = 0.5 * (a + b);
                    segments.push((a, m, Some(EndpointSingularity::lower(beta_a)), Some(a)));
                    segments.push((m, b, Some(EndpointSingularity::upper(beta_b)), Some(b)));
                }
                (true, false) => segments.push((a, b, Some(EndpointSingularity::lower(beta_a)), Some(a))),
                (false, true) => segments.push((a, b, Some(EndpointSingularity::upper(beta_b)), Some(b))),
                (false, false) => segments.push((a, b, None, None)),
            }
        }

        let mut parts = Vec::with_capacity(segments.len());
        for (a, b, sing, anchor) in segments {
            let log_f = |y: f64, d: f64| {
                let hint = anchor.map(|x0| (x0, d));
                k * self.log_eval_near(y, hint)
            };
            parts.push(integrator.integrate_log_with_distance(&log_f, a, b, &[], sing)?);
        }
        Ok(log_sum(&parts))
    }

    /// `ln` of the average of `w^k` over `(lo, hi)`.
    pub fn log_average(&self, k: f64, lo: f64, hi: f64) -> Result<f64, NumericsError> {
        Ok(self.log_integral(k, lo, hi)?.log_value - (hi - lo).ln())
    }
}

fn log_sum(parts: &[LogIntegral]) -> LogIntegral {
    let top = parts.iter().map(|p| p.log_value).fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return LogIntegral {
            log_value: f64::NEG_INFINITY,
            rel_error: 0.0,
            evaluations: parts.iter().map(|p| p.evaluations).sum(),
            converged: parts.iter().all(|p| p.converged),
        };
    }
    let mut sum = 0.0;
    let mut err = 0.0;
    for p in parts {
        let scaled = (p.log_value - top).exp();
        sum += scaled;
        err += scaled * p.rel_error;
    }
    LogIntegral {
        log_value: top + sum.ln(),
        rel_error: err / sum,
        evaluations: parts.iter().map(|p| p.evaluations).sum(),
        converged: parts.iter().all(|p| p.converged),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_integral() {
        let w = Weight::exp_linear(1);
        let li = w.log_integral(1.0, 0.0, 1.0).unwrap();
        assert!((li.log_value.exp() - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn interior_power_singularity() {
        // ∫_{-1}^{1} |x|^{-1/2} = 4
        let w = Weight::power(0.0, -0.5);
        let li = w.log_integral(1.0, -1.0, 1.0).unwrap();
        assert!((li.log_value.exp() - 4.0).abs() < 1e-10, "{}", li.log_value.exp());
    }

    #[test]
    fn off_origin_singularity_keeps_accuracy() {
        // ∫_{1}^{3} |x - 3|^{-3/4} = 4 · 2^{1/4}
        let w = Weight::power(3.0, -0.75);
        let li = w.log_integral(1.0, 1.0, 3.0).unwrap();
        let exact = 4.0 * 2f64.powf(0.25);
        assert!((li.log_value.exp() - exact).abs() < 1e-10 * exact, "{}", li.log_value.exp());
    }

    #[test]
    fn powered_singularity_detected() {
        let w = Weight::power(0.0, 0.5);
        assert!(matches!(w.log_integral(-2.0, -1.0, 1.0), Err(NumericsError::NonIntegrable { at }) if at == 0.0));
        // k = -1.5 gives exponent -0.75: integrable, ∫_0^1 x^{-3/4} = 4
        let li = w.log_integral(-1.5, 0.0, 1.0).unwrap();
        assert!((li.log_value.exp() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn huge_exponents_stay_finite_in_log_domain() {
        let w = Weight::exp_poly([0, 0, 0, 1]);
        let li = w.log_integral(2.0, 7.0, 8.0).unwrap();
        // dominated by the right end: ∫ e^{2x³} ≈ e^{1024}/(6·64)
        assert!((li.log_value - (1024.0 - (384f64).ln())).abs() < 1e-2, "{}", li.log_value);
    }

    #[test]
    fn piecewise_breaks_respected() {
        let w = Weight::piecewise(vec![0.0], vec![Weight::one(), Weight::constant(3.0)]);
        let li = w.log_integral(1.0, -1.0, 2.0).unwrap();
        assert!((li.log_value.exp() - 7.0).abs() < 1e-12);
    }
}
