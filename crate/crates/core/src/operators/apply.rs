//! Pointwise evaluation of `T f(x) = ∫_{y > x} K(x, y) f(y) dy`, its ε-truncations
//! and commutators `[b, T]`.

use serde::{Deserialize, Serialize};

use crate::numerics::{EndpointSingularity, Integrator, QuadOptions};

use super::kernels::{make_kernel, KernelKind, OneSidedKernel};
use super::sampled::SampledFunction;
use super::OperatorError;

/// Geometric ε-ladder `ε_k = 2^{-k} eps0`, `k = 0..=levels`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpsLadder {
    pub eps0: f64,
    pub levels: usize,
    /// Stop once successive `T_ε` differ by less than `tol · max(1, |T_ε|)`.
    pub tol: f64,
}

impl Default for EpsLadder {
    fn default() -> Self {
        Self {
            eps0: 0.5,
            levels: 48,
            tol: 1e-9,
        }
    }
}

impl EpsLadder {
    fn validate(&self) -> Result<(), OperatorError> {
        if !(self.eps0 > 0.0) || !self.eps0.is_finite() || self.levels == 0 || !(self.tol > 0.0) {
            return Err(OperatorError::InvalidParams("eps ladder needs eps0 > 0, levels >= 1, tol > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ApplyMode {
    /// Plain quadrature; the kernel must be truncated or locally integrable.
    Truncated,
    /// Limit of `T_ε` along the ladder, Richardson-extrapolated.
    PrincipalValue(EpsLadder),
    /// `sup_ε |T_ε f(x)|` over the ladder extended upward to the support.
    MaximalStar(EpsLadder),
}

/// An integrand `g` against the kernel, with its support and kinks.
/// `vanishing_order` is the order to which `g(y)` vanishes as `y → x`
/// (1 for commutator integrands with Lipschitz symbol).
pub struct Integrand<'a> {
    pub eval: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    pub support: [f64; 2],
    pub breaks: Vec<f64>,
    pub vanishing_order: f64,
}

impl<'a> Integrand<'a> {
    pub fn of(f: &'a SampledFunction) -> Self {
        Self {
            eval: Box::new(move |y| f.eval(y)),
            support: f.support,
            breaks: f.breakpoints(),
            vanishing_order: 0.0,
        }
    }

    /// `y ↦ b(y) f(y)`.
    pub fn product(b: &'a SampledFunction, f: &'a SampledFunction) -> Self {
        let mut breaks = f.breakpoints();
        breaks.extend(b.breakpoints());
        Self {
            eval: Box::new(move |y| b.eval(y) * f.eval(y)),
            support: f.support,
            breaks,
            vanishing_order: 0.0,
        }
    }

    /// `y ↦ (b(x) - b(y)) f(y)`.
    pub fn commutator(b: &'a SampledFunction, f: &'a SampledFunction, x: f64) -> Self {
        let bx = b.eval(x);
        let mut breaks = f.breakpoints();
        breaks.extend(b.breakpoints());
        Self {
            eval: Box::new(move |y| (bx - b.eval(y)) * f.eval(y)),
            support: f.support,
            breaks,
            // a piecewise constant symbol only fails to cancel at its jumps
            vanishing_order: if b.derivative_bound().is_finite() || !b.breakpoints().contains(&x) { 1.0 } else { 0.0 },
        }
    }
}

pub(crate) fn operator_integrator() -> Integrator {
    Integrator::new(QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_evals: 400_000,
    })
}

/// `∫ K(x, y) g(y) dy` over gaps `y - x ∈ (cut_lo, cut_hi)`.
fn gap_band(k: &OneSidedKernel, g: &Integrand, x: f64, cut_lo: f64, cut_hi: f64) -> Result<f64, OperatorError> {
    let lo = (x + cut_lo).max(g.support[0]);
    let hi = (x + cut_hi).min(g.support[1]);
    if !(lo < hi) {
        return Ok(0.0);
    }
    let mut breaks: Vec<f64> = g.breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
    if let Some(d) = k.delta {
        breaks.extend([x + d, x + 2.0 * d].into_iter().filter(|b| *b > lo && *b < hi));
    }
    let singular = cut_lo == 0.0 && lo == x && k.delta.is_none();
    let exponent = -k.size_exponent() + g.vanishing_order;
    if singular && exponent <= -1.0 {
        return Err(OperatorError::InvalidParams(
            "kernel is not locally integrable against this integrand; truncate it or use an eps ladder".into(),
        ));
    }
    let sing = (singular && exponent < 0.0).then(|| EndpointSingularity::lower(exponent));
    let integrand = |y: f64, d: f64| {
        let gap = if singular { d } else { y - x };
        let gy = (g.eval)(y);
        if gy == 0.0 {
            0.0
        } else {
            k.at_gap(gap) * gy
        }
    };
    Ok(operator_integrator().integrate_with_distance(&integrand, lo, hi, &breaks, sing)?.value)
}

/// `T g(x)` in the given mode for a general integrand.
pub fn apply_to(k: &OneSidedKernel, g: &Integrand, x: f64, mode: ApplyMode) -> Result<f64, OperatorError> {
    k.validate()?;
    if !x.is_finite() {
        return Err(OperatorError::InvalidParams(format!("evaluation point must be finite, got {x}")));
    }
    match mode {
        ApplyMode::Truncated => {
            if !k.locally_integrable() && g.vanishing_order + 1.0 - k.size_exponent() <= 0.0 {
                return Err(OperatorError::InvalidParams("truncated mode needs a truncated kernel (delta set)".into()));
            }
            gap_band(k, g, x, 0.0, f64::INFINITY)
        }
        ApplyMode::PrincipalValue(ladder) => principal_value(k, g, x, &ladder),
        ApplyMode::MaximalStar(ladder) => maximal_star(k, g, x, &ladder),
    }
}

fn principal_value(k: &OneSidedKernel, g: &Integrand, x: f64, ladder: &EpsLadder) -> Result<f64, OperatorError> {
    ladder.validate()?;
    let mut eps = ladder.eps0;
    let mut t = gap_band(k, g, x, eps, f64::INFINITY)?;
    let mut trail = vec![(eps, t)];
    for _ in 0..ladder.levels {
        let next = 0.5 * eps;
        let inc = gap_band(k, g, x, next, eps)?;
        let t_next = t + inc;
        trail.push((next, t_next));
        if inc.abs() < ladder.tol * t_next.abs().max(1.0) {
            // T_ε = T_0 + c ε + o(ε)
            return Ok(2.0 * t_next - t);
        }
        t = t_next;
        eps = next;
    }
    let keep = trail.len().saturating_sub(6);
    Err(OperatorError::NonConvergentPV {
        x,
        trail: trail.split_off(keep),
    })
}

fn maximal_star(k: &OneSidedKernel, g: &Integrand, x: f64, ladder: &EpsLadder) -> Result<f64, OperatorError> {
    ladder.validate()?;
    let reach = g.support[1] - x;
    if reach <= 0.0 {
        return Ok(0.0);
    }
    let mut eps = ladder.eps0;
    while eps < reach {
        eps *= 2.0;
    }
    let floor = ladder.eps0 * 0.5f64.powi(ladder.levels as i32);
    let mut t = 0.0f64;
    let mut best = 0.0f64;
    while eps > floor {
        let next = 0.5 * eps;
        t += gap_band(k, g, x, next, eps)?;
        best = best.max(t.abs());
        eps = next;
    }
    Ok(best)
}

pub fn apply_kernel(k: &OneSidedKernel, f: &SampledFunction, x: f64, mode: ApplyMode) -> Result<f64, OperatorError> {
    apply_to(k, &Integrand::of(f), x, mode)
}

/// `I_α^+ f(x) = ∫_x^∞ f(y) (y - x)^{α - 1} dy`.
pub fn frac_int_plus(f: &SampledFunction, alpha: f64, x: f64) -> Result<f64, OperatorError> {
    let k = make_kernel(KernelKind::Fractional { alpha }, None)?;
    apply_kernel(&k, f, x, ApplyMode::Truncated)
}

/// `[b, T] f(x)`, computed as `∫ (b(x) - b(y)) K(x, y) f(y) dy` so that the
/// cancellation at `y = x` is exact.
pub fn commutator(
    b: &SampledFunction,
    k: &OneSidedKernel,
    f: &SampledFunction,
    x: f64,
    mode: ApplyMode,
) -> Result<f64, OperatorError> {
    apply_to(k, &Integrand::commutator(b, f, x), x, mode)
}

/// `b(x) T f(x) - T(b f)(x)`, evaluated term by term.
pub fn commutator_difference_form(
    b: &SampledFunction,
    k: &OneSidedKernel,
    f: &SampledFunction,
    x: f64,
    mode: ApplyMode,
) -> Result<f64, OperatorError> {
    let tf = apply_kernel(k, f, x, mode)?;
    let tbf = apply_to(k, &Integrand::product(b, f), x, mode)?;
    Ok(b.eval(x) * tf - tbf)
}
