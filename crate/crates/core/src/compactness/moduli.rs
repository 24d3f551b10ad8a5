//! The three Riesz–Kolmogorov moduli of `{T f : f ∈ family}`: size,
//! translation modulus and tail.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numerics::{Integrator, QuadOptions};
use crate::operators::{apply_kernel, commutator, ApplyMode, OneSidedKernel, SampledFunction};
use crate::weights::Weight;

use super::family::TestFamily;
use super::CompactnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OperatorHandle {
    Identity,
    Kernel { kernel: OneSidedKernel, mode: ApplyMode },
    Commutator { symbol: SampledFunction, kernel: OneSidedKernel, mode: ApplyMode },
}

impl OperatorHandle {
    pub fn eval(&self, f: &SampledFunction, x: f64) -> Result<f64, CompactnessError> {
        Ok(match self {
            Self::Identity => f.eval(x),
            Self::Kernel { kernel, mode } => apply_kernel(kernel, f, x, *mode)?,
            Self::Commutator { symbol, kernel, mode } => commutator(symbol, kernel, f, x, *mode)?,
        })
    }

    /// Points where `x ↦ (op f)(x)` may fail to be smooth.
    pub fn output_breaks(&self, f: &SampledFunction) -> Vec<f64> {
        let mut base = f.breakpoints();
        let (kernel, symbol) = match self {
            Self::Identity => return base,
            Self::Kernel { kernel, .. } => (kernel, None),
            Self::Commutator { symbol, kernel, .. } => (kernel, Some(symbol)),
        };
        if let Some(b) = symbol {
            base.extend(b.breakpoints());
        }
        let mut out = base.clone();
        if let Some(d) = kernel.delta {
            for b in &base {
                out.push(b - d);
                out.push(b - 2.0 * d);
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Interval outside which `op f` vanishes; forward kernels spread to `-∞`.
    pub fn output_hull(&self, f: &SampledFunction) -> (f64, f64) {
        match self {
            Self::Identity => (f.support[0], f.support[1]),
            _ => (f64::NEG_INFINITY, f.support[1]),
        }
    }
}

/// `G = (op f) · w^{1/p}` together with the data needed to integrate `|G|^s`.
pub struct OutputProfile<'a> {
    op: &'a OperatorHandle,
    f: &'a SampledFunction,
    weight: Option<&'a Weight>,
    p_in: f64,
    breaks: Vec<f64>,
    hull: (f64, f64),
}

fn outer_integrator() -> Integrator {
    Integrator::new(QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-7,
        max_evals: 200_000,
    })
}

impl<'a> OutputProfile<'a> {
    pub fn new(op: &'a OperatorHandle, f: &'a SampledFunction, w: &'a Weight, p_in: f64) -> Self {
        let weight = (!w.same_as(&Weight::one())).then_some(w);
        let mut breaks = op.output_breaks(f);
        if let Some(w) = weight {
            breaks.extend(w.breakpoints());
            breaks.extend(w.singular_points());
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
        }
        Self {
            op,
            f,
            weight,
            p_in,
            breaks,
            hull: op.output_hull(f),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, CompactnessError> {
        let v = self.op.eval(self.f, x)?;
        Ok(match self.weight {
            Some(w) if v != 0.0 => v * (w.log_eval(x) / self.p_in).exp(),
            _ => v,
        })
    }

    /// `∫_lo^hi |G(x + shift) - G(x)|^s` (or `|G|^s` without shift), clipped
    /// to where the integrand can be non-zero.
    fn band(&self, s: f64, lo: f64, hi: f64, shift: Option<f64>) -> Result<f64, CompactnessError> {
        let (h_lo, h_hi) = self.hull;
        let (lo, hi) = match shift {
            None => (lo.max(h_lo), hi.min(h_hi)),
            Some(h) => (lo.max(h_lo - h.abs()), hi.min(h_hi + h.abs())),
        };
        if !(lo < hi) {
            return Ok(0.0);
        }
        let mut breaks: Vec<f64> = self.breaks.clone();
        if let Some(h) = shift {
            breaks.extend(self.breaks.iter().map(|b| b - h));
        }
        breaks.retain(|b| *b > lo && *b < hi);
        let failure = RefCell::new(None);
        let g = |x: f64| {
            let v = match shift {
                None => self.eval(x),
                Some(h) => self.eval(x + h).and_then(|a| Ok(a - self.eval(x)?)),
            };
            match v {
                Ok(v) => v.abs().powf(s),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };
        let est = outer_integrator().integrate(&g, lo, hi, &breaks, None);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(est?.value)
    }

    /// `‖G‖_s`.
    pub fn norm(&self, s: f64) -> Result<f64, CompactnessError> {
        Ok(self.band(s, f64::NEG_INFINITY, f64::INFINITY, None)?.powf(1.0 / s))
    }

    /// `‖G(· + h) - G‖_s`.
    pub fn translation(&self, s: f64, h: f64) -> Result<f64, CompactnessError> {
        if h == 0.0 {
            return Ok(0.0);
        }
        Ok(self.band(s, f64::NEG_INFINITY, f64::INFINITY, Some(h))?.powf(1.0 / s))
    }

    /// `‖G χ_{|x| > M}‖_s` for every `M` in the increasing grid, from one
    /// sweep of bands `M_k < |x| < M_{k+1}`, plus the full norm.
    pub fn tails(&self, s: f64, grid: &[f64]) -> Result<(Vec<f64>, f64), CompactnessError> {
        let n = grid.len();
        let mut acc = vec![0.0; n];
        if n > 0 {
            let last = grid[n - 1];
            acc[n - 1] = self.band(s, f64::NEG_INFINITY, -last, None)? + self.band(s, last, f64::INFINITY, None)?;
            for k in (0..n - 1).rev() {
                let (a, b) = (grid[k], grid[k + 1]);
                acc[k] = acc[k + 1] + self.band(s, -b, -a, None)? + self.band(s, a, b, None)?;
            }
        }
        let full = match grid.first() {
            Some(&m0) => acc[0] + self.band(s, -m0, m0, None)?,
            None => self.band(s, f64::NEG_INFINITY, f64::INFINITY, None)?,
        };
        Ok((acc.into_iter().map(|v| v.powf(1.0 / s)).collect(), full.powf(1.0 / s)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactnessModuli {
    #[serde(rename = "B")]
    pub bound_b: f64,
    /// `(h, sup_f ‖T f(· + h) - T f‖)`.
    pub omega: Vec<(f64, f64)>,
    /// `(M, sup_f ‖T f χ_{|x| > M}‖)`.
    pub tau: Vec<(f64, f64)>,
    /// Output exponent the norms are taken in.
    pub exponent: f64,
}

impl CompactnessModuli {
    pub fn tau_nonincreasing(&self) -> bool {
        self.tau.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-300)
    }

    pub fn omega_nondecreasing(&self) -> bool {
        self.omega.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-9))
    }
}

fn check_grid(name: &str, grid: &[f64], allow_zero: bool) -> Result<(), CompactnessError> {
    let ok_point = |x: &f64| x.is_finite() && (*x > 0.0 || (allow_zero && *x == 0.0));
    if !grid.iter().all(ok_point) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CompactnessError::InvalidParams(format!("{name} grid must be non-negative and strictly increasing")));
    }
    Ok(())
}

/// Maximum with the lowest index winning ties.
fn sup(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// Moduli of `{op f}` over the family, in `L^s` after the density transfer
/// `G = (op f) · w^{1/p}`.
pub fn rk_moduli(
    op: &OperatorHandle,
    family: &TestFamily,
    h_grid: &[f64],
    m_grid: &[f64],
    out_exponent: f64,
) -> Result<CompactnessModuli, CompactnessError> {
    check_grid("h", h_grid, true)?;
    check_grid("M", m_grid, true)?;
    if !(out_exponent >= 1.0) || !out_exponent.is_finite() {
        return Err(CompactnessError::InvalidParams(format!("output exponent must be in [1, ∞), got {out_exponent}")));
    }
    let w = family.weight();
    let p = family.p();
    let per_member: Vec<(Vec<f64>, Vec<f64>, f64)> = family
        .members
        .par_iter()
        .map(|f| {
            let prof = OutputProfile::new(op, f, w, p);
            let omega = h_grid.iter().map(|&h| prof.translation(out_exponent, h)).collect::<Result<Vec<_>, _>>()?;
            let (tau, full) = prof.tails(out_exponent, m_grid)?;
            Ok((omega, tau, full))
        })
        .collect::<Result<_, CompactnessError>>()?;
    let column = |pick: &dyn Fn(&(Vec<f64>, Vec<f64>, f64)) -> f64| sup(&per_member.iter().map(pick).collect::<Vec<_>>());
    let omega = h_grid.iter().enumerate().map(|(i, &h)| (h, column(&|m| m.0[i]))).collect();
    let tau = m_grid.iter().enumerate().map(|(i, &m)| (m, column(&|m_| m_.1[i]))).collect();
    Ok(CompactnessModuli {
        bound_b: column(&|m| m.2),
        omega,
        tau,
        exponent: out_exponent,
    })
}
