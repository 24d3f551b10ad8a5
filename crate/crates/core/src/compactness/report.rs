//! One-call compactness diagnostics for a commutator `[b, T]`.

use serde::{Deserialize, Serialize};

use crate::operators::{make_kernel, truncate_kernel, ApplyMode, HormanderParams, KernelKind, SampledFunction};
use crate::weights::Weight;

use super::experiments::{judge_tail, judge_translation, support_radius, translation_bound_exponent};
use super::family::{unit_ball_sampler, FamilyProvenance, SamplerMode};
use super::fit::FitReport;
use super::moduli::{rk_moduli, CompactnessModuli, OperatorHandle};
use super::CompactnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompactnessOperator {
    /// `[b, I_α^+]` from `L^p` to `L^q`, with `1/q = 1/p - α`.
    Fractional { alpha: f64, p: f64, q: f64 },
    /// `[b, H^δ]` on `L^p` for the truncated one-sided Hilbert kernel.
    TruncatedCz {
        p: f64,
        delta: f64,
        hormander: HormanderParams,
    },
}

/// Relative tolerance on `1/q = 1/p - α`.
pub const EXPONENT_RELATION_TOLERANCE: f64 = 1e-9;

impl CompactnessOperator {
    pub fn input_exponent(&self) -> f64 {
        match *self {
            Self::Fractional { p, .. } | Self::TruncatedCz { p, .. } => p,
        }
    }

    pub fn output_exponent(&self) -> f64 {
        match *self {
            Self::Fractional { q, .. } => q,
            Self::TruncatedCz { p, .. } => p,
        }
    }

    pub fn validate(&self) -> Result<(), CompactnessError> {
        match *self {
            Self::Fractional { alpha, p, q } => {
                let relation = (1.0 / q - (1.0 / p - alpha)).abs() <= EXPONENT_RELATION_TOLERANCE;
                if !(1.0 < p && p < q && q.is_finite()) || !(alpha > 0.0 && alpha < 1.0) || !relation {
                    return Err(CompactnessError::ExponentRelationViolated { p, q, alpha });
                }
            }
            Self::TruncatedCz { p, delta, hormander } => {
                if !(p > 1.0) || !p.is_finite() {
                    return Err(CompactnessError::InvalidParams(format!("need 1 < p < ∞, got {p}")));
                }
                truncate_kernel(&make_kernel(KernelKind::CzHilbert, Some(hormander))?, delta)?;
            }
        }
        Ok(())
    }

    fn handle(&self, b: &SampledFunction) -> Result<OperatorHandle, CompactnessError> {
        let kernel = match *self {
            Self::Fractional { alpha, .. } => make_kernel(KernelKind::Fractional { alpha }, None)?,
            Self::TruncatedCz { delta, hormander, .. } => {
                truncate_kernel(&make_kernel(KernelKind::CzHilbert, Some(hormander))?, delta)?
            }
        };
        Ok(OperatorHandle::Commutator {
            symbol: b.clone(),
            kernel,
            mode: ApplyMode::Truncated,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub count: usize,
    pub seed: u64,
    pub modes: Vec<SamplerMode>,
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self {
            count: 32,
            seed: 0,
            modes: vec![SamplerMode::RandomBumps, SamplerMode::Indicators],
        }
    }
}

/// Upper bound demanded of `tau` at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauTarget {
    pub m: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompactnessConfig {
    pub family: FamilySpec,
    pub h_grid: Vec<f64>,
    pub m_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_target: Option<TauTarget>,
    /// Slack on fitted exponents.
    pub exponent_slack: f64,
}

/// Geometric grid of `n` points from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| if i + 1 == n { hi } else { lo * ratio.powi(i as i32) }).collect()
}

impl Default for CompactnessConfig {
    fn default() -> Self {
        Self {
            family: FamilySpec::default(),
            h_grid: geometric_grid(1e-3, 1.25e-2, 6),
            m_grid: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            tau_target: None,
            exponent_slack: super::experiments::EXPONENT_SLACK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub name: String,
    pub exponent: f64,
    pub constant: f64,
    pub residual: f64,
    pub exact_zero: bool,
    pub threshold: Option<f64>,
    pub pass: bool,
}

impl From<&FitReport> for FitSummary {
    fn from(f: &FitReport) -> Self {
        Self {
            name: f.name.clone(),
            exponent: f.fitted_exponent,
            constant: f.fitted_constant,
            residual: f.residual,
            exact_zero: f.exact_zero,
            threshold: f.threshold,
            pass: f.passed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        pass,
        detail,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub operator: CompactnessOperator,
    pub config: CompactnessConfig,
    pub family_provenance: FamilyProvenance,
    pub transfer: String,
    pub moduli: CompactnessModuli,
    pub fits: Vec<FitSummary>,
    pub checks: Vec<Check>,
    pub caveats: Vec<String>,
    pub passed: bool,
}

/// Rows of `f64` for CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }
}

impl ExperimentReport {
    pub fn tables(&self) -> Vec<Table> {
        let pairs = |v: &[(f64, f64)]| v.iter().map(|(a, b)| vec![*a, *b]).collect();
        vec![
            Table::new("omega", &["h", "omega"], pairs(&self.moduli.omega)),
            Table::new("tau", &["M", "tau"], pairs(&self.moduli.tau)),
        ]
    }
}

fn strictly_increasing(v: &[(f64, f64)]) -> bool {
    v.windows(2).all(|w| w[0].1 < w[1].1)
}

/// Samples the unit ball of `L^p(w)`, computes the moduli of `[b, T]` and
/// judges them.
pub fn commutator_compactness_report(
    b: &SampledFunction,
    operator: CompactnessOperator,
    w: &Weight,
    config: &CompactnessConfig,
) -> Result<ExperimentReport, CompactnessError> {
    operator.validate()?;
    b.validate()?;
    let p = operator.input_exponent();
    let s = operator.output_exponent();
    let spec = &config.family;
    let family = unit_ball_sampler(p, w, spec.count, spec.seed, &spec.modes)?;
    let op = operator.handle(b)?;
    let moduli = rk_moduli(&op, &family, &config.h_grid, &config.m_grid, s)?;

    let mut fits = Vec::new();
    let mut caveats = vec![
        format!("finite family of {} members: the moduli are necessary evidence only, not a proof of compactness", spec.count),
        "tails are measured as M grows to infinity".to_string(),
    ];
    let size_exponent = match operator {
        CompactnessOperator::Fractional { alpha, .. } => {
            caveats.push("exponents tied by 1/q = 1/p - alpha with 1 < p < q".into());
            1.0 - alpha
        }
        CompactnessOperator::TruncatedCz { delta, .. } => {
            if let OperatorHandle::Commutator { kernel, .. } = &op {
                let bound = translation_bound_exponent(kernel)?;
                let small: Vec<(f64, f64)> = moduli.omega.iter().copied().filter(|(h, _)| *h > 0.0 && *h < delta / 4.0).collect();
                if small.len() >= 2 {
                    let fit = judge_translation(&small, bound + super::experiments::EXPONENT_SLACK - config.exponent_slack)?;
                    fits.push(FitSummary::from(&fit));
                } else {
                    caveats.push("fewer than two h-grid points below delta/4: translation exponent not fitted".into());
                }
            }
            1.0
        }
    };
    let r0 = support_radius(b);
    let far: Vec<(f64, f64)> = moduli.tau.iter().copied().filter(|(m, _)| *m > r0).collect();
    if far.len() >= 2 {
        let decay = size_exponent - 1.0 / s;
        let fit = judge_tail(&far, decay + super::experiments::EXPONENT_SLACK - config.exponent_slack)?;
        fits.push(FitSummary::from(&fit));
    } else {
        caveats.push("fewer than two M-grid points beyond the symbol's support: tail slope not fitted".into());
    }

    let all_zero = moduli.omega.iter().all(|(_, v)| *v == 0.0);
    let mut checks = vec![
        check("B finite", moduli.bound_b.is_finite(), format!("B = {}", moduli.bound_b)),
        check("tau non-increasing in M", moduli.tau_nonincreasing(), format!("{:?}", moduli.tau)),
        check("omega non-decreasing in h", moduli.omega_nondecreasing(), format!("{:?}", moduli.omega)),
        check(
            "omega decreasing as h -> 0",
            all_zero || strictly_increasing(&moduli.omega),
            if all_zero { "identically zero".into() } else { format!("{:?}", moduli.omega) },
        ),
    ];
    if let Some(t) = config.tau_target {
        let at = moduli.tau.iter().find(|(m, _)| *m >= t.m).copied();
        let (pass, detail) = match at {
            Some((m, v)) => (v <= t.max, format!("tau({m}) = {v}, target {}", t.max)),
            None => (false, format!("no M-grid point at or beyond {}", t.m)),
        };
        checks.push(check("tau target", pass, detail));
    }
    for f in &fits {
        checks.push(check(&format!("{} fit", f.name), f.pass, format!("exponent {} vs threshold {:?}", f.exponent, f.threshold)));
    }
    let transfer = if w.same_as(&Weight::one()) {
        "unweighted: norms of T f taken directly".to_string()
    } else {
        format!("density transfer G = (T f) w^(1/{p}); unweighted L^{s} norms of G")
    };
    let passed = checks.iter().all(|c| c.pass);
    Ok(ExperimentReport {
        operator,
        config: config.clone(),
        family_provenance: family.provenance,
        transfer,
        moduli,
        fits,
        checks,
        caveats,
        passed,
    })
}
