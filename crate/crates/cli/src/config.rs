//! Experiment configs: one JSON object with an `experiment` tag, an optional
//! `output_dir`, and the experiment's inputs. Unknown fields are rejected.

use serde::{Deserialize, Serialize};

use onesided_core::compactness::{
    CompactnessConfig, CompactnessOperator, FamilySpec, OperatorHandle, SamplerMode,
};
use onesided_core::extrapolation::PlanSkeleton;
use onesided_core::numerics::SearchSpec;
use onesided_core::operators::{
    make_kernel, truncate_kernel, ApplyMode, HormanderParams, HormanderSampleSpec, KernelKind, OneSidedKernel,
    SampledFunction, Term, UniformGrid,
};
use onesided_core::weights::{ClassExponents, ClassTag, IntervalSampling, RhiSide, Scalar, Weight};

use crate::LabError;

fn one() -> Weight {
    Weight::one()
}

/// Sum of closed-form terms sampled on the standard grid; `[]` is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionSpec(pub Vec<Term>);

impl FunctionSpec {
    pub fn build(&self) -> Result<SampledFunction, LabError> {
        SampledFunction::from_terms(self.0.clone(), UniformGrid::standard()).map_err(|e| LabError::invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub kind: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hormander: Option<HormanderParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl KernelSpec {
    pub fn build(&self) -> Result<OneSidedKernel, LabError> {
        let k = make_kernel(self.kind, self.hormander).map_err(|e| LabError::invalid(e.to_string()))?;
        match self.delta {
            Some(d) => truncate_kernel(&k, d).map_err(|e| LabError::invalid(e.to_string())),
            None => Ok(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub p: f64,
    #[serde(default = "one")]
    pub weight: Weight,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    pub modes: Vec<SamplerMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Identity,
    Kernel {
        kernel: KernelSpec,
        #[serde(default = "truncated")]
        mode: ApplyMode,
    },
    Commutator {
        symbol: FunctionSpec,
        kernel: KernelSpec,
        #[serde(default = "truncated")]
        mode: ApplyMode,
    },
}

fn truncated() -> ApplyMode {
    ApplyMode::Truncated
}

impl OperatorSpec {
    pub fn build(&self) -> Result<OperatorHandle, LabError> {
        Ok(match self {
            Self::Identity => OperatorHandle::Identity,
            Self::Kernel { kernel, mode } => OperatorHandle::Kernel {
                kernel: kernel.build()?,
                mode: *mode,
            },
            Self::Commutator { symbol, kernel, mode } => OperatorHandle::Commutator {
                symbol: symbol.build()?,
                kernel: kernel.build()?,
                mode: *mode,
            },
        })
    }
}

/// Pass criterion for a class constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantExpectation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default)]
    pub divergent: bool,
}

fn default_rel_tol() -> f64 {
    1e-4
}

fn default_transfer_tol() -> f64 {
    1e-2
}

fn default_true() -> bool {
    true
}

fn default_gap_t() -> f64 {
    4.0
}

fn default_rhi_grid() -> Vec<f64> {
    (1..=40).map(|i| 1.0 + 0.1 * i as f64).collect()
}

fn default_rhi_cap() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    ClassConstant(ClassConstantConfig),
    Rhi(RhiConfig),
    GapCheck(GapCheckConfig),
    TransferCheck(TransferCheckConfig),
    Interpolate(InterpolateConfig),
    Counterexample(CounterexampleConfig),
    HormanderCheck(HormanderCheckConfig),
    TruncationError(TruncationErrorConfig),
    RkModuli(RkModuliConfig),
    CommutatorReport(CommutatorReportConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassConstantConfig {
    pub weight: Weight,
    pub class: ClassTag,
    pub p: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Scalar>,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<ConstantExpectation>,
}

impl ClassConstantConfig {
    pub fn exponents(&self) -> ClassExponents {
        match &self.q {
            Some(q) => ClassExponents::pq(self.p.clone(), q.clone()),
            None => ClassExponents::p(self.p.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhiConfig {
    pub weight: Weight,
    pub side: RhiSide,
    #[serde(default)]
    pub sampling: IntervalSampling,
    #[serde(default = "default_rhi_grid")]
    pub r_grid: Vec<f64>,
    #[serde(default = "default_rhi_cap")]
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapCheckConfig {
    pub u: Weight,
    pub v: Weight,
    pub p: Scalar,
    pub q: Scalar,
    #[serde(default = "default_gap_t")]
    pub t: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(default)]
    pub search: SearchSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferCheckConfig {
    pub weight: Weight,
    pub p: Scalar,
    pub q: Scalar,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default = "default_transfer_tol")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolateConfig {
    pub plan: PlanSkeleton,
    pub w: Weight,
    pub w1: Weight,
    pub theta: Scalar,
    /// Also estimate the class constant of the endpoint weight.
    #[serde(default = "default_true")]
    pub verify: bool,
    #[serde(default)]
    pub search: SearchSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub q: Scalar,
    pub q1: Scalar,
    pub theta: Scalar,
    /// Further `θ` values probed with the same `q`, `q1`.
    #[serde(default)]
    pub theta_sweep: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HormanderCheckConfig {
    pub kernel: KernelSpec,
    #[serde(default)]
    pub sampling: HormanderSampleSpec,
    /// Largest acceptable `max_ratio`; unset means only finiteness is required.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationErrorConfig {
    pub symbol: FunctionSpec,
    pub kernel: KernelSpec,
    pub family: FamilyConfig,
    pub delta_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RkModuliConfig {
    pub operator: OperatorSpec,
    pub family: FamilyConfig,
    pub h_grid: Vec<f64>,
    pub m_grid: Vec<f64>,
    /// Norm exponent of the output; defaults to the family's `p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorReportConfig {
    pub symbol: FunctionSpec,
    pub operator: CompactnessOperator,
    #[serde(default = "one")]
    pub weight: Weight,
    #[serde(default)]
    pub settings: CompactnessConfig,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ClassConstant(_) => "class-constant",
            Self::Rhi(_) => "rhi",
            Self::GapCheck(_) => "gap-check",
            Self::TransferCheck(_) => "transfer-check",
            Self::Interpolate(_) => "interpolate",
            Self::Counterexample(_) => "counterexample",
            Self::HormanderCheck(_) => "hormander-check",
            Self::TruncationError(_) => "truncation-error",
            Self::RkModuli(_) => "rk-moduli",
            Self::CommutatorReport(_) => "commutator-report",
        }
    }

    /// Checks every constraint that can be checked without computing.
    pub fn validate(&self) -> Result<(), LabError> {
        let inv = |e: &dyn std::fmt::Display| LabError::invalid(e.to_string());
        let search = |s: &SearchSpec| s.validate().map_err(|e| inv(&e));
        let weight = |w: &Weight| w.validate().map_err(|e| inv(&e));
        let exps = |p: &Scalar, q: &Scalar| ClassExponents::pq(p.clone(), q.clone()).validate(ClassTag::ApqPlus).map_err(|e| inv(&e));
        match self {
            Self::ClassConstant(c) => {
                weight(&c.weight)?;
                c.exponents().validate(c.class).map_err(|e| inv(&e))?;
                search(&c.search)?;
            }
            Self::Rhi(c) => {
                weight(&c.weight)?;
                c.sampling.intervals().map_err(|e| inv(&e))?;
                if c.r_grid.is_empty() || c.r_grid.iter().any(|r| !(*r > 1.0)) {
                    return Err(LabError::invalid("r_grid must be non-empty with every r > 1"));
                }
                positive("cap", c.cap)?;
            }
            Self::GapCheck(c) => {
                weight(&c.u)?;
                weight(&c.v)?;
                if !(c.p.value() > 1.0) || !(c.q.value() > 1.0) {
                    return Err(LabError::invalid(format!("need p > 1 and q > 1, got p = {}, q = {}", c.p, c.q)));
                }
                if !(c.t > 2.0) || !c.t.is_finite() {
                    return Err(LabError::invalid(format!("gap ratio t must exceed 2, got {}", c.t)));
                }
                positive("K", c.k)?;
                search(&c.search)?;
            }
            Self::TransferCheck(c) => {
                weight(&c.weight)?;
                exps(&c.p, &c.q)?;
                search(&c.search)?;
                positive("tolerance", c.tolerance)?;
            }
            Self::Interpolate(c) => {
                c.plan.validate().map_err(|e| inv(&e))?;
                weight(&c.w)?;
                weight(&c.w1)?;
                let tm = c.plan.theta_max().value();
                if !(c.theta.value() > 0.0 && c.theta.value() <= tm) {
                    return Err(LabError::invalid(format!("theta must lie in (0, theta_max = {tm}], got {}", c.theta)));
                }
                search(&c.search)?;
            }
            Self::Counterexample(c) => {
                if !(c.q.value() > 1.0) || !(c.q1.value() > 1.0) {
                    return Err(LabError::invalid(format!("need q > 1 and q1 > 1, got q = {}, q1 = {}", c.q, c.q1)));
                }
                for t in std::iter::once(&c.theta).chain(&c.theta_sweep) {
                    if !(t.value() > 0.0 && t.value() < 1.0) {
                        return Err(LabError::invalid(format!("theta must lie in (0, 1), got {t}")));
                    }
                }
            }
            Self::HormanderCheck(c) => {
                c.kernel.build()?;
            }
            Self::TruncationError(c) => {
                c.symbol.build()?;
                c.kernel.build()?;
                family(&c.family)?;
                if c.delta_grid.len() < 2 || c.delta_grid.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
                    return Err(LabError::invalid("delta_grid needs at least two values in (0, 1)"));
                }
            }
            Self::RkModuli(c) => {
                c.operator.build()?;
                family(&c.family)?;
                if let Some(s) = c.out_exponent {
                    if !(s >= 1.0) || !s.is_finite() {
                        return Err(LabError::invalid(format!("out_exponent must be in [1, ∞), got {s}")));
                    }
                }
            }
            Self::CommutatorReport(c) => {
                c.symbol.build()?;
                c.operator.validate().map_err(|e| inv(&e))?;
                weight(&c.weight)?;
                let s = &c.settings;
                family_spec(&s.family)?;
                if s.h_grid.len() < 2 || s.m_grid.len() < 2 {
                    return Err(LabError::invalid("h_grid and m_grid need at least two points"));
                }
            }
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<(), LabError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(LabError::invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn family_spec(f: &FamilySpec) -> Result<(), LabError> {
    if f.count == 0 || f.modes.is_empty() {
        return Err(LabError::invalid("family needs count >= 1 and at least one mode"));
    }
    Ok(())
}

fn family(f: &FamilyConfig) -> Result<(), LabError> {
    if !(f.p > 1.0) || !f.p.is_finite() {
        return Err(LabError::invalid(format!("family exponent must satisfy p > 1, got p = {}", f.p)));
    }
    f.weight.validate().map_err(|e| LabError::invalid(e.to_string()))?;
    family_spec(&FamilySpec {
        count: f.count,
        seed: f.seed,
        modes: f.modes.clone(),
    })
}

/// Parsed config together with its canonical JSON form.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| LabError::invalid(format!("config is not valid JSON: {e}")))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| LabError::invalid("config must be a JSON object"))?;
        let output_dir = match obj.remove("output_dir") {
            None | Some(serde_json::Value::Null) => None,
            Some(serde_json::Value::String(s)) => Some(s),
            Some(other) => return Err(LabError::invalid(format!("output_dir must be a string, got {other}"))),
        };
        let experiment: Experiment = serde_json::from_value(value).map_err(|e| LabError::invalid(e.to_string()))?;
        experiment.validate()?;
        Ok(Self { experiment, output_dir })
    }

    /// The experiment with every default filled in, keys sorted; `output_dir`
    /// is excluded so the same inputs hash alike wherever they are written.
    pub fn canonical(&self) -> serde_json::Value {
        // serde_json's map is ordered by key without `preserve_order`
        serde_json::to_value(&self.experiment).expect("configs serialize")
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&self.canonical()).expect("values serialize")
    }
}
