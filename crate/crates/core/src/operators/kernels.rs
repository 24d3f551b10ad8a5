//! Forward-looking kernels `K(x, y)`, supported on `y > x`, and their smooth
//! truncations.

use serde::{Deserialize, Serialize};

use super::OperatorError;

/// C¹ smoothstep ramp: 0 up to `δ`, `3s² - 2s³` with `s = (u - δ)/δ` on
/// `(δ, 2δ)`, 1 beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationProfile {
    pub delta: f64,
}

impl TruncationProfile {
    /// `sup |S'| = 3/2` for the smoothstep `S`.
    pub const DERIVATIVE_CONSTANT: f64 = 1.5;

    pub fn new(delta: f64) -> Result<Self, OperatorError> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(OperatorError::InvalidParams(format!("truncation delta must be positive, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn eval(&self, u: f64) -> f64 {
        let d = self.delta;
        if u <= d {
            0.0
        } else if u >= 2.0 * d {
            1.0
        } else {
            let s = (u - d) / d;
            s * s * (3.0 - 2.0 * s)
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let d = self.delta;
        if u <= d || u >= 2.0 * d {
            0.0
        } else {
            let s = (u - d) / d;
            6.0 * s * (1.0 - s) / d
        }
    }

    /// Exact `‖(φ^δ)'‖_∞ = 3 / (2δ)`.
    pub fn derivative_bound(&self) -> f64 {
        Self::DERIVATIVE_CONSTANT / self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum KernelKind {
    /// `(y - x)^{α - 1}`.
    Fractional { alpha: f64 },
    /// `1 / (y - x)`.
    CzHilbert,
    /// `coefficient · (y - x)^{-exponent}` with `exponent ∈ (0, 1]`.
    Custom { coefficient: f64, exponent: f64 },
}

/// Parameters of an `L^r`-Hörmander condition with decay `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HormanderParams {
    pub r: f64,
    pub gamma: f64,
}

impl HormanderParams {
    pub fn validate(&self) -> Result<(), OperatorError> {
        if !(self.r > 1.0) {
            return Err(OperatorError::InvalidParams(format!("Hörmander r must exceed 1, got {}", self.r)));
        }
        let rc = self.r / (self.r - 1.0);
        if !(self.gamma > 1.0 / rc) || !self.gamma.is_finite() {
            return Err(OperatorError::InvalidParams(format!(
                "Hörmander gamma must exceed 1/r' = {}, got {}",
                1.0 / rc,
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneSidedKernel {
    #[serde(flatten)]
    pub kind: KernelKind,
    pub size_constant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hormander: Option<HormanderParams>,
    #[serde(default)]
    pub delta: Option<f64>,
}

pub fn make_kernel(kind: KernelKind, hormander: Option<HormanderParams>) -> Result<OneSidedKernel, OperatorError> {
    let size_constant = match kind {
        KernelKind::Fractional { alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(OperatorError::InvalidParams(format!("fractional alpha must lie in (0, 1), got {alpha}")));
            }
            1.0
        }
        KernelKind::CzHilbert => 1.0,
        KernelKind::Custom { coefficient, exponent } => {
            if !coefficient.is_finite() || !(exponent > 0.0 && exponent <= 1.0) {
                return Err(OperatorError::InvalidParams(format!(
                    "custom kernel needs a finite coefficient and exponent in (0, 1], got {coefficient}, {exponent}"
                )));
            }
            coefficient.abs()
        }
    };
    if let Some(h) = hormander {
        h.validate()?;
    }
    Ok(OneSidedKernel {
        kind,
        size_constant,
        hormander,
        delta: None,
    })
}

pub fn truncate_kernel(k: &OneSidedKernel, delta: f64) -> Result<OneSidedKernel, OperatorError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(OperatorError::InvalidParams(format!("truncation delta must lie in (0, 1), got {delta}")));
    }
    Ok(OneSidedKernel {
        delta: Some(delta),
        ..*k
    })
}

impl OneSidedKernel {
    pub fn validate(&self) -> Result<(), OperatorError> {
        let fresh = make_kernel(self.kind, self.hormander)?;
        if !(self.size_constant >= fresh.size_constant) {
            return Err(OperatorError::InvalidParams(format!(
                "size constant {} is below the kernel's own bound {}",
                self.size_constant, fresh.size_constant
            )));
        }
        if let Some(d) = self.delta {
            truncate_kernel(self, d)?;
        }
        Ok(())
    }

    /// Power `s` in the size bound `|K(x, y)| <= C |x - y|^{-s}`.
    pub fn size_exponent(&self) -> f64 {
        match self.kind {
            KernelKind::Fractional { alpha } => 1.0 - alpha,
            KernelKind::CzHilbert => 1.0,
            KernelKind::Custom { exponent, .. } => exponent,
        }
    }

    pub fn profile(&self) -> Option<TruncationProfile> {
        self.delta.map(|delta| TruncationProfile { delta })
    }

    pub fn untruncated(&self) -> Self {
        Self { delta: None, ..*self }
    }

    /// Untruncated kernel as a function of the gap `d = y - x`.
    pub fn raw(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        match self.kind {
            KernelKind::Fractional { alpha } => d.powf(alpha - 1.0),
            KernelKind::CzHilbert => 1.0 / d,
            KernelKind::Custom { coefficient, exponent } => coefficient * d.powf(-exponent),
        }
    }

    /// Kernel (truncated if `delta` is set) as a function of the gap `d = y - x`.
    pub fn at_gap(&self, d: f64) -> f64 {
        match self.profile() {
            Some(p) => {
                let phi = p.eval(d);
                if phi == 0.0 {
                    0.0
                } else {
                    phi * self.raw(d)
                }
            }
            None => self.raw(d),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.at_gap(y - x)
    }

    /// `|K(x, y)| |x - y|^s / C`, at most 1 by the size condition.
    pub fn size_ratio(&self, x: f64, y: f64) -> f64 {
        let d = (y - x).abs();
        if d == 0.0 {
            return 0.0;
        }
        self.eval(x, y).abs() * d.powf(self.size_exponent()) / self.size_constant
    }

    /// True when `∫_0^1 |K|` is finite without truncation.
    pub fn locally_integrable(&self) -> bool {
        self.delta.is_some() || self.size_exponent() < 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_properties() {
        let p = TruncationProfile::new(0.1).unwrap();
        assert_eq!(p.eval(0.1), 0.0);
        assert_eq!(p.eval(0.2), 1.0);
        assert!((p.eval(0.15) - 0.5).abs() < 1e-15);
        assert!((p.derivative(0.15) - 15.0).abs() < 1e-12);
        assert_eq!(p.derivative_bound(), 15.0);
        for i in 0..=1000 {
            let u = 0.3 * i as f64 / 1000.0;
            let v = p.eval(u);
            assert!((0.0..=1.0).contains(&v));
            assert!(p.derivative(u) <= p.derivative_bound() + 1e-12);
        }
    }

    #[test]
    fn kernel_examples() {
        let f = make_kernel(KernelKind::Fractional { alpha: 0.5 }, None).unwrap();
        assert_eq!(f.eval(0.0, 4.0), 0.5);
        assert_eq!(f.eval(4.0, 0.0), 0.0);
        let h = truncate_kernel(&make_kernel(KernelKind::CzHilbert, None).unwrap(), 0.1).unwrap();
        assert_eq!(h.eval(0.0, 0.05), 0.0);
        assert_eq!(h.eval(0.0, 0.5), 2.0);
        assert_eq!(h.eval(0.0, -0.5), 0.0);
    }

    #[test]
    fn parameter_checks() {
        assert!(make_kernel(KernelKind::Fractional { alpha: 1.0 }, None).is_err());
        assert!(make_kernel(KernelKind::Custom { coefficient: 1.0, exponent: 1.5 }, None).is_err());
        let h = make_kernel(KernelKind::CzHilbert, Some(HormanderParams { r: 2.0, gamma: 1.0 })).unwrap();
        assert!(truncate_kernel(&h, 0.0).is_err());
        assert!(truncate_kernel(&h, 1.0).is_err());
        assert!(make_kernel(KernelKind::CzHilbert, Some(HormanderParams { r: 2.0, gamma: 0.5 })).is_err());
    }

    #[test]
    fn json_shape() {
        let k = truncate_kernel(&make_kernel(KernelKind::Fractional { alpha: 0.25 }, None).unwrap(), 0.5).unwrap();
        let v = serde_json::to_value(k).unwrap();
        assert_eq!(v["kind"], "fractional");
        assert_eq!(v["params"]["alpha"], 0.25);
        assert_eq!(v["delta"], 0.5);
        let back: OneSidedKernel = serde_json::from_value(v).unwrap();
        assert_eq!(back, k);
        let h: OneSidedKernel = serde_json::from_str(r#"{"kind":"cz_hilbert","size_constant":1,"delta":null}"#).unwrap();
        assert_eq!(h.kind, KernelKind::CzHilbert);
    }
}
