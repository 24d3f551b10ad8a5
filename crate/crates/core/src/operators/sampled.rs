//! Compactly supported test functions on a uniform grid, optionally with a
//! closed-form evaluator.

use serde::{Deserialize, Serialize};

use super::OperatorError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformGrid {
    pub x0: f64,
    pub h: f64,
    pub n: usize,
}

impl UniformGrid {
    /// Grid with spacing `h` covering `[lo, hi]`.
    pub fn covering(lo: f64, hi: f64, h: f64) -> Self {
        let n = ((hi - lo) / h).ceil() as usize + 1;
        Self { x0: lo, h, n }
    }

    /// `h = 1/512` over `[-16, 16]`.
    pub fn standard() -> Self {
        Self::covering(-16.0, 16.0, 1.0 / 512.0)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x0 + self.h * i as f64
    }

    pub fn end(&self) -> f64 {
        self.point(self.n.saturating_sub(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothnessTag {
    Indicator,
    #[serde(rename = "C1_bump")]
    C1Bump,
    #[serde(rename = "Cinf_bump")]
    CinfBump,
    General,
}

/// Closed-form building block, scaled by `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Term {
    /// `amplitude · χ_[lo, hi]`.
    Indicator { lo: f64, hi: f64, amplitude: f64 },
    /// `amplitude · S(1 - |x - center| / radius)` with `S(u) = 3u² - 2u³` on `[0, 1]`.
    C1Bump { center: f64, radius: f64, amplitude: f64 },
    /// `amplitude · exp(1 - 1 / (1 - ((x - center) / radius)²))` inside the radius.
    CinfBump { center: f64, radius: f64, amplitude: f64 },
}

impl Term {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Term::Indicator { lo, hi, amplitude } => {
                if (lo..=hi).contains(&x) {
                    amplitude
                } else {
                    0.0
                }
            }
            Term::C1Bump { center, radius, amplitude } => {
                let u = 1.0 - (x - center).abs() / radius;
                if u <= 0.0 {
                    0.0
                } else {
                    amplitude * u * u * (3.0 - 2.0 * u)
                }
            }
            Term::CinfBump { center, radius, amplitude } => {
                let z = (x - center) / radius;
                let q = 1.0 - z * z;
                if q <= 0.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / q).exp()
                }
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Term::Indicator { .. } => 0.0,
            Term::C1Bump { center, radius, amplitude } => {
                let u = 1.0 - (x - center).abs() / radius;
                if u <= 0.0 || x == center {
                    0.0
                } else {
                    -amplitude * 6.0 * u * (1.0 - u) * (x - center).signum() / radius
                }
            }
            Term::CinfBump { center, radius, amplitude } => {
                let z = (x - center) / radius;
                let q = 1.0 - z * z;
                if q <= 0.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / q).exp() * (-2.0 * z / (q * q)) / radius
                }
            }
        }
    }

    /// Exact `sup |f'|`.
    pub fn derivative_bound(&self) -> f64 {
        match *self {
            Term::Indicator { .. } => f64::INFINITY,
            Term::C1Bump { radius, amplitude, .. } => 1.5 * amplitude.abs() / radius,
            Term::CinfBump { radius, amplitude, .. } => {
                // maximise 2|z| e^{1-1/q} / q² over z in (0,1), q = 1 - z²
                let g = |z: f64| {
                    let q = 1.0 - z * z;
                    2.0 * z * (1.0 - 1.0 / q).exp() / (q * q)
                };
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..200 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if g(m1) < g(m2) {
                        lo = m1;
                    } else {
                        hi = m2;
                    }
                }
                amplitude.abs() * g(0.5 * (lo + hi)) / radius
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            Term::Indicator { lo, hi, .. } => (lo, hi),
            Term::C1Bump { center, radius, .. } | Term::CinfBump { center, radius, .. } => {
                (center - radius, center + radius)
            }
        }
    }

    /// Points where the term fails to be smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            Term::Indicator { lo, hi, .. } => vec![lo, hi],
            Term::C1Bump { center, radius, .. } => vec![center - radius, center, center + radius],
            Term::CinfBump { center, radius, .. } => vec![center - radius, center + radius],
        }
    }

    pub fn scaled(&self, c: f64) -> Term {
        match *self {
            Term::Indicator { lo, hi, amplitude } => Term::Indicator {
                lo,
                hi,
                amplitude: amplitude * c,
            },
            Term::C1Bump { center, radius, amplitude } => Term::C1Bump {
                center,
                radius,
                amplitude: amplitude * c,
            },
            Term::CinfBump { center, radius, amplitude } => Term::CinfBump {
                center,
                radius,
                amplitude: amplitude * c,
            },
        }
    }

    fn tag(&self) -> SmoothnessTag {
        match self {
            Term::Indicator { .. } => SmoothnessTag::Indicator,
            Term::C1Bump { .. } => SmoothnessTag::C1Bump,
            Term::CinfBump { .. } => SmoothnessTag::CinfBump,
        }
    }
}

/// Grid samples with a declared support. When `closed_form` is present it is
/// used for evaluation; otherwise values are linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledFunction {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    pub support: [f64; 2],
    pub tag: SmoothnessTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<Vec<Term>>,
}

impl SampledFunction {
    pub fn from_terms(terms: Vec<Term>, grid: UniformGrid) -> Result<Self, OperatorError> {
        if terms.is_empty() {
            return Ok(Self::zero(grid));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in &terms {
            let (a, b) = t.support();
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(OperatorError::InvalidParams(format!("term {t:?} has empty support")));
            }
            lo = lo.min(a);
            hi = hi.max(b);
        }
        let tag = if terms.windows(2).all(|w| w[0].tag() == w[1].tag()) { terms[0].tag() } else { SmoothnessTag::General };
        let values = (0..grid.n).map(|i| terms.iter().map(|t| t.eval(grid.point(i))).sum()).collect();
        let f = Self {
            grid,
            values,
            support: [lo, hi],
            tag,
            closed_form: Some(terms),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self::from_terms(vec![Term::Indicator { lo, hi, amplitude: 1.0 }], UniformGrid::standard())
            .expect("valid indicator")
    }

    pub fn c1_bump(center: f64, radius: f64) -> Self {
        Self::from_terms(
            vec![Term::C1Bump {
                center,
                radius,
                amplitude: 1.0,
            }],
            UniformGrid::standard(),
        )
        .expect("valid bump")
    }

    pub fn cinf_bump(center: f64, radius: f64) -> Self {
        Self::from_terms(
            vec![Term::CinfBump {
                center,
                radius,
                amplitude: 1.0,
            }],
            UniformGrid::standard(),
        )
        .expect("valid bump")
    }

    /// Identically zero function; its support is the empty interval at the grid origin.
    pub fn zero(grid: UniformGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n],
            support: [grid.x0, grid.x0],
            tag: SmoothnessTag::General,
            closed_form: Some(Vec::new()),
        }
    }

    /// Constant `c` on `[lo, hi]`: a scaled indicator, used for constant symbols.
    pub fn constant_on(c: f64, lo: f64, hi: f64) -> Self {
        Self::from_terms(vec![Term::Indicator { lo, hi, amplitude: c }], UniformGrid::covering(lo, hi, 1.0 / 512.0))
            .expect("valid constant")
    }

    /// Grid-only function: values interpolated linearly, zero outside `support`.
    pub fn from_samples(grid: UniformGrid, values: Vec<f64>, support: [f64; 2]) -> Result<Self, OperatorError> {
        let f = Self {
            grid,
            values,
            support,
            tag: SmoothnessTag::General,
            closed_form: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        let bad = |m: String| Err(OperatorError::InvalidParams(m));
        if self.grid.n < 2 || !(self.grid.h > 0.0) || !self.grid.x0.is_finite() {
            return bad("grid needs n >= 2 and h > 0".into());
        }
        if self.values.len() != self.grid.n {
            return bad(format!("grid has {} points but {} values", self.grid.n, self.values.len()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("values must be finite".into());
        }
        let [lo, hi] = self.support;
        if !(lo <= hi) {
            return bad("support must satisfy lo <= hi".into());
        }
        if self.closed_form.is_none() && (lo < self.grid.x0 - 1e-12 || hi > self.grid.end() + 1e-12) {
            return bad("support must lie inside the grid span".into());
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        match &self.closed_form {
            Some(terms) => terms.iter().all(|t| term_amplitude(t) == 0.0),
            None => self.values.iter().all(|v| *v == 0.0),
        }
    }

    pub fn support_len(&self) -> f64 {
        self.support[1] - self.support[0]
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.support[0] || x > self.support[1] {
            return 0.0;
        }
        match &self.closed_form {
            Some(terms) => terms.iter().map(|t| t.eval(x)).sum(),
            None => {
                let t = (x - self.grid.x0) / self.grid.h;
                if t < 0.0 || t > (self.grid.n - 1) as f64 {
                    return 0.0;
                }
                let i = (t.floor() as usize).min(self.grid.n - 2);
                let frac = t - i as f64;
                self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.closed_form {
            Some(terms) => terms.iter().map(|t| t.derivative(x)).sum(),
            None => {
                let h = self.grid.h;
                (self.eval(x + 0.5 * h) - self.eval(x - 0.5 * h)) / h
            }
        }
    }

    /// `sup |f'|`: exact for single closed-form terms, else a bound from the terms
    /// or from grid differences.
    pub fn derivative_bound(&self) -> f64 {
        match &self.closed_form {
            Some(terms) if terms.len() == 1 => terms[0].derivative_bound(),
            Some(terms) => terms.iter().map(Term::derivative_bound).sum(),
            None => self
                .values
                .windows(2)
                .map(|w| (w[1] - w[0]).abs() / self.grid.h)
                .fold(0.0, f64::max),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match &self.closed_form {
            Some(terms) if terms.len() == 1 => term_amplitude(&terms[0]).abs(),
            _ => self.values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Points where the function may fail to be smooth, inside its support.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.closed_form {
            Some(terms) => terms.iter().flat_map(Term::kinks).collect(),
            None => {
                let [lo, hi] = self.support;
                let mut v = vec![lo, hi];
                v.extend((0..self.grid.n).map(|i| self.grid.point(i)).filter(|x| *x > lo && *x < hi));
                v
            }
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            support: self.support,
            tag: self.tag,
            closed_form: self.closed_form.as_ref().map(|ts| ts.iter().map(|t| t.scaled(c)).collect()),
        }
    }

    /// Pointwise sum; closed forms are concatenated when both exist.
    pub fn plus(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        match (&self.closed_form, &other.closed_form) {
            (Some(a), Some(b)) => {
                let mut terms = a.clone();
                terms.extend_from_slice(b);
                let grid = merged_grid(&self.grid, &other.grid);
                Self::from_terms(terms, grid).expect("sum of valid terms")
            }
            _ => {
                let grid = merged_grid(&self.grid, &other.grid);
                let values = (0..grid.n).map(|i| self.eval(grid.point(i)) + other.eval(grid.point(i))).collect();
                Self {
                    grid,
                    values,
                    support: [self.support[0].min(other.support[0]), self.support[1].max(other.support[1])],
                    tag: SmoothnessTag::General,
                    closed_form: None,
                }
            }
        }
    }

    /// `x ↦ f(x - tau)`.
    pub fn translated(&self, tau: f64) -> Self {
        match &self.closed_form {
            Some(terms) => {
                let shifted = terms.iter().map(|t| shift_term(t, tau, 1.0)).collect();
                let grid = UniformGrid {
                    x0: self.grid.x0 + tau,
                    ..self.grid
                };
                Self::from_terms(shifted, grid).expect("shifted terms")
            }
            None => Self {
                grid: UniformGrid {
                    x0: self.grid.x0 + tau,
                    ..self.grid
                },
                values: self.values.clone(),
                support: [self.support[0] + tau, self.support[1] + tau],
                tag: self.tag,
                closed_form: None,
            },
        }
    }

    /// `x ↦ f(s x)` for `s > 0`; closed forms only.
    pub fn dilated(&self, s: f64) -> Option<Self> {
        let terms = self.closed_form.as_ref()?;
        let scaled = terms.iter().map(|t| shift_term(t, 0.0, 1.0 / s)).collect();
        Self::from_terms(scaled, self.grid).ok()
    }
}

fn term_amplitude(t: &Term) -> f64 {
    match *t {
        Term::Indicator { amplitude, .. } | Term::C1Bump { amplitude, .. } | Term::CinfBump { amplitude, .. } => amplitude,
    }
}

/// Term for `x ↦ t((x - tau) / width)`.
fn shift_term(t: &Term, tau: f64, width: f64) -> Term {
    match *t {
        Term::Indicator { lo, hi, amplitude } => Term::Indicator {
            lo: lo * width + tau,
            hi: hi * width + tau,
            amplitude,
        },
        Term::C1Bump { center, radius, amplitude } => Term::C1Bump {
            center: center * width + tau,
            radius: radius * width,
            amplitude,
        },
        Term::CinfBump { center, radius, amplitude } => Term::CinfBump {
            center: center * width + tau,
            radius: radius * width,
            amplitude,
        },
    }
}

fn merged_grid(a: &UniformGrid, b: &UniformGrid) -> UniformGrid {
    let h = a.h.min(b.h);
    UniformGrid::covering(a.x0.min(b.x0), a.end().max(b.end()), h)
}
