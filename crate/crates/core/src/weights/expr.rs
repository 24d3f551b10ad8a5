//! Closed-form weight expressions.

use num::traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use super::WeightError;

/// Positive function on ℝ given as an expression tree.
///
/// JSON form: `{"kind": "const", "value": c}`, `{"kind": "exp_poly", "coeffs": [c0, ...]}`
/// for `exp(c0 + c1 x + ...)`, `{"kind": "power", "center": x0, "exponent": a}` for
/// `|x - x0|^a`, `{"kind": "piecewise", "breaks": [...], "pieces": [...]}`,
/// `{"kind": "product", "factors": [...]}` and `{"kind": "rpow", "base": {...}, "exponent": e}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weight {
    Const { value: Scalar },
    ExpPoly { coeffs: Vec<Scalar> },
    Power { center: f64, exponent: Scalar },
    /// `pieces[i]` applies on `[breaks[i-1], breaks[i])`, with open ends at ±∞.
    Piecewise { breaks: Vec<f64>, pieces: Vec<Weight> },
    Product { factors: Vec<Weight> },
    Rpow { base: Box<Weight>, exponent: Scalar },
}

/// Side from which a point is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Weight {
    pub fn one() -> Self {
        Weight::Const { value: Scalar::one() }
    }

    pub fn constant(value: impl Into<Scalar>) -> Self {
        Weight::Const { value: value.into() }
    }

    pub fn exp_poly<S: Into<Scalar>>(coeffs: impl IntoIterator<Item = S>) -> Self {
        Weight::ExpPoly {
            coeffs: coeffs.into_iter().map(Into::into).collect(),
        }
    }

    /// `e^{slope · x}`.
    pub fn exp_linear(slope: impl Into<Scalar>) -> Self {
        Weight::ExpPoly {
            coeffs: vec![Scalar::zero(), slope.into()],
        }
    }

    pub fn power(center: f64, exponent: impl Into<Scalar>) -> Self {
        Weight::Power {
            center,
            exponent: exponent.into(),
        }
    }

    pub fn piecewise(breaks: Vec<f64>, pieces: Vec<Weight>) -> Self {
        Weight::Piecewise { breaks, pieces }
    }

    pub fn product(factors: Vec<Weight>) -> Self {
        Weight::Product { factors }
    }

    pub fn rpow(base: Weight, exponent: impl Into<Scalar>) -> Self {
        Weight::Rpow {
            base: Box::new(base),
            exponent: exponent.into(),
        }
    }

    /// `|x - center|^exponent` on `[center - radius, center + radius]`, extended
    /// continuously by the constant `radius^exponent` outside.
    pub fn truncated_power(center: f64, exponent: impl Into<Scalar>, radius: f64) -> Self {
        let a = exponent.into();
        let edge = Weight::constant(radius).powf(&a);
        Weight::piecewise(
            vec![center - radius, center + radius],
            vec![edge.clone(), Weight::power(center, a), edge],
        )
    }

    pub fn validate(&self) -> Result<(), WeightError> {
        let bad = |m: String| Err(WeightError::InvalidWeight(m));
        match self {
            Weight::Const { value } => {
                if !(value.value() > 0.0) || !value.value().is_finite() {
                    return bad(format!("constant must be positive and finite, got {}", value.value()));
                }
            }
            Weight::ExpPoly { coeffs } => {
                if coeffs.iter().any(|c| !c.value().is_finite()) {
                    return bad("exp_poly coefficients must be finite".into());
                }
            }
            Weight::Power { center, exponent } => {
                if !center.is_finite() || !exponent.value().is_finite() {
                    return bad("power center and exponent must be finite".into());
                }
            }
            Weight::Piecewise { breaks, pieces } => {
                if pieces.len() != breaks.len() + 1 {
                    return bad(format!(
                        "piecewise needs {} pieces for {} breaks, got {}",
                        breaks.len() + 1,
                        breaks.len(),
                        pieces.len()
                    ));
                }
                if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| !(w[0] < w[1])) {
                    return bad("piecewise breaks must be finite and strictly increasing".into());
                }
                for p in pieces {
                    p.validate()?;
                }
            }
            Weight::Product { factors } => {
                if factors.is_empty() {
                    return bad("product needs at least one factor".into());
                }
                for f in factors {
                    f.validate()?;
                }
            }
            Weight::Rpow { base, exponent } => {
                if !exponent.value().is_finite() {
                    return bad("rpow exponent must be finite".into());
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// `ln w(x)`.
    pub fn log_eval(&self, x: f64) -> f64 {
        self.log_eval_near(x, None)
    }

    /// `ln w(x)`, where `hint = (x0, d)` supplies the exact distance `d = |x - x0|`
    /// for power factors centred at `x0`.
    pub fn log_eval_near(&self, x: f64, hint: Option<(f64, f64)>) -> f64 {
        match self {
            Weight::Const { value } => value.value().ln(),
            Weight::ExpPoly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.value()),
            Weight::Power { center, exponent } => {
                let a = exponent.value();
                if a == 0.0 {
                    return 0.0;
                }
                let d = match hint {
                    Some((x0, d)) if x0 == *center => d,
                    _ => (x - center).abs(),
                };
                a * d.ln()
            }
            Weight::Piecewise { breaks, pieces } => pieces[piece_index(breaks, x)].log_eval_near(x, hint),
            Weight::Product { factors } => factors.iter().map(|f| f.log_eval_near(x, hint)).sum(),
            Weight::Rpow { base, exponent } => {
                let e = exponent.value();
                if e == 0.0 {
                    0.0
                } else {
                    e * base.log_eval_near(x, hint)
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.log_eval(x).exp()
    }

    /// `w^e`, simplified.
    pub fn powf(&self, e: &Scalar) -> Weight {
        Weight::rpow(self.clone(), e.clone()).simplify()
    }

    /// Pointwise product, simplified.
    pub fn times(&self, other: &Weight) -> Weight {
        Weight::product(vec![self.clone(), other.clone()]).simplify()
    }

    /// `x ↦ w(x - tau)`.
    pub fn shifted(&self, tau: f64) -> Weight {
        match self {
            Weight::Const { .. } => self.clone(),
            Weight::ExpPoly { coeffs } => {
                // Σ c_k (x - τ)^k = Σ_j x^j Σ_{k≥j} c_k C(k,j) (-τ)^{k-j}
                let t = -Scalar::from(tau);
                let n = coeffs.len();
                let mut out = vec![Scalar::zero(); n];
                for (k, c) in coeffs.iter().enumerate() {
                    let mut binom = Scalar::one();
                    let mut tpow = Scalar::one();
                    for j in (0..=k).rev() {
                        out[j] = &out[j] + &(&(c * &binom) * &tpow);
                        // advance to C(k, j-1) (-τ)^{k-j+1}
                        binom = &binom * &Scalar::ratio(j as i64, (k - j + 1) as i64);
                        tpow = &tpow * &t;
                    }
                }
                Weight::ExpPoly { coeffs: out }
            }
            Weight::Power { center, exponent } => Weight::Power {
                center: center + tau,
                exponent: exponent.clone(),
            },
            Weight::Piecewise { breaks, pieces } => Weight::Piecewise {
                breaks: breaks.iter().map(|b| b + tau).collect(),
                pieces: pieces.iter().map(|p| p.shifted(tau)).collect(),
            },
            Weight::Product { factors } => Weight::Product {
                factors: factors.iter().map(|f| f.shifted(tau)).collect(),
            },
            Weight::Rpow { base, exponent } => Weight::Rpow {
                base: Box::new(base.shifted(tau)),
                exponent: exponent.clone(),
            },
        }
    }

    /// `x ↦ w(-x)`.
    pub fn reflected(&self) -> Weight {
        match self {
            Weight::Const { .. } => self.clone(),
            Weight::ExpPoly { coeffs } => Weight::ExpPoly {
                coeffs: coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                    .collect(),
            },
            Weight::Power { center, exponent } => Weight::Power {
                center: -center,
                exponent: exponent.clone(),
            },
            Weight::Piecewise { breaks, pieces } => Weight::Piecewise {
                breaks: breaks.iter().rev().map(|b| -b).collect(),
                pieces: pieces.iter().rev().map(|p| p.reflected()).collect(),
            },
            Weight::Product { factors } => Weight::Product {
                factors: factors.iter().map(|f| f.reflected()).collect(),
            },
            Weight::Rpow { base, exponent } => Weight::Rpow {
                base: Box::new(base.reflected()),
                exponent: exponent.clone(),
            },
        }
    }

    /// `c · w` for a positive constant `c`.
    pub fn scaled(&self, c: f64) -> Weight {
        self.times(&Weight::constant(c))
    }

    /// Centres of all power factors.
    pub fn singular_points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_points(&mut out, true);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Discontinuity points of piecewise factors.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_points(&mut out, false);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_points(&self, out: &mut Vec<f64>, centers: bool) {
        match self {
            Weight::Const { .. } | Weight::ExpPoly { .. } => {}
            Weight::Power { center, exponent } => {
                if centers && !exponent.is_zero() {
                    out.push(*center);
                }
            }
            Weight::Piecewise { breaks, pieces } => {
                if !centers {
                    out.extend_from_slice(breaks);
                }
                for p in pieces {
                    p.collect_points(out, centers);
                }
            }
            Weight::Product { factors } => {
                for f in factors {
                    f.collect_points(out, centers);
                }
            }
            Weight::Rpow { base, exponent } => {
                if !exponent.is_zero() {
                    base.collect_points(out, centers);
                }
            }
        }
    }

    /// Exponent `a` with `w(y) ≍ |y - x0|^a` as `y → x0` from `side`.
    pub fn local_exponent(&self, x0: f64, side: Side) -> f64 {
        match self {
            Weight::Const { .. } | Weight::ExpPoly { .. } => 0.0,
            Weight::Power { center, exponent } => {
                if *center == x0 {
                    exponent.value()
                } else {
                    0.0
                }
            }
            Weight::Piecewise { breaks, pieces } => {
                let idx = match side {
                    Side::Right => piece_index(breaks, x0),
                    Side::Left => breaks.partition_point(|b| *b < x0),
                };
                pieces[idx].local_exponent(x0, side)
            }
            Weight::Product { factors } => factors.iter().map(|f| f.local_exponent(x0, side)).sum(),
            Weight::Rpow { base, exponent } => {
                let e = exponent.value();
                if e == 0.0 {
                    0.0
                } else {
                    e * base.local_exponent(x0, side)
                }
            }
        }
    }

    /// Canonical form: nested powers folded into leaves, products flattened,
    /// exponential and constant factors merged, powers with equal centres
    /// merged, trivial factors dropped.
    pub fn simplify(&self) -> Weight {
        match self {
            Weight::Const { .. } | Weight::Power { .. } => self.clone(),
            Weight::ExpPoly { coeffs } => normalize_exp_poly(coeffs.clone()),
            Weight::Piecewise { breaks, pieces } => {
                let pieces: Vec<Weight> = pieces.iter().map(Weight::simplify).collect();
                if pieces.windows(2).all(|w| w[0] == w[1]) {
                    return pieces.into_iter().next().expect("at least one piece");
                }
                Weight::Piecewise {
                    breaks: breaks.clone(),
                    pieces,
                }
            }
            Weight::Product { factors } => {
                let mut flat = Vec::new();
                for f in factors {
                    match f.simplify() {
                        Weight::Product { factors } => flat.extend(factors),
                        other => flat.push(other),
                    }
                }
                merge_factors(flat)
            }
            Weight::Rpow { base, exponent } => raise(base.simplify(), exponent),
        }
    }

    /// Exact check that the expression trees agree after simplification.
    pub fn same_as(&self, other: &Weight) -> bool {
        self.simplify() == other.simplify()
    }
}

fn piece_index(breaks: &[f64], x: f64) -> usize {
    breaks.partition_point(|b| *b <= x)
}

fn normalize_exp_poly(mut coeffs: Vec<Scalar>) -> Weight {
    while coeffs.last().is_some_and(Scalar::is_zero) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        Weight::one()
    } else {
        Weight::ExpPoly { coeffs }
    }
}

fn raise(base: Weight, e: &Scalar) -> Weight {
    if e.is_one() {
        return base;
    }
    if e.is_zero() {
        return Weight::one();
    }
    match base {
        Weight::Const { value } => {
            if value.is_one() {
                Weight::one()
            } else {
                Weight::Const {
                    value: const_pow(&value, e),
                }
            }
        }
        Weight::ExpPoly { coeffs } => normalize_exp_poly(coeffs.iter().map(|c| c * e).collect()),
        Weight::Power { center, exponent } => {
            let exponent = &exponent * e;
            if exponent.is_zero() {
                Weight::one()
            } else {
                Weight::Power { center, exponent }
            }
        }
        Weight::Piecewise { breaks, pieces } => Weight::Piecewise {
            breaks,
            pieces: pieces.into_iter().map(|p| raise(p, e)).collect(),
        }
        .simplify(),
        Weight::Product { factors } => merge_factors(factors.into_iter().map(|f| raise(f, e)).collect()),
        Weight::Rpow { base, exponent } => raise(*base, &(&exponent * e)),
    }
}

fn const_pow(value: &Scalar, e: &Scalar) -> Scalar {
    // Exact when the exponent is an integer and the base is exact.
    if let (Some(q), Some(k)) = (value.exact(), e.exact()) {
        if k.is_integer() {
            if let Some(n) = k.to_integer().to_i32() {
                if n.unsigned_abs() <= 64 {
                    return Scalar::from_exact(num::traits::Pow::pow(q, n));
                }
            }
        }
    }
    Scalar::float(value.value().powf(e.value()))
}

fn merge_factors(factors: Vec<Weight>) -> Weight {
    let mut constant = Scalar::one();
    let mut poly: Vec<Scalar> = Vec::new();
    let mut has_poly = false;
    let mut powers: Vec<(f64, Scalar)> = Vec::new();
    let mut rest: Vec<Weight> = Vec::new();
    for f in factors {
        match f {
            Weight::Const { value } => constant = &constant * &value,
            Weight::ExpPoly { coeffs } => {
                has_poly = true;
                if coeffs.len() > poly.len() {
                    poly.resize(coeffs.len(), Scalar::zero());
                }
                for (k, c) in coeffs.iter().enumerate() {
                    poly[k] = &poly[k] + c;
                }
            }
            Weight::Power { center, exponent } => match powers.iter_mut().find(|(c, _)| *c == center) {
                Some(entry) => entry.1 = &entry.1 + &exponent,
                None => powers.push((center, exponent)),
            },
            other => rest.push(other),
        }
    }
    let mut out = Vec::new();
    if !constant.is_one() {
        out.push(Weight::Const { value: constant });
    }
    if has_poly {
        match normalize_exp_poly(poly) {
            Weight::Const { .. } => {}
            w => out.push(w),
        }
    }
    powers.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (center, exponent) in powers {
        if !exponent.is_zero() {
            out.push(Weight::Power { center, exponent });
        }
    }
    out.extend(rest);
    match out.len() {
        0 => Weight::one(),
        1 => out.pop().expect("one factor"),
        _ => Weight::Product { factors: out },
    }
}
