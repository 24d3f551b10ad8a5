//! Least-squares power-law fits `value ≈ C · x^e` on log–log axes.

use serde::{Deserialize, Serialize};

use super::CompactnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub name: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub fitted_exponent: f64,
    pub fitted_constant: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    /// Every value is exactly zero; exponent and constant are reported as 0.
    pub exact_zero: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl FitReport {
    /// Records `pass = exact_zero || cmp(fitted_exponent, threshold)`.
    pub fn judged(mut self, threshold: f64, ok: impl Fn(f64, f64) -> bool) -> Self {
        self.threshold = Some(threshold);
        self.pass = Some(self.exact_zero || ok(self.fitted_exponent, threshold));
        self
    }

    pub fn passed(&self) -> bool {
        self.pass.unwrap_or(true)
    }
}

pub fn power_fit(name: &str, grid: &[f64], values: &[f64]) -> Result<FitReport, CompactnessError> {
    if grid.len() != values.len() || grid.len() < 2 {
        return Err(CompactnessError::DegenerateFit(format!("{name}: need at least two grid points and matching values")));
    }
    if grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CompactnessError::DegenerateFit(format!("{name}: grid must be positive and strictly increasing")));
    }
    if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(CompactnessError::DegenerateFit(format!("{name}: values must be finite and non-negative")));
    }
    let base = FitReport {
        name: name.to_string(),
        grid: grid.to_vec(),
        values: values.to_vec(),
        fitted_exponent: 0.0,
        fitted_constant: 0.0,
        residual: 0.0,
        exact_zero: false,
        threshold: None,
        pass: None,
    };
    if values.iter().all(|v| *v == 0.0) {
        return Ok(FitReport { exact_zero: true, ..base });
    }
    if values.iter().any(|v| *v == 0.0) {
        return Err(CompactnessError::DegenerateFit(format!("{name}: some but not all values vanish")));
    }
    let xs: Vec<f64> = grid.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(FitReport {
        fitted_exponent: slope,
        fitted_constant: intercept.exp(),
        residual: (rss / n).sqrt(),
        ..base
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let g = [0.1, 0.2, 0.4, 0.8];
        let v: Vec<f64> = g.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        let f = power_fit("t", &g, &v).unwrap();
        assert!((f.fitted_exponent + 0.5).abs() < 1e-12);
        assert!((f.fitted_constant - 3.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn zero_values() {
        let f = power_fit("z", &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert!(f.exact_zero);
        assert!(f.judged(1.0, |e, t| e >= t).passed());
        assert!(power_fit("z", &[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(power_fit("g", &[2.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(power_fit("g", &[1.0], &[1.0]).is_err());
    }
}
