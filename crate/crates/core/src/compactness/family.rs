//! Finite families standing in for the unit ball of `L^p(w)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::{Integrator, QuadOptions};
use crate::operators::{SampledFunction, Term, UniformGrid};
use crate::weights::Weight;

use super::CompactnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    /// `g(· - j)` for the unit C¹ bump `g` centred at 0.
    Translates,
    /// `2^{j/p} g(2^j ·)`.
    Dilates,
    /// C¹ bumps with centre in `[-2, 2]` and radius in `[1/4, 1]`.
    RandomBumps,
    /// Indicators of intervals starting in `[-2, 1.5]` with length in `[0.1, 1.5]`.
    Indicators,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyProvenance {
    pub seed: u64,
    pub modes: Vec<SamplerMode>,
    pub count: usize,
    pub p: f64,
    pub weight: Weight,
    /// Common factor applied after normalization (1 for sampler output).
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFamily {
    pub members: Vec<SampledFunction>,
    pub provenance: FamilyProvenance,
}

/// Normalization target: every member has norm `1 ± NORM_TOLERANCE`.
pub const NORM_TOLERANCE: f64 = 1e-9;

fn norm_integrator() -> Integrator {
    Integrator::new(QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_evals: 400_000,
    })
}

/// `‖f‖_{L^p(w)}` by quadrature over the support of `f`.
pub fn weighted_norm(f: &SampledFunction, p: f64, w: &Weight) -> Result<f64, CompactnessError> {
    let [lo, hi] = f.support;
    if !(lo < hi) {
        return Ok(0.0);
    }
    let mut breaks = f.breakpoints();
    breaks.extend(w.breakpoints());
    breaks.extend(w.singular_points());
    breaks.retain(|b| *b > lo && *b < hi);
    let trivial = w.same_as(&Weight::one());
    let g = |x: f64| {
        let v = f.eval(x).abs();
        if v == 0.0 {
            0.0
        } else if trivial {
            v.powf(p)
        } else {
            (p * v.ln() + w.log_eval(x)).exp()
        }
    };
    let total = norm_integrator().integrate(&g, lo, hi, &breaks, None)?.value;
    Ok(total.powf(1.0 / p))
}

impl TestFamily {
    pub fn p(&self) -> f64 {
        self.provenance.p
    }

    pub fn weight(&self) -> &Weight {
        &self.provenance.weight
    }

    /// Every member multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            members: self.members.iter().map(|f| f.scaled(c)).collect(),
            provenance: FamilyProvenance {
                scale: self.provenance.scale * c,
                ..self.provenance.clone()
            },
        }
    }

    /// Family of explicitly given members, normalized in `L^p(w)`.
    pub fn normalized(members: Vec<SampledFunction>, p: f64, w: &Weight) -> Result<Self, CompactnessError> {
        check_space(p, w)?;
        let count = members.len();
        let members = members
            .into_iter()
            .map(|f| normalize(f, p, w))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            members,
            provenance: FamilyProvenance {
                seed: 0,
                modes: Vec::new(),
                count,
                p,
                weight: w.clone(),
                scale: 1.0,
            },
        })
    }
}

fn check_space(p: f64, w: &Weight) -> Result<(), CompactnessError> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(CompactnessError::InvalidParams(format!("need 1 <= p < ∞, got {p}")));
    }
    w.validate()?;
    Ok(())
}

fn normalize(f: SampledFunction, p: f64, w: &Weight) -> Result<SampledFunction, CompactnessError> {
    let n = weighted_norm(&f, p, w)?;
    if !(n > 0.0) || !n.is_finite() {
        return Err(CompactnessError::NormalizationFailure(format!(
            "member supported on {:?} has L^p(w) norm {n}",
            f.support
        )));
    }
    let g = f.scaled(1.0 / n);
    let check = weighted_norm(&g, p, w)?;
    if (check - 1.0).abs() > NORM_TOLERANCE {
        return Err(CompactnessError::NormalizationFailure(format!("renormalized norm is {check}")));
    }
    Ok(g)
}

fn bump(center: f64, radius: f64, amplitude: f64) -> Result<SampledFunction, CompactnessError> {
    Ok(SampledFunction::from_terms(
        vec![Term::C1Bump {
            center,
            radius,
            amplitude,
        }],
        UniformGrid::standard(),
    )?)
}

/// Deterministic family of `count` members, cycling through `modes`; the
/// `j`-th member drawn from a mode uses index `j` for translates and dilates.
pub fn unit_ball_sampler(
    p: f64,
    w: &Weight,
    count: usize,
    seed: u64,
    modes: &[SamplerMode],
) -> Result<TestFamily, CompactnessError> {
    check_space(p, w)?;
    if count == 0 || modes.is_empty() {
        return Err(CompactnessError::InvalidParams("need count >= 1 and at least one mode".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counters = vec![0usize; modes.len()];
    let mut members = Vec::with_capacity(count);
    for i in 0..count {
        let slot = i % modes.len();
        let j = counters[slot];
        counters[slot] += 1;
        let f = match modes[slot] {
            SamplerMode::Translates => bump(j as f64, 1.0, 1.0)?,
            SamplerMode::Dilates => {
                let s = 2f64.powi(j as i32);
                bump(0.0, 1.0 / s, s.powf(1.0 / p))?
            }
            SamplerMode::RandomBumps => {
                let c = rng.gen_range(-2.0..=2.0);
                let r = rng.gen_range(0.25..=1.0);
                bump(c, r, 1.0)?
            }
            SamplerMode::Indicators => {
                let lo = rng.gen_range(-2.0..=1.5);
                let len = rng.gen_range(0.1..=1.5);
                SampledFunction::from_terms(
                    vec![Term::Indicator {
                        lo,
                        hi: lo + len,
                        amplitude: 1.0,
                    }],
                    UniformGrid::standard(),
                )?
            }
        };
        members.push(normalize(f, p, w)?);
    }
    Ok(TestFamily {
        members,
        provenance: FamilyProvenance {
            seed,
            modes: modes.to_vec(),
            count,
            p,
            weight: w.clone(),
            scale: 1.0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn members_are_normalized() {
        let modes = [SamplerMode::RandomBumps, SamplerMode::Indicators, SamplerMode::Translates];
        let fam = unit_ball_sampler(2.0, &Weight::exp_linear(1), 5, 7, &modes).unwrap();
        assert_eq!(fam.members.len(), 5);
        for f in &fam.members {
            let n = weighted_norm(f, 2.0, fam.weight()).unwrap();
            assert!((n - 1.0).abs() <= NORM_TOLERANCE, "{n}");
        }
    }

    #[test]
    fn deterministic() {
        let modes = [SamplerMode::RandomBumps, SamplerMode::Indicators];
        let a = unit_ball_sampler(1.5, &Weight::one(), 6, 42, &modes).unwrap();
        let b = unit_ball_sampler(1.5, &Weight::one(), 6, 42, &modes).unwrap();
        assert_eq!(a, b);
        let c = unit_ball_sampler(1.5, &Weight::one(), 6, 43, &modes).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dilates_need_no_rescaling() {
        let p = 4.0 / 3.0;
        let fam = unit_ball_sampler(p, &Weight::one(), 6, 0, &[SamplerMode::Dilates]).unwrap();
        let base = fam.members[0].sup_norm();
        for (j, f) in fam.members.iter().enumerate() {
            let want = base * 2f64.powf(j as f64 / p);
            assert!((f.sup_norm() - want).abs() < 1e-9 * want, "{j}");
        }
    }

    #[test]
    fn degenerate_member_fails() {
        let z = SampledFunction::zero(UniformGrid::standard());
        assert!(matches!(
            TestFamily::normalized(vec![z], 2.0, &Weight::one()),
            Err(CompactnessError::NormalizationFailure(_))
        ));
    }
}
