//! Dispatch from a parsed config to the core library.

use serde::Serialize;
use serde_json::{json, Value};

use onesided_core::compactness::{
    commutator_compactness_report, rk_moduli, truncation_error_experiment, unit_ball_sampler, Check, Table,
    DELTA_SLOPE_SLACK,
};
use onesided_core::extrapolation::{counterexample_probe, solve, verify_plan, ProbeConclusion};
use onesided_core::operators::{hormander_check, BoundKind};
use onesided_core::weights::{apq_transfer_check, class_constant, gap_condition_check, rhi_exponent, TailVerdict};

use crate::config::{Experiment, FamilyConfig};
use crate::LabError;

/// What one experiment produced: a JSON result, named checks and CSV tables.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: Value,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

fn compute<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, LabError> {
    r.map_err(|e| LabError::Compute(e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn sample_family(f: &FamilyConfig) -> Result<onesided_core::compactness::TestFamily, LabError> {
    compute(unit_ball_sampler(f.p, &f.weight, f.count, f.seed, &f.modes))
}

pub fn execute(experiment: &Experiment) -> Result<Outcome, LabError> {
    match experiment {
        Experiment::ClassConstant(c) => {
            let rep = compute(class_constant(&c.weight, c.class, &c.exponents(), &c.search))?;
            let mut checks = Vec::new();
            if let Some(e) = &c.expect {
                if let Some(v) = e.value {
                    let rel = (rep.value() - v).abs() / v.abs();
                    checks.push(check(
                        "expected value",
                        !rep.is_divergent() && rel <= e.rel_tol,
                        format!("estimate {} vs {v}, relative error {rel:e}, tolerance {:e}", rep.value(), e.rel_tol),
                    ));
                }
                checks.push(check(
                    "expected divergence",
                    rep.is_divergent() == e.divergent,
                    format!("verdict {:?}", rep.member_verdict),
                ));
            }
            let ladder = rep.estimate.divergence_evidence.iter().map(|(r, v)| vec![*r, *v]).collect();
            Ok(Outcome {
                result: to_json(&rep),
                checks,
                tables: vec![Table::new("ladder", &["half_width", "running_max"], ladder)],
            })
        }
        Experiment::Rhi(c) => {
            let est = compute(rhi_exponent(&c.weight, c.side, &c.sampling, &c.r_grid, c.cap))?;
            let rows = est.constants.iter().map(|(r, k)| vec![*r, *k]).collect();
            Ok(Outcome {
                result: to_json(&est),
                checks: vec![check("constant within cap", est.constant <= est.cap, format!("r = {}, C = {}", est.r, est.constant))],
                tables: vec![Table::new("constants", &["r", "constant"], rows)],
            })
        }
        Experiment::GapCheck(c) => {
            let rep = compute(gap_condition_check(&c.u, &c.v, &c.p, &c.q, c.t, c.k, &c.search))?;
            let detail = format!(
                "gapped {} ungapped {} K {} (hypothesis met: {})",
                rep.gapped_max, rep.ungapped_max, rep.k, rep.hypothesis_met
            );
            Ok(Outcome {
                checks: vec![check("gap lemma", rep.lemma_satisfied, detail)],
                tables: vec![Table::new(
                    "gap",
                    &["gapped_max", "ungapped_max", "K"],
                    vec![vec![rep.gapped_max, rep.ungapped_max, rep.k]],
                )],
                result: to_json(&rep),
            })
        }
        Experiment::TransferCheck(c) => {
            let rep = compute(apq_transfer_check(&c.weight, &c.p, &c.q, &c.search))?;
            let checks = rep
                .legs
                .iter()
                .map(|l| {
                    let pass = match l.residual {
                        Some(r) => r <= c.tolerance,
                        None => l.divergent,
                    };
                    check(&l.name, pass, format!("{} vs {}", l.powered_constant, l.transferred_constant))
                })
                .collect();
            let rows = rep
                .legs
                .iter()
                .map(|l| vec![l.powered_constant, l.transferred_constant, l.residual.unwrap_or(f64::NAN)])
                .collect();
            Ok(Outcome {
                result: to_json(&rep),
                checks,
                tables: vec![Table::new("legs", &["powered_constant", "transferred_constant", "residual"], rows)],
            })
        }
        Experiment::Interpolate(c) => {
            let plan = compute(solve(&c.plan, &c.w, &c.w1, &c.theta))?;
            let collapsed = compute(c.plan.collapsed_r_t(&c.theta))?;
            let mut checks = vec![
                check("r = s", plan.r_theta == plan.s_theta, format!("r = {}, s = {}", plan.r_theta, plan.s_theta)),
                check("t = u", plan.t_theta == plan.u_theta, format!("t = {}, u = {}", plan.t_theta, plan.u_theta)),
                check(
                    "collapsed forms",
                    collapsed.0 == plan.r_theta && collapsed.1 == plan.t_theta,
                    format!("r = {}, t = {}", collapsed.0, collapsed.1),
                ),
            ];
            let verification = if c.verify {
                let v = compute(verify_plan(&plan, &c.search))?;
                for r in &v.exponent_residuals {
                    checks.push(check(&r.name, r.exact_zero, format!("residual {}", r.value)));
                }
                checks.push(check(
                    "reconstruction",
                    v.exact_identity || v.reconstruction_residual <= 1e-9,
                    format!("exact: {}, sampled residual {:e}", v.exact_identity, v.reconstruction_residual),
                ));
                Some(v)
            } else {
                None
            };
            let q0 = plan.q0.as_ref().map_or(f64::NAN, |s| s.value());
            let row = vec![
                plan.theta.value(),
                plan.p0.value(),
                q0,
                plan.eps.value(),
                plan.delta.value(),
                plan.r_theta.value(),
                plan.s_theta.value(),
                plan.t_theta.value(),
                plan.u_theta.value(),
            ];
            Ok(Outcome {
                result: json!({ "plan": to_json(&plan), "verification": to_json(&verification) }),
                checks,
                tables: vec![Table::new("exponents", &["theta", "p0", "q0", "eps", "delta", "r", "s", "t", "u"], vec![row])],
            })
        }
        Experiment::Counterexample(c) => {
            let main = compute(counterexample_probe(c.q.clone(), c.q1.clone(), c.theta.clone()))?;
            let sweep = c
                .theta_sweep
                .iter()
                .map(|t| compute(counterexample_probe(c.q.clone(), c.q1.clone(), t.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            let mut checks = vec![check(
                "violation",
                main.conclusion == ProbeConclusion::Violation,
                main.conclusion.as_str(),
            )];
            if !sweep.is_empty() {
                let bad: Vec<String> = sweep
                    .iter()
                    .filter(|r| r.tail_verdict != Some(TailVerdict::Convergent))
                    .map(|r| r.theta.to_string())
                    .collect();
                checks.push(check("sweep convergent", bad.is_empty(), format!("non-convergent at {bad:?}")));
            }
            let rungs = main
                .tail
                .as_ref()
                .map(|t| t.rungs.iter().map(|r| vec![r.cutoff, r.log_partial, r.log_increment]).collect())
                .unwrap_or_default();
            let sweep_rows = sweep
                .iter()
                .map(|r| vec![r.theta.value(), r.q0.value(), f64::from(u8::from(r.tail_verdict == Some(TailVerdict::Convergent)))])
                .collect();
            Ok(Outcome {
                result: json!({ "probe": to_json(&main), "sweep": to_json(&sweep) }),
                checks,
                tables: vec![
                    Table::new("tail", &["cutoff", "log_partial", "log_increment"], rungs),
                    Table::new("sweep", &["theta", "q0", "convergent"], sweep_rows),
                ],
            })
        }
        Experiment::HormanderCheck(c) => {
            let k = c.kernel.build()?;
            let rep = compute(hormander_check(&k, k.hormander, &c.sampling))?;
            let limit = c.max_ratio.unwrap_or(f64::INFINITY);
            let pass = rep.max_ratio.is_finite() && rep.max_ratio <= limit;
            let kind = match rep.bound_kind {
                BoundKind::Ring => "ring",
                BoundKind::TruncatedRing => "truncated ring",
                BoundKind::Pointwise => "pointwise",
            };
            Ok(Outcome {
                checks: vec![check("max ratio", pass, format!("{kind} bound, max ratio {} (limit {limit})", rep.max_ratio))],
                tables: vec![Table::new(
                    "summary",
                    &["samples", "max_ratio", "fitted_constant"],
                    vec![vec![rep.samples as f64, rep.max_ratio, rep.fitted_constant]],
                )],
                result: to_json(&rep),
            })
        }
        Experiment::TruncationError(c) => {
            let b = c.symbol.build()?;
            let k = c.kernel.build()?;
            let family = sample_family(&c.family)?;
            let rep = compute(truncation_error_experiment(&b, &k, &family, &c.delta_grid, c.x_samples.as_deref()))?;
            let rows = rep
                .fit
                .grid
                .iter()
                .zip(&rep.fit.values)
                .zip(&rep.constants)
                .map(|((d, v), (_, k))| vec![*d, *v, *k])
                .collect();
            Ok(Outcome {
                checks: vec![
                    check(
                        "delta exponent",
                        rep.fit.passed(),
                        format!("exponent {} (1 ± {DELTA_SLOPE_SLACK})", rep.fit.fitted_exponent),
                    ),
                    check("constant stable within 2x", rep.constant_spread <= 2.0, format!("spread {}", rep.constant_spread)),
                ],
                tables: vec![Table::new("truncation_error", &["delta", "max_ratio", "constant"], rows)],
                result: json!({ "report": to_json(&rep), "family_provenance": to_json(&family.provenance) }),
            })
        }
        Experiment::RkModuli(c) => {
            let op = c.operator.build()?;
            let family = sample_family(&c.family)?;
            let out = c.out_exponent.unwrap_or(c.family.p);
            let m = compute(rk_moduli(&op, &family, &c.h_grid, &c.m_grid, out))?;
            let pairs = |v: &[(f64, f64)]| v.iter().map(|(a, b)| vec![*a, *b]).collect();
            Ok(Outcome {
                checks: vec![
                    check("tau non-increasing in M", m.tau_nonincreasing(), format!("{:?}", m.tau)),
                    check("omega non-decreasing in h", m.omega_nondecreasing(), format!("{:?}", m.omega)),
                    check("B finite", m.bound_b.is_finite(), format!("B = {}", m.bound_b)),
                ],
                tables: vec![
                    Table::new("omega", &["h", "omega"], pairs(&m.omega)),
                    Table::new("tau", &["M", "tau"], pairs(&m.tau)),
                ],
                result: json!({ "moduli": to_json(&m), "family_provenance": to_json(&family.provenance) }),
            })
        }
        Experiment::CommutatorReport(c) => {
            let b = c.symbol.build()?;
            let rep = compute(commutator_compactness_report(&b, c.operator, &c.weight, &c.settings))?;
            Ok(Outcome {
                checks: rep.checks.clone(),
                tables: rep.tables(),
                result: to_json(&rep),
            })
        }
    }
}
