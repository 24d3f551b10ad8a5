//! Multi-scale grid search with compass refinement for suprema over triples
//! `a < b < c`, parametrized as `(a, s, t)` with `s = b - a`, `t = c - b`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub a: f64,
    pub s: f64,
    pub t: f64,
}

impl ParamPoint {
    pub fn new(a: f64, s: f64, t: f64) -> Self {
        Self { a, s, t }
    }

    pub fn b(&self) -> f64 {
        self.a + self.s
    }

    pub fn c(&self) -> f64 {
        self.a + self.s + self.t
    }

    fn lex_cmp(&self, other: &Self) -> Ordering {
        self.a
            .total_cmp(&other.a)
            .then(self.s.total_cmp(&other.s))
            .then(self.t.total_cmp(&other.t))
    }
}

/// Which parameters vary: full triples, or single intervals `(a, a + s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SearchShape {
    #[default]
    Triple,
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpec {
    /// The search window is `[-half_width, half_width]`.
    pub half_width: f64,
    /// Increasing rung half-widths; each rung searches triples inside `[-R, R]`.
    pub scale_ladder: Vec<f64>,
    /// Grid points per axis.
    pub coarse_grid: usize,
    /// Number of step halvings in the compass refinement.
    pub refine_rounds: usize,
    /// Refinement stops once every step is below this (log-scale) size.
    pub tolerance: f64,
    /// Smallest subinterval length probed.
    pub min_scale: f64,
    pub shape: SearchShape,
    pub divergence_factor: f64,
    /// Consecutive rung-to-rung growth steps that mark divergence.
    pub divergence_rungs: usize,
    /// Number of grid maxima used as refinement starts.
    pub starts: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            scale_ladder: vec![1.0, 2.0, 4.0, 8.0],
            coarse_grid: 16,
            refine_rounds: 8,
            tolerance: 1e-6,
            min_scale: 1e-3,
            shape: SearchShape::Triple,
            divergence_factor: 2.0,
            divergence_rungs: 3,
            starts: 6,
        }
    }
}

impl SearchSpec {
    pub fn intervals() -> Self {
        Self {
            shape: SearchShape::Interval,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        let bad = |m: &str| Err(NumericsError::InvalidSpec(m.to_string()));
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return bad("window half-width L must be > 0");
        }
        if self.coarse_grid < 8 {
            return bad("coarse_grid must be >= 8");
        }
        if self.refine_rounds < 1 {
            return bad("refine_rounds must be >= 1");
        }
        if !(self.min_scale > 0.0) || self.min_scale >= self.half_width {
            return bad("min_scale must lie in (0, L)");
        }
        if !(self.divergence_factor > 1.0) || self.divergence_rungs == 0 {
            return bad("divergence factor must exceed 1 with at least one rung");
        }
        if self.starts == 0 {
            return bad("starts must be >= 1");
        }
        let mut prev = 0.0;
        for &r in &self.scale_ladder {
            if !(r > prev) || r > self.half_width * (1.0 + 1e-12) {
                return bad("scale_ladder must be strictly increasing within (0, L]");
            }
            prev = r;
        }
        Ok(())
    }

    fn rungs(&self) -> Vec<f64> {
        if self.scale_ladder.is_empty() {
            vec![self.half_width]
        } else {
            self.scale_ladder.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    pub witness: ParamPoint,
    pub refinement_levels: usize,
    pub divergent: bool,
    /// `(rung half-width, running maximum)` pairs.
    pub divergence_evidence: Vec<(f64, f64)>,
    pub evaluations: usize,
    pub failures: usize,
}

/// Search coordinates: location fraction, log s, log t.
#[derive(Debug, Clone, Copy)]
struct Coord {
    phi: f64,
    ls: f64,
    lt: f64,
}

struct Domain<'a> {
    spec: &'a SearchSpec,
    radius: f64,
}

impl Domain<'_> {
    fn triple(&self) -> bool {
        self.spec.shape == SearchShape::Triple
    }

    fn point(&self, c: Coord) -> Option<ParamPoint> {
        let s = c.ls.exp();
        let t = if self.triple() { c.lt.exp() } else { 0.0 };
        let span = 2.0 * self.radius;
        if s + t > span * (1.0 + 1e-12) || !(0.0..=1.0).contains(&c.phi) {
            return None;
        }
        let a = -self.radius + c.phi * (span - s - t).max(0.0);
        Some(ParamPoint { a, s, t })
    }

    fn coord(&self, p: &ParamPoint) -> Coord {
        let span = 2.0 * self.radius;
        let free = span - p.s - p.t;
        let phi = if free > 0.0 {
            ((p.a + self.radius) / free).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Coord {
            phi,
            ls: p.s.ln(),
            lt: if self.triple() { p.t.ln() } else { 0.0 },
        }
    }

    fn clamp(&self, c: Coord) -> Coord {
        let lmin = self.spec.min_scale.ln();
        let lmax = (2.0 * self.radius).ln();
        Coord {
            phi: c.phi.clamp(0.0, 1.0),
            ls: c.ls.clamp(lmin, lmax),
            lt: if self.triple() { c.lt.clamp(lmin, lmax) } else { 0.0 },
        }
    }

    fn grid(&self) -> Vec<Coord> {
        let n = self.spec.coarse_grid;
        let lmin = self.spec.min_scale.ln();
        let lmax = (2.0 * self.radius).ln();
        let axis = |i: usize| lmin + (lmax - lmin) * i as f64 / (n - 1) as f64;
        let mut out = Vec::new();
        let t_count = if self.triple() { n } else { 1 };
        for i in 0..n {
            let phi = i as f64 / (n - 1) as f64;
            for j in 0..n {
                for k in 0..t_count {
                    let c = Coord {
                        phi,
                        ls: axis(j),
                        lt: if self.triple() { axis(k) } else { 0.0 },
                    };
                    if self.point(c).is_some() {
                        out.push(c);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    point: ParamPoint,
}

/// `true` when `(v1, p1)` beats `(v2, p2)`: larger value, ties to the
/// lexicographically smallest point.
fn beats(v1: f64, p1: &ParamPoint, v2: f64, p2: &ParamPoint) -> bool {
    match v1.total_cmp(&v2) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => p1.lex_cmp(p2) == Ordering::Less,
    }
}

fn eval<F>(objective: &F, p: &ParamPoint) -> Option<f64>
where
    F: Fn(&ParamPoint) -> Option<f64> + Sync,
{
    objective(p).filter(|v| !v.is_nan())
}

/// Estimates the supremum of `objective` over the multi-scale search domain.
///
/// Evaluation failures (`None` or NaN) count as `-inf`. The domain is grown
/// rung by rung along the scale ladder; a running maximum that grows by more
/// than `divergence_factor` across `divergence_rungs` consecutive rungs marks
/// the supremum divergent.
pub fn sup_search<F>(objective: F, spec: &SearchSpec) -> Result<SupEstimate, NumericsError>
where
    F: Fn(&ParamPoint) -> Option<f64> + Sync,
{
    spec.validate()?;
    let rungs = spec.rungs();
    let mut evaluations = 0usize;
    let mut failures = 0usize;
    let mut evidence = Vec::with_capacity(rungs.len());
    let mut running: Option<Candidate> = None;
    let mut pool: Vec<Candidate> = Vec::new();

    for &radius in &rungs {
        let domain = Domain { spec, radius };
        let grid = domain.grid();
        if grid.is_empty() {
            return Err(NumericsError::EmptyDomain(format!("rung half-width {radius}")));
        }
        let values: Vec<Option<(f64, ParamPoint)>> = grid
            .par_iter()
            .map(|&c| {
                let p = domain.point(c)?;
                eval(&objective, &p).map(|v| (v, p))
            })
            .collect();
        evaluations += values.len();
        for v in &values {
            match v {
                Some((value, point)) => {
                    let cand = Candidate {
                        value: *value,
                        point: *point,
                    };
                    if running.is_none_or(|r| beats(cand.value, &cand.point, r.value, &r.point)) {
                        running = Some(cand);
                    }
                    pool.push(cand);
                }
                None => failures += 1,
            }
        }
        if let Some(r) = running {
            evidence.push((radius, r.value));
        }
        // keep the pool small: top candidates only
        pool.sort_by(|x, y| {
            if beats(x.value, &x.point, y.value, &y.point) {
                Ordering::Less
            } else if beats(y.value, &y.point, x.value, &x.point) {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        });
        pool.truncate(4 * spec.starts);
    }

    let Some(mut best) = running else {
        return Err(NumericsError::AllEvaluationsFailed(evaluations));
    };

    let divergent = is_divergent(&evidence, spec);

    // Refine on the outermost rung from the best distinct grid maxima.
    let outer = Domain {
        spec,
        radius: *rungs.last().expect("non-empty ladder"),
    };
    let n = spec.coarse_grid as f64 - 1.0;
    let log_span = ((2.0 * outer.radius).ln() - spec.min_scale.ln()) / n;
    let starts: Vec<Candidate> = pool.iter().take(spec.starts).copied().collect();
    let refined: Vec<(Candidate, usize, usize)> = starts
        .par_iter()
        .map(|start| refine(&objective, &outer, *start, 1.0 / n, log_span))
        .collect();
    let mut levels = 0;
    for (cand, evals, fails) in refined {
        evaluations += evals;
        failures += fails;
        if beats(cand.value, &cand.point, best.value, &best.point) {
            best = cand;
        }
        levels = levels.max(spec.refine_rounds);
    }
    if divergent {
        if let Some(last) = evidence.last_mut() {
            last.1 = last.1.max(best.value);
        }
    }

    Ok(SupEstimate {
        value: best.value,
        witness: best.point,
        refinement_levels: levels,
        divergent,
        divergence_evidence: evidence,
        evaluations,
        failures,
    })
}

fn is_divergent(evidence: &[(f64, f64)], spec: &SearchSpec) -> bool {
    let need = spec.divergence_rungs;
    if evidence.len() < need + 1 {
        return false;
    }
    let mut run = 0;
    for w in evidence.windows(2) {
        let (prev, next) = (w[0].1, w[1].1);
        let grew = if prev > 0.0 {
            next > spec.divergence_factor * prev
        } else {
            false
        };
        if grew {
            run += 1;
            if run >= need {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

fn refine<F>(
    objective: &F,
    domain: &Domain<'_>,
    start: Candidate,
    phi_step: f64,
    log_step: f64,
) -> (Candidate, usize, usize)
where
    F: Fn(&ParamPoint) -> Option<f64> + Sync,
{
    let spec = domain.spec;
    let triple = domain.triple();
    let mut best = start;
    let mut here = domain.coord(&start.point);
    let (mut dphi, mut dlog) = (phi_step, log_step);
    let mut evals = 0;
    let mut fails = 0;
    for _ in 0..spec.refine_rounds {
        for _ in 0..64 {
            let mut moves: Vec<(f64, f64, f64)> = vec![
                (dphi, 0.0, 0.0),
                (-dphi, 0.0, 0.0),
                (0.0, dlog, 0.0),
                (0.0, -dlog, 0.0),
            ];
            if triple {
                moves.extend_from_slice(&[
                    (0.0, 0.0, dlog),
                    (0.0, 0.0, -dlog),
                    (0.0, dlog, dlog),
                    (0.0, -dlog, -dlog),
                    (0.0, dlog, -dlog),
                    (0.0, -dlog, dlog),
                ]);
            }
            let mut improved: Option<(Candidate, Coord)> = None;
            for (a, b, c) in moves {
                let next = domain.clamp(Coord {
                    phi: here.phi + a,
                    ls: here.ls + b,
                    lt: here.lt + c,
                });
                let Some(p) = domain.point(next) else {
                    continue;
                };
                evals += 1;
                match eval(objective, &p) {
                    Some(v) => {
                        let (bv, bp) = improved.map_or((best.value, best.point), |(c, _)| (c.value, c.point));
                        if v > bv || (v == bv && improved.is_some() && p.lex_cmp(&bp) == Ordering::Less) {
                            improved = Some((Candidate { value: v, point: p }, next));
                        }
                    }
                    None => fails += 1,
                }
            }
            match improved {
                Some((cand, coord)) => {
                    best = cand;
                    here = coord;
                }
                None => break,
            }
        }
        if dlog < spec.tolerance && dphi < spec.tolerance {
            break;
        }
        dphi *= 0.5;
        dlog *= 0.5;
    }
    (best, evals, fails)
}
