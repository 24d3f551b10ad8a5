//! Static descriptions of each experiment: inputs, what the outputs check,
//! and CSV columns.

use std::fmt::Write as _;

use crate::LabError;

pub struct Field {
    pub name: &'static str,
    pub doc: &'static str,
}

pub struct Description {
    pub name: &'static str,
    pub summary: &'static str,
    pub inputs: &'static [Field],
    pub outputs: &'static [Field],
    /// `(file stem, columns)`.
    pub tables: &'static [(&'static str, &'static [&'static str])],
}

const fn f(name: &'static str, doc: &'static str) -> Field {
    Field { name, doc }
}

const WEIGHT_DOC: &str = "weight expression: {\"kind\": \"const\" | \"exp_poly\" | \"power\" | \"piecewise\" | \"product\" | \"rpow\", ...}";
const SEARCH_DOC: &str = "optional search spec: half_width, scale_ladder, coarse_grid, refine_rounds, tolerance, min_scale, shape, divergence_factor, divergence_rungs, starts";
const FAMILY_DOC: &str = "{p, weight (default 1), count, seed, modes: [translates | dilates | random_bumps | indicators]}";
const FUNCTION_DOC: &str = "list of terms {\"shape\": \"indicator\" | \"c1_bump\" | \"cinf_bump\", ...}; [] is the zero function";
const KERNEL_DOC: &str = "{\"kind\": \"fractional\" | \"cz_hilbert\" | \"custom\", \"params\": {...}, hormander: {r, gamma}?, delta?}";

pub const EXPERIMENTS: &[Description] = &[
    Description {
        name: "class-constant",
        summary: "Estimate a one-sided Muckenhoupt constant as a supremum over triples a < b < c.",
        inputs: &[
            f("weight", WEIGHT_DOC),
            f("class", "Ap+ | Ap- | Apq+ | Apq-"),
            f("p", "exponent, 1 < p < ∞ (number or \"n/d\")"),
            f("q", "second exponent for Apq classes, q >= p"),
            f("search", SEARCH_DOC),
            f("expect", "optional {value?, rel_tol = 1e-4, divergent = false}"),
        ],
        outputs: &[
            f("result.estimate.value", "sup over triples of the averaged product defining the class"),
            f("result.member_verdict", "member-at-scale, divergent (running maximum grows across the ladder) or inconclusive"),
            f("result.witness", "triple attaining the estimate"),
        ],
        tables: &[("ladder", &["half_width", "running_max"])],
    },
    Description {
        name: "rhi",
        summary: "Largest reverse Hölder exponent on one half of each sampled interval.",
        inputs: &[
            f("weight", WEIGHT_DOC),
            f("side", "left_half (forward) | right_half (backward)"),
            f("sampling", "optional {half_width, min_length, max_length, lengths, positions}"),
            f("r_grid", "exponents r > 1 to probe (default 1.1..5)"),
            f("cap", "largest acceptable constant (default 4)"),
        ],
        outputs: &[
            f("result.r", "largest grid exponent whose reverse Hölder constant stays under the cap"),
            f("result.constants", "smallest constant for each probed r"),
        ],
        tables: &[("constants", &["r", "constant"])],
    },
    Description {
        name: "gap-check",
        summary: "Two-weight condition with a gap between the averaging intervals against the ungapped condition.",
        inputs: &[
            f("u", WEIGHT_DOC),
            f("v", WEIGHT_DOC),
            f("p", "exponent p > 1"),
            f("q", "exponent q > 1"),
            f("t", "gap ratio t > 2 (default 4)"),
            f("K", "hypothesised bound on the gapped quantity"),
            f("search", SEARCH_DOC),
        ],
        outputs: &[
            f("result.gapped_max", "sup of the gapped quantity over intervals split at ratio t"),
            f("result.ungapped_max", "sup of the ungapped two-weight quantity over triples"),
            f("result.lemma_satisfied", "gapped <= K implies ungapped <= K (1 + 1e-3)"),
        ],
        tables: &[("gap", &["gapped_max", "ungapped_max", "K"])],
    },
    Description {
        name: "transfer-check",
        summary: "Off-diagonal constants against the diagonal constants of w^q and w^{-p'}.",
        inputs: &[
            f("weight", WEIGHT_DOC),
            f("p", "exponent p > 1"),
            f("q", "exponent q >= p"),
            f("search", SEARCH_DOC),
            f("tolerance", "relative tolerance per leg (default 1e-2)"),
        ],
        outputs: &[f(
            "result.legs",
            "[w]_{Apq+}^q against [w^q]_{A_{1+q/p'}^+}, and the dual and backward legs",
        )],
        tables: &[("legs", &["powered_constant", "transferred_constant", "residual"])],
    },
    Description {
        name: "interpolate",
        summary: "Build an interpolation plan, diagonal or offdiagonal, and verify its exact identities.",
        inputs: &[
            f(
                "plan",
                "{\"mode\": \"diagonal\", lambda, p, p1} or {\"mode\": \"offdiagonal\", p, q, p1, q1}; exponents exact when given as \"n/d\"",
            ),
            f("w", WEIGHT_DOC),
            f("w1", WEIGHT_DOC),
            f("theta", "interpolation parameter in (0, theta_max]"),
            f("verify", "estimate the endpoint weight's class constant (default true)"),
            f("search", SEARCH_DOC),
        ],
        outputs: &[
            f("result.plan", "endpoint exponents p0 (q0), epsilon, delta, Hölder exponents r, s, t, u and the endpoint weight w0"),
            f("result.verification.exponent_residuals", "convexity relations among the exponents, exactly zero in rational arithmetic"),
            f("result.verification.exact_identity", "w reconstructed from w0 and w1 with the convexity powers"),
            f("checks", "r = s and t = u, and agreement with the collapsed forms of r and t"),
        ],
        tables: &[("exponents", &["theta", "p0", "q0", "eps", "delta", "r", "s", "t", "u"])],
    },
    Description {
        name: "counterexample",
        summary: "Endpoint weight built from w = e^{x³} and w1 = e^x; a convergent forward tail excludes the forward class.",
        inputs: &[
            f("q", "exponent q > 1"),
            f("q1", "exponent q1 > 1"),
            f("theta", "parameter in (0, 1)"),
            f("theta_sweep", "optional further parameters"),
        ],
        outputs: &[
            f("result.probe.w0", "endpoint weight as an expression tree"),
            f("result.probe.tail", "partial integrals of w0 over (0, cutoff) on a geometric ladder"),
            f("result.probe.conclusion", "\"violates A_p^+ necessary condition\" when the tail converges"),
        ],
        tables: &[("tail", &["cutoff", "log_partial", "log_increment"]), ("sweep", &["theta", "q0", "convergent"])],
    },
    Description {
        name: "hormander-check",
        summary: "Sampled smoothness check of a one-sided kernel: ring integrals, or the pointwise bound for the fractional kernel.",
        inputs: &[
            f("kernel", KERNEL_DOC),
            f("sampling", "optional {balls, pairs_per_ball, max_ring, center_range, radius_range, pointwise_samples, seed}"),
            f("max_ratio", "optional largest acceptable ratio to the claimed bound"),
        ],
        outputs: &[
            f("result.max_ratio", "largest ratio of the sampled left side to the bound"),
            f("result.fitted_constant", "max ratio times the size constant"),
            f("result.worst_case", "sample attaining the max ratio"),
        ],
        tables: &[("summary", &["samples", "max_ratio", "fitted_constant"])],
    },
    Description {
        name: "truncation-error",
        summary: "Distance between the commutator and its smoothly truncated version, scaled by |b'| Mf, against delta.",
        inputs: &[
            f("symbol", FUNCTION_DOC),
            f("kernel", KERNEL_DOC),
            f("family", FAMILY_DOC),
            f("delta_grid", "truncation scales in (0, 1)"),
            f("x_samples", "optional evaluation points (default 65 points over the family's hull)"),
        ],
        outputs: &[
            f("result.report.fit", "log-log fit of the max ratio against delta; linear decay expected"),
            f("result.report.constants", "max ratio / delta per delta; stable within a factor 2"),
        ],
        tables: &[("truncation_error", &["delta", "max_ratio", "constant"])],
    },
    Description {
        name: "rk-moduli",
        summary: "Bound, translation modulus and tail mass of an operator over a sampled unit ball.",
        inputs: &[
            f("operator", "{\"op\": \"identity\"} | {\"op\": \"kernel\", kernel, mode?} | {\"op\": \"commutator\", symbol, kernel, mode?}"),
            f("family", FAMILY_DOC),
            f("h_grid", "increasing translation steps"),
            f("m_grid", "increasing tail radii"),
            f("out_exponent", "optional norm exponent of the output (default family p)"),
        ],
        outputs: &[
            f("result.moduli.B", "largest output norm"),
            f("result.moduli.omega", "largest ||Tf(· + h) - Tf|| per h"),
            f("result.moduli.tau", "largest ||Tf on |x| > M|| per M"),
        ],
        tables: &[("omega", &["h", "omega"]), ("tau", &["M", "tau"])],
    },
    Description {
        name: "commutator-report",
        summary: "Compactness diagnostics for [b, T] with T fractional (L^p to L^q) or truncated Hilbert (L^p).",
        inputs: &[
            f("symbol", FUNCTION_DOC),
            f(
                "operator",
                "{\"kind\": \"fractional\", alpha, p, q} with 1/q = 1/p - alpha, or {\"kind\": \"truncated_cz\", p, delta, hormander: {r, gamma}}",
            ),
            f("weight", "weight of the input space (default 1); norms use the density transfer"),
            f("settings", "optional {family: {count, seed, modes}, h_grid, m_grid, tau_target: {m, max}?, exponent_slack}"),
        ],
        outputs: &[
            f("result.moduli", "B, omega and tau over the sampled family"),
            f("result.fits", "translation exponent against min(gamma - 1/r', 1) and tail slope against the size decay"),
            f("result.checks", "monotonicity of the moduli, finiteness of B, fits and the optional tau target"),
            f("result.caveats", "what a finite family can and cannot show"),
        ],
        tables: &[("omega", &["h", "omega"]), ("tau", &["M", "tau"])],
    },
];

pub fn lookup(name: &str) -> Result<&'static Description, LabError> {
    EXPERIMENTS
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| LabError::UnknownExperiment(name.to_string()))
}

pub fn render(d: &Description) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}: {}\n\ninputs:", d.name, d.summary);
    for x in d.inputs {
        let _ = writeln!(s, "  {:<14} {}", x.name, x.doc);
    }
    s.push_str("\noutputs:\n");
    for x in d.outputs {
        let _ = writeln!(s, "  {} : {}", x.name, x.doc);
    }
    s.push_str("\ncsv tables:\n");
    for (stem, cols) in d.tables {
        let _ = writeln!(s, "  {stem}.csv: {}", cols.join(","));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_check_lists_inputs() {
        let text = render(lookup("gap-check").unwrap());
        for field in ["u", "v", "p", "q", "t", "K"] {
            assert!(text.lines().any(|l| l.trim_start().starts_with(&format!("{field} "))), "{field}");
        }
    }

    #[test]
    fn interpolate_mentions_both_modes() {
        let text = render(lookup("interpolate").unwrap());
        assert!(text.contains("diagonal") && text.contains("offdiagonal"));
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(lookup("bogus"), Err(LabError::UnknownExperiment(_))));
    }
}
