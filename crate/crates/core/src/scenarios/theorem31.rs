use serde::{Deserialize, Serialize};

use super::{
    bisect_flag, fmt_stabilities, inventory, wide_scan, Assertion, Inventory, ScenarioError, ScenarioReport,
    StageReport, FOCUS_A, FOCUS_B,
};
use crate::cycles::{CycleError, LimitCycle, ScanConfig, Stability};
use crate::rotation::RotationParamId;
use crate::systems::{EquilibriumKind, Params24};

/// Settings of the four-stage construction. Every "small" parameter is found by a line
/// search with at most `budget` evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Theorem31Config {
    pub gamma: f64,
    /// Smallest `-gamma - lambda` tried in the lambda search; later tries grow geometrically to `1 - gamma`.
    pub lambda_offset_min: f64,
    /// `-gamma - lambda` used when the lambda search finds nothing.
    pub lambda_offset_default: f64,
    /// Magnitudes tried for negative `alpha`, log-spaced.
    pub alpha_range: (f64, f64),
    pub beta_step: f64,
    /// Distance past the located beta flip at which the new inventory is taken.
    pub beta_probe: f64,
    /// Half-width of the window around the analytic lambda threshold.
    pub lambda_window: f64,
    pub flip_width: f64,
    pub budget: usize,
    pub scan: ScanConfig,
}

impl Default for Theorem31Config {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            lambda_offset_min: 1e-3,
            lambda_offset_default: 0.02,
            alpha_range: (1e-4, 0.1),
            beta_step: 1e-3,
            beta_probe: 1e-3,
            lambda_window: 0.01,
            flip_width: 1e-6,
            budget: 64,
            scan: wide_scan(),
        }
    }
}

/// A parameter interval across which the cycle count around `(0, 0)` changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub param: RotationParamId,
    pub bracket: (f64, f64),
    pub estimate: f64,
    /// Value where the trace at `(0, 0)` vanishes.
    pub analytic: f64,
    /// Cycle counts around `(0, 0)` at the two ends of the bracket.
    pub counts: (usize, usize),
}

impl Transition {
    pub fn error(&self) -> f64 {
        (self.estimate - self.analytic).abs()
    }
}

fn count_a(p: &Params24, scan: &ScanConfig) -> Result<usize, CycleError> {
    Ok(inventory(p, scan)?.cycles_at(FOCUS_A).len())
}

fn localize(
    param: RotationParamId,
    base: &Params24,
    (lo, hi): (f64, f64),
    analytic: f64,
    cfg: &Theorem31Config,
) -> Result<Option<Transition>, CycleError> {
    let at = |mu: f64| count_a(&param.with(base, mu), &cfg.scan);
    let (c_lo, c_hi) = (at(lo)?, at(hi)?);
    if c_lo == c_hi {
        return Ok(None);
    }
    let (a, b) = bisect_flag(|mu| at(mu).map(|c| c == c_lo), (lo, true), (hi, false), cfg.flip_width, cfg.budget)?;
    Ok(Some(Transition { param, bracket: (a, b), estimate: 0.5 * (a + b), analytic, counts: (c_lo, c_hi) }))
}

/// Locates the change in the cycle count around `(0, 0)` as `lambda` crosses the window
/// around `-gamma` (`beta = alpha = 0`).
pub fn lambda_birth(gamma: f64, cfg: &Theorem31Config) -> Result<Option<Transition>, CycleError> {
    let base = Params24::two_focus(0.0, 0.0, 0.0, gamma);
    let w = cfg.lambda_window;
    localize(RotationParamId::Lambda, &base, (-gamma - w, -gamma + w), -gamma, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaFlip {
    pub transition: Transition,
    pub before: Inventory,
    pub after: Inventory,
    /// Innermost cycle around `(0, 0)` after the flip when it is new and stable.
    pub born: Option<LimitCycle>,
}

/// Steps `beta` up from zero until the cycle count around `(0, 0)` changes, then bisects.
pub fn beta_flip(gamma: f64, lambda: f64, alpha: f64, cfg: &Theorem31Config) -> Result<Option<BetaFlip>, CycleError> {
    let base = Params24::two_focus(lambda, alpha, 0.0, gamma);
    let c0 = count_a(&base, &cfg.scan)?;
    let mut prev = 0.0;
    for k in 1..=cfg.budget {
        let beta = k as f64 * cfg.beta_step;
        if count_a(&Params24 { beta, ..base }, &cfg.scan)? == c0 {
            prev = beta;
            continue;
        }
        let Some(transition) = localize(RotationParamId::Beta, &base, (prev, beta), -gamma - lambda, cfg)? else {
            return Ok(None);
        };
        let before = inventory(&Params24 { beta: transition.bracket.0, ..base }, &cfg.scan)?;
        let after = inventory(&Params24 { beta: transition.estimate + cfg.beta_probe, ..base }, &cfg.scan)?;
        let (cb, ca) = (before.cycles_at(FOCUS_A), after.cycles_at(FOCUS_A));
        let born = match (ca.first(), cb.first()) {
            (Some(c), first_before) if ca.len() == cb.len() + 1 && c.stability == Stability::Stable => {
                first_before.map_or(true, |b| c.s_star < b.s_star).then(|| c.clone())
            }
            _ => None,
        };
        return Ok(Some(BetaFlip { transition, before, after, born }));
    }
    Ok(None)
}

fn lambda_candidates(cfg: &Theorem31Config) -> Vec<f64> {
    let (lo, hi) = (cfg.lambda_offset_min, (1.0 - cfg.gamma).max(2.0 * cfg.lambda_offset_min));
    geometric(lo, hi, cfg.budget).into_iter().map(|d| -cfg.gamma - d).collect()
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let q = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|k| lo * q.powi(k as i32)).collect()
}

fn is_two_one(inv: &Inventory) -> bool {
    inv.stabilities_at(FOCUS_A) == [Stability::Unstable, Stability::Stable]
        && inv.stabilities_at(FOCUS_B) == [Stability::Unstable]
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSearch {
    /// First alpha giving inner unstable and outer stable cycles around `(0, 0)` and an unstable one around `(-2, 0)`.
    pub two_one: Option<(f64, Inventory)>,
    /// First alpha with an unstable cycle around `(-2, 0)`.
    pub outer_b: Option<(f64, Inventory)>,
    pub tried: usize,
}

/// Decreases `alpha` from zero over log-spaced magnitudes until the cycles are in the
/// two-to-one arrangement.
pub fn alpha_stage(gamma: f64, lambda: f64, cfg: &Theorem31Config) -> Result<AlphaSearch, CycleError> {
    let mut out = AlphaSearch { two_one: None, outer_b: None, tried: 0 };
    for m in geometric(cfg.alpha_range.0, cfg.alpha_range.1, cfg.budget) {
        let p = Params24::two_focus(lambda, -m, 0.0, gamma);
        out.tried += 1;
        let inv = match inventory(&p, &cfg.scan) {
            Ok(inv) => inv,
            Err(CycleError::Section(_)) => continue,
            Err(e) => return Err(e),
        };
        if out.outer_b.is_none() && inv.stabilities_at(FOCUS_B).contains(&Stability::Unstable) {
            out.outer_b = Some((-m, inv.clone()));
        }
        if is_two_one(&inv) {
            out.two_one = Some((-m, inv));
            break;
        }
    }
    Ok(out)
}

fn focus_checks(st: &mut StageReport, inv: &Inventory, a_sign: f64, b_sign: f64) {
    for (focus, sign, name) in [(FOCUS_A, a_sign, "(0,0)"), (FOCUS_B, b_sign, "(-2,0)")] {
        let want = if sign > 0.0 { "unstable" } else { "stable" };
        let (ok, detail) = match inv.at(focus) {
            Some(f) => (f.kind == EquilibriumKind::Focus && f.trace * sign > 0.0, format!("{:?}, trace {:e}", f.kind, f.trace)),
            None => (false, "not an anti-saddle".into()),
        };
        st.assertions.push(Assertion::hard(&format!("{name} is a {want} focus"), ok, detail));
    }
}

/// The four-stage construction starting from the two-centre system: gamma, then lambda,
/// alpha and beta.
pub fn run_theorem31(cfg: &Theorem31Config) -> Result<ScenarioReport, ScenarioError> {
    let g = cfg.gamma;
    let mut stages = Vec::new();

    // (i) gamma only.
    let mut st = StageReport::new("gamma", "set gamma > 0 small", Some(RotationParamId::Gamma));
    st.value = Some(g);
    let p1 = Params24::two_focus(0.0, 0.0, 0.0, g);
    let inv = inventory(&p1, &cfg.scan)?;
    focus_checks(&mut st, &inv, 1.0, -1.0);
    let traces_ok = inv.at(FOCUS_A).is_some_and(|f| (f.trace - g).abs() <= 1e-12)
        && inv.at(FOCUS_B).is_some_and(|f| (f.trace + g).abs() <= 1e-12);
    st.assertions.push(Assertion::hard("traces equal (gamma, -gamma)", traces_ok, String::new()));
    let n_cycles = inv.cycles_at(FOCUS_A).len() + inv.cycles_at(FOCUS_B).len();
    st.assertions.push(Assertion::hard("no limit cycles", n_cycles == 0, inv.label.clone()));
    st.inventory = Some(inv);
    stages.push(st);

    // (ii) lambda below -gamma.
    let mut st = StageReport::new(
        "lambda",
        "decrease lambda below -gamma until one unstable cycle surrounds (0,0)",
        Some(RotationParamId::Lambda),
    );
    let mut found = None;
    for lambda in lambda_candidates(cfg) {
        let inv = inventory(&Params24::two_focus(lambda, 0.0, 0.0, g), &cfg.scan)?;
        if inv.stabilities_at(FOCUS_A) == [Stability::Unstable] && inv.cycles_at(FOCUS_B).is_empty() {
            found = Some((lambda, inv));
            break;
        }
    }
    let (lambda, inv) = match found {
        Some(x) => x,
        None => {
            let lambda = -g - cfg.lambda_offset_default;
            st.notes.push(format!("search budget exhausted; continuing at lambda = {lambda}"));
            (lambda, inventory(&Params24::two_focus(lambda, 0.0, 0.0, g), &cfg.scan)?)
        }
    };
    st.value = Some(lambda);
    let a = inv.stabilities_at(FOCUS_A);
    st.assertions.push(Assertion::hard(
        "one unstable cycle around (0,0)",
        a == [Stability::Unstable],
        fmt_stabilities(&a),
    ));
    st.assertions.push(Assertion::hard(
        "no cycle around (-2,0)",
        inv.cycles_at(FOCUS_B).is_empty(),
        inv.label.clone(),
    ));
    focus_checks(&mut st, &inv, -1.0, -1.0);
    match lambda_birth(g, cfg)? {
        Some(t) => {
            st.assertions.push(Assertion::hard(
                "cycle count changes at lambda = -gamma",
                t.error() <= 1e-4,
                format!("bracket [{:.10}, {:.10}], counts {:?}", t.bracket.0, t.bracket.1, t.counts),
            ));
        }
        None => st.assertions.push(Assertion::hard(
            "cycle count changes at lambda = -gamma",
            false,
            "no change across the window".to_string(),
        )),
    }
    st.inventory = Some(inv);
    stages.push(st);

    // (iii) alpha below zero.
    let mut st = StageReport::new(
        "alpha",
        "decrease alpha below 0 until two cycles surround (0,0) and one surrounds (-2,0)",
        Some(RotationParamId::Alpha),
    );
    let search = alpha_stage(g, lambda, cfg)?;
    let (alpha, inv) = match (&search.two_one, &search.outer_b) {
        (Some((a, inv)), _) => (*a, Some(inv.clone())),
        (None, Some((a, inv))) => {
            st.notes.push(format!(
                "no two-to-one arrangement in {} tries; continuing at the first alpha with a cycle around (-2,0)",
                search.tried
            ));
            (*a, Some(inv.clone()))
        }
        (None, None) => {
            st.notes.push(format!("no cycle around (-2,0) in {} tries; continuing at alpha = 0", search.tried));
            (0.0, None)
        }
    };
    st.value = Some(alpha);
    let (sa, sb) = inv.as_ref().map_or((vec![], vec![]), |i| (i.stabilities_at(FOCUS_A), i.stabilities_at(FOCUS_B)));
    st.assertions.push(Assertion::hard(
        "inner unstable and outer stable cycle around (0,0)",
        sa == [Stability::Unstable, Stability::Stable],
        fmt_stabilities(&sa),
    ));
    st.assertions.push(Assertion::hard(
        "one unstable cycle around (-2,0)",
        sb == [Stability::Unstable],
        fmt_stabilities(&sb),
    ));
    st.inventory = inv;
    stages.push(st);

    // (iv) beta through -gamma - lambda.
    let mut st = StageReport::new(
        "beta",
        "increase beta from 0 until the cycle count around (0,0) changes",
        Some(RotationParamId::Beta),
    );
    let flip = beta_flip(g, lambda, alpha, cfg)?;
    let mut final_inv = None;
    match flip {
        Some(fl) => {
            let t = &fl.transition;
            st.value = Some(t.estimate);
            st.assertions.push(Assertion::hard(
                "stability flip at beta = -gamma - lambda",
                t.error() <= 1e-4,
                format!("bracket [{:.10}, {:.10}], analytic {:.10}", t.bracket.0, t.bracket.1, t.analytic),
            ));
            st.assertions.push(Assertion::hard(
                "stable cycle born inside the others around (0,0)",
                fl.born.is_some(),
                format!("{} -> {}", fmt_stabilities(&fl.before.stabilities_at(FOCUS_A)), fmt_stabilities(&fl.after.stabilities_at(FOCUS_A))),
            ));
            final_inv = Some(fl.after.clone());
            st.inventory = Some(fl.after);
        }
        None => {
            st.assertions.push(Assertion::hard(
                "stability flip at beta = -gamma - lambda",
                false,
                format!("no change in {} steps of {}", cfg.budget, cfg.beta_step),
            ));
        }
    }
    stages.push(st);

    let three_one = final_inv.as_ref().is_some_and(|i| {
        i.stabilities_at(FOCUS_A) == [Stability::Stable, Stability::Unstable, Stability::Stable]
            && i.stabilities_at(FOCUS_B) == [Stability::Unstable]
    });
    let all = stages.iter().all(|s| s.passed());
    let outcome = if three_one && all {
        "(3:1) resolved"
    } else if all {
        "stage-wise verified"
    } else {
        "failed"
    };
    let distribution = final_inv.map(|i| i.label);
    Ok(ScenarioReport::finish("theorem31", stages, distribution, outcome.into()))
}
