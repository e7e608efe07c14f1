use serde::{Deserialize, Serialize};

use super::{inventory, wide_scan, Assertion, ScenarioError, ScenarioReport, StageReport, FOCUS_A};
use crate::cycles::{
    continue_family, ContinuationConfig, ContinuationError, CycleFamily, FamilySample, LimitCycle, Termination,
};
use crate::rotation::RotationParamId;
use crate::systems::{CanonicalParams, Params24};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonotoneConfig {
    /// Fixed `gamma` of the lambda family.
    pub gamma: f64,
    /// Interval over which the lambda family must be monotone; seeded at the upper end.
    pub lambda_range: (f64, f64),
    /// Seed of the alpha family and the `alpha` it is continued to.
    pub alpha_seed: Params24,
    pub alpha_end: f64,
    pub lambda_continuation: ContinuationConfig,
    pub alpha_continuation: ContinuationConfig,
}

impl Default for MonotoneConfig {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            lambda_range: (-0.3, -0.101),
            alpha_seed: Params24::two_focus(-0.555, -0.006, 0.0, 0.55),
            alpha_end: -0.02,
            lambda_continuation: ContinuationConfig::default(),
            alpha_continuation: ContinuationConfig {
                scan: wide_scan(),
                dmu_init: 1e-4,
                dmu_max: 1e-3,
                ..Default::default()
            },
        }
    }
}

/// Result of checking one fold-free stretch of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stretch {
    pub strictly_monotone: bool,
    pub d_prime_sign_constant: bool,
    pub samples: usize,
}

/// Monotonicity of `s_star` and constancy of the sign of `d'` on `samples`.
pub fn check_stretch(samples: &[FamilySample]) -> Stretch {
    let ds: Vec<f64> = samples.windows(2).map(|w| w[1].s_star - w[0].s_star).collect();
    let strictly_monotone = ds.iter().all(|d| *d > 0.0) || ds.iter().all(|d| *d < 0.0);
    let sign = samples.first().map_or(0.0, |s| s.d_prime.signum());
    let d_prime_sign_constant = samples.iter().all(|s| s.d_prime.signum() == sign && s.d_prime != 0.0);
    Stretch { strictly_monotone, d_prime_sign_constant, samples: samples.len() }
}

/// Samples of `fam` split at its folds.
pub fn stretches(fam: &CycleFamily) -> Vec<Stretch> {
    let mut cuts: Vec<f64> = fam.folds.iter().map(|f| f.mu_fold).collect();
    cuts.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut rest = fam.samples.as_slice();
    for c in cuts {
        let k = rest.iter().position(|s| s.mu > c).unwrap_or(rest.len());
        if k > 0 {
            out.push(check_stretch(&rest[..k]));
        }
        rest = &rest[k..];
    }
    if !rest.is_empty() {
        out.push(check_stretch(rest));
    }
    out
}

fn continue_or_partial(
    p: &Params24,
    param: RotationParamId,
    end: f64,
    seed: &LimitCycle,
    cfg: &ContinuationConfig,
) -> Result<(CycleFamily, Option<String>), ScenarioError> {
    let fam = crate::cycles::ParamFamily::new(CanonicalParams::Canonical24(*p), param)
        .map_err(ContinuationError::from)?;
    match continue_family(&fam, (param.get(p), end), seed, cfg) {
        Ok(f) => Ok((f, None)),
        Err(ContinuationError::Stall { mu, dmu, partial }) => {
            Ok((*partial, Some(format!("stalled at {param} = {mu} with step {dmu:e}"))))
        }
        Err(e) => Err(e.into()),
    }
}

fn describe_end(fam: &CycleFamily, increasing: bool) -> String {
    match fam.last(increasing) {
        Some(s) => format!(
            "{:?} at mu = {:.10}, s* = {:.3e}, period {:.4} (linear {:.4})",
            fam.termination, s.mu, s.s_star, s.period, fam.linear_period
        ),
        None => format!("{:?}", fam.termination),
    }
}

fn family_checks(st: &mut StageReport, fam: &CycleFamily, hard: bool) {
    let mk = if hard { Assertion::hard } else { Assertion::soft };
    for (k, s) in stretches(fam).iter().enumerate() {
        st.assertions.push(mk(
            &format!("stretch {k}: s* strictly monotone, sign of d' constant"),
            s.strictly_monotone && s.d_prime_sign_constant,
            format!("{} samples, monotone {}, sign constant {}", s.samples, s.strictly_monotone, s.d_prime_sign_constant),
        ));
    }
}

fn seed_at(p: &Params24, scan: &crate::cycles::ScanConfig, pick_last: bool) -> Result<Option<LimitCycle>, ScenarioError> {
    let inv = inventory(p, scan)?;
    let c = inv.cycles_at(FOCUS_A);
    Ok(if pick_last { c.last() } else { c.first() }.cloned())
}

/// Continues the lambda family of the gamma/lambda system and the alpha family of the
/// two-to-one configuration, checking monotone stretches, terminations and the fold.
pub fn run_monotone_family_check(cfg: &MonotoneConfig) -> Result<ScenarioReport, ScenarioError> {
    let g = cfg.gamma;
    let (lo, hi) = cfg.lambda_range;
    let lcfg = &cfg.lambda_continuation;
    let mut stages = Vec::new();

    let mut st = StageReport::new(
        "lambda family",
        "seed the cycle around (0,0) at the upper end of the lambda range and continue down; then continue up to -gamma",
        Some(RotationParamId::Lambda),
    );
    let p = Params24::two_focus(hi, 0.0, 0.0, g);
    st.value = Some(hi);
    match seed_at(&p, &lcfg.scan, false)? {
        None => {
            st.assertions.push(Assertion::hard(
                "cycle around (0,0) at the seed",
                false,
                format!("none at gamma = {g}, lambda = {hi}"),
            ));
        }
        Some(seed) => {
            st.assertions.push(Assertion::hard("cycle around (0,0) at the seed", true, format!("s* = {}", seed.s_star)));
            let (down, note) = continue_or_partial(&p, RotationParamId::Lambda, lo, &seed, lcfg)?;
            st.notes.extend(note);
            let covered = down.samples.first().is_some_and(|s| s.mu <= lo + 1e-12);
            st.assertions.push(Assertion::hard("family covers the range", covered, describe_end(&down, false)));
            family_checks(&mut st, &down, true);
            let (up, note) = continue_or_partial(&p, RotationParamId::Lambda, 0.0, &seed, lcfg)?;
            st.notes.extend(note);
            st.assertions.push(Assertion::hard(
                "shrinks to the focus as lambda approaches -gamma",
                up.termination == Termination::ShrinksToFocus
                    && up.last(true).is_some_and(|s| (s.mu + g).abs() <= 1e-3),
                describe_end(&up, true),
            ));
        }
    }
    stages.push(st);

    // Whatever family the system actually has near lambda = -gamma, reported without deciding the outcome.
    let mut st = StageReport::new(
        "observed lambda family",
        "seed the innermost cycle around (0,0) on either side of -gamma and continue both ways",
        Some(RotationParamId::Lambda),
    );
    for lam in [-g + 0.01, -g - 0.01] {
        let p = Params24::two_focus(lam, 0.0, 0.0, g);
        if let Some(seed) = seed_at(&p, &lcfg.scan, false)? {
            st.value = Some(lam);
            for (end, inc) in [(lam - 1.0, false), (lam + 1.0, true)] {
                let (fam, note) = continue_or_partial(&p, RotationParamId::Lambda, end, &seed, lcfg)?;
                st.notes.extend(note);
                st.notes.push(format!("seed lambda {lam}: {} end {}", if inc { "upper" } else { "lower" }, describe_end(&fam, inc)));
                family_checks(&mut st, &fam, false);
            }
            break;
        }
    }
    stages.push(st);

    let mut st = StageReport::new(
        "alpha family",
        "continue the inner cycle around (0,0) of the two-to-one configuration as alpha decreases",
        Some(RotationParamId::Alpha),
    );
    let acfg = &cfg.alpha_continuation;
    let pa = cfg.alpha_seed;
    st.value = Some(pa.alpha);
    match seed_at(&pa, &acfg.scan, false)? {
        None => st.assertions.push(Assertion::hard("cycle around (0,0) at the seed", false, String::new())),
        Some(seed) => {
            let (fam, note) = continue_or_partial(&pa, RotationParamId::Alpha, cfg.alpha_end, &seed, acfg)?;
            st.notes.extend(note);
            st.assertions.push(Assertion::hard("exactly one fold", fam.folds.len() == 1, describe_end(&fam, false)));
            if let Some(f) = fam.folds.first() {
                let (a, b) = f.branch_d_prime;
                st.assertions.push(Assertion::hard(
                    "merging branches have opposite d' signs",
                    a * b < 0.0,
                    format!("d' = ({a:e}, {b:e}) at s = ({:.6}, {:.6})", f.branch_s.0, f.branch_s.1),
                ));
                let width = (f.mu_bracket.1 - f.mu_bracket.0).abs();
                st.assertions.push(Assertion::hard(
                    "fold bracketed within 1e-6 with |d'| <= 1e-4",
                    width <= 1e-6 && f.d_prime.abs() <= 1e-4,
                    format!("alpha = {:.12}, width {width:e}, d' {:e}, d {:e}", f.mu_fold, f.d_prime, f.displacement),
                ));
            }
            family_checks(&mut st, &fam, true);
        }
    }
    stages.push(st);

    Ok(ScenarioReport::finish("monotone", stages, None, String::new()).with_outcome())
}
