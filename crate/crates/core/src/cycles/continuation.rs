use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::scan::{LimitCycle, ScanConfig, Stability};
use super::section::{Return, ReturnMap, Section};
use super::CycleError;
use crate::integrate::IntegratorConfig;
use crate::rotation::{RotationError, RotationParamId};
use crate::systems::{equilibria, CanonicalParams, EquilibriumKind, GeneralQuadraticField, Point};

/// A canonical system with one rotation parameter left free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamFamily {
    pub base: CanonicalParams,
    pub param: RotationParamId,
}

impl ParamFamily {
    pub fn new(base: CanonicalParams, param: RotationParamId) -> Result<Self, RotationError> {
        param.value(&base)?;
        Ok(Self { base, param })
    }

    pub fn params(&self, mu: f64) -> CanonicalParams {
        self.param.set(&self.base, mu).expect("checked in ParamFamily::new")
    }

    pub fn field(&self, mu: f64) -> Result<GeneralQuadraticField, CycleError> {
        Ok(self.params(mu).compile()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ShrinksToFocus,
    SeparatrixLike,
    Unbounded,
    RangeEnd,
    FoldEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySample {
    pub mu: f64,
    pub s_star: f64,
    pub period: f64,
    pub d_prime: f64,
}

/// A double cycle where two branches meet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldPoint {
    pub mu_fold: f64,
    pub s_fold: f64,
    /// Last parameter with the pair present and first without it.
    pub mu_bracket: (f64, f64),
    pub d_prime: f64,
    pub displacement: f64,
    /// `d'` on the two merging cycles at the inner end of the bracket, inner cycle first.
    pub branch_d_prime: (f64, f64),
    /// Offsets of the two merging cycles at the inner end of the bracket.
    pub branch_s: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleFamily {
    pub param: RotationParamId,
    pub focus: Point,
    /// Ordered by increasing `mu`.
    pub samples: Vec<FamilySample>,
    pub folds: Vec<FoldPoint>,
    pub termination: Termination,
    /// Small-amplitude period `2 pi / sqrt(det)` at the focus.
    pub linear_period: f64,
}

impl CycleFamily {
    /// The sample where continuation stopped.
    pub fn last(&self, increasing: bool) -> Option<&FamilySample> {
        if increasing {
            self.samples.last()
        } else {
            self.samples.first()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationConfig {
    pub dmu_init: f64,
    pub dmu_max: f64,
    pub dmu_min: f64,
    pub max_steps: usize,
    pub scan: ScanConfig,
    /// Terminate as `shrinks_to_focus` once `s_star` drops below this.
    pub shrink_s: f64,
    /// Terminate as `separatrix_like` once the period exceeds this multiple of the
    /// small-amplitude period.
    pub period_blowup: f64,
    /// Distance to a saddle or an invariant line that counts as passing through it.
    pub saddle_eps: f64,
    /// `|d'|` below which a failed step triggers a fold search.
    pub fold_trigger: f64,
    pub fold_mu_width: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            dmu_init: 1e-3,
            dmu_max: 2e-2,
            dmu_min: 1e-13,
            max_steps: 20_000,
            // Families run up to separatrix cycles, where the return map loses digits.
            scan: ScanConfig { integrator: IntegratorConfig::default().tightened(10.0), ..Default::default() },
            shrink_s: 1e-4,
            period_blowup: 50.0,
            saddle_eps: 1e-3,
            fold_trigger: 5e-2,
            fold_mu_width: 1e-10,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("seed cycle invalid: {0}")]
    InvalidSeed(String),
    #[error("continuation stalled at mu = {mu} (step {dmu})")]
    Stall { mu: f64, dmu: f64, partial: Box<CycleFamily> },
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
}

/// The section, saddles and invariant lines of the field at one parameter value.
struct Slice {
    map: ReturnMap,
    saddles: Vec<Point>,
    lines: Vec<(f64, f64, f64)>,
    linear_period: f64,
}

fn slice(fam: &ParamFamily, mu: f64, focus: Point, cfg: &ContinuationConfig) -> Result<Slice, CycleError> {
    let f = fam.field(mu)?;
    let eq = equilibria(&f)?;
    let e = eq
        .iter()
        .filter(|e| e.is_anti_saddle())
        .min_by(|a, b| a.location.dist(focus).total_cmp(&b.location.dist(focus)))
        .ok_or_else(|| CycleError::Section("no anti-saddle left".into()))?;
    let mut sec = Section::along_x(&f, e, &eq, cfg.scan.s_max)?;
    sec.s_min = sec.s_min.min(cfg.shrink_s * 1e-3);
    let saddles = eq.iter().filter(|e| e.kind == EquilibriumKind::Saddle).map(|e| e.location).collect();
    Ok(Slice {
        map: ReturnMap::new(&f, sec, cfg.scan.integrator),
        saddles,
        lines: f.invariant_lines(),
        linear_period: e.linear_period(),
    })
}

impl Slice {
    fn refine(&self, cfg: &ScanConfig, lo: (f64, f64), hi: (f64, f64)) -> Result<Return, CycleError> {
        super::scan::Refiner { map: self.map, cfg }.root(lo, hi)
    }

    fn extremum(&self, cfg: &ScanConfig, lo: (f64, f64), hi: (f64, f64)) -> Result<Return, CycleError> {
        super::scan::Refiner { map: self.map, cfg }.extremum(lo, hi)
    }

    /// The orbit passes within `eps` of a saddle or of an invariant line, the pieces a
    /// separatrix cycle is built from.
    fn near_separatrix(&self, r: &Return, eps: f64) -> bool {
        if self.saddles.is_empty() && self.lines.is_empty() {
            return false;
        }
        r.orbit().iter().any(|p| {
            self.saddles.iter().any(|q| p.dist(*q) < eps)
                || self.lines.iter().any(|&(c, a, b)| (c + a * p.x + b * p.y).abs() < eps * a.hypot(b))
        })
    }

    /// Cycle near `s_pred` whose displacement slope has sign `branch`.
    fn correct(&self, cfg: &ScanConfig, s_pred: f64, branch: f64) -> Result<Option<Return>, CycleError> {
        let r0 = self.map.eval(s_pred)?;
        let q0 = r0.relative_displacement();
        // With d' < 0 the cycle lies above points that drift outward.
        let up = (q0 > 0.0) == (branch < 0.0);
        let mut prev = (s_pred, q0);
        let mut w: f64 = 1e-4;
        while w < 0.7 {
            let s1 = if up { s_pred * w.exp() } else { s_pred * (-w).exp() };
            let q1 = self.map.eval(s1)?.relative_displacement();
            if q1 * q0 <= 0.0 {
                let (lo, hi) = if up { (prev, (s1, q1)) } else { ((s1, q1), prev) };
                let r = self.refine(cfg, lo, hi)?;
                return Ok((r.d_prime() * branch > 0.0).then_some(r));
            }
            prev = (s1, q1);
            w *= 2.0;
        }
        Ok(None)
    }

    /// First zero of `d'` moving away from `s` by growing log steps, in either direction.
    fn find_extremum(&self, cfg: &ScanConfig, s: f64, w0: f64) -> Result<Option<Return>, CycleError> {
        let d0 = self.map.eval(s)?.d_prime();
        let (mut lo, mut hi) = ((s, d0), (s, d0));
        let mut w = w0;
        while w < 1.0 {
            for dir in [-1.0, 1.0] {
                let s1 = s * (dir * w).exp();
                let d1 = match self.map.eval(s1) {
                    Ok(r) => r.d_prime(),
                    Err(CycleError::NoReturn { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let prev = if dir < 0.0 { lo } else { hi };
                if d1 * prev.1 <= 0.0 {
                    let (a, b) = if dir < 0.0 { ((s1, d1), prev) } else { (prev, (s1, d1)) };
                    return self.extremum(cfg, a, b).map(Some);
                }
                if dir < 0.0 {
                    lo = (s1, d1);
                } else {
                    hi = (s1, d1);
                }
            }
            w *= 2.0;
        }
        Ok(None)
    }

    /// Nearest zero of `d` moving from `s` in direction `dir`.
    fn root_from(&self, cfg: &ScanConfig, s: f64, dir: f64) -> Result<Option<Return>, CycleError> {
        let q0 = self.map.eval(s)?.relative_displacement();
        let mut prev = (s, q0);
        let mut w = 1e-5;
        while w < 1.0 {
            let s1 = s * (dir * w).exp();
            let q1 = self.map.eval(s1)?.relative_displacement();
            if q1 * q0 <= 0.0 {
                let (a, b) = if dir < 0.0 { ((s1, q1), prev) } else { (prev, (s1, q1)) };
                return self.refine(cfg, a, b).map(Some);
            }
            prev = (s1, q1);
            w *= 2.0;
        }
        Ok(None)
    }
}

/// Follows the cycle `seed` of `fam(mu_range.0)` towards `mu_range.1`.
pub fn continue_family(
    fam: &ParamFamily,
    mu_range: (f64, f64),
    seed: &LimitCycle,
    cfg: &ContinuationConfig,
) -> Result<CycleFamily, ContinuationError> {
    let (mu0, mu_end) = mu_range;
    let dir = if mu_end >= mu0 { 1.0 } else { -1.0 };
    let sl = slice(fam, mu0, seed.focus, cfg)?;
    let r = sl.map.eval(seed.s_star).map_err(|e| ContinuationError::InvalidSeed(e.to_string()))?;
    if r.displacement().abs() > 1e3 * cfg.scan.residual_tol * seed.s_star.min(1.0) {
        return Err(ContinuationError::InvalidSeed(format!(
            "displacement {:e} at s = {} for mu = {mu0}",
            r.displacement(),
            seed.s_star
        )));
    }
    if seed.stability == Stability::SemiStable || r.d_prime() == 0.0 {
        return Err(ContinuationError::InvalidSeed("seed cycle is not hyperbolic".into()));
    }
    let focus = sl.map.section.focus;
    let mut fam_out = CycleFamily {
        param: fam.param,
        focus,
        samples: vec![FamilySample { mu: mu0, s_star: r.s, period: r.period, d_prime: r.d_prime() }],
        folds: vec![],
        termination: Termination::RangeEnd,
        linear_period: sl.linear_period,
    };
    let finish = |mut out: CycleFamily, t: Termination| {
        out.termination = t;
        out.samples.sort_by(|a, b| a.mu.total_cmp(&b.mu));
        out
    };

    let mut h = cfg.dmu_init;
    let mut steps = 0;
    let mut path: Vec<FamilySample> = fam_out.samples.clone();
    while steps < cfg.max_steps {
        steps += 1;
        let cur = *path.last().unwrap();
        let remaining = (mu_end - cur.mu) * dir;
        if remaining <= 0.0 {
            fam_out.samples = path;
            return Ok(finish(fam_out, Termination::RangeEnd));
        }
        let h_try = h.min(remaining);
        let mu = if h_try == remaining { mu_end } else { cur.mu + dir * h_try };
        let s_pred = match path.len() {
            1 => cur.s_star,
            n => {
                let p = path[n - 2];
                let slope = (cur.s_star / p.s_star).ln() / (cur.mu - p.mu);
                // Do not let the predictor run off by more than a factor of two.
                cur.s_star * (slope * (mu - cur.mu)).clamp(-0.7, 0.7).exp()
            }
        };
        let outcome = slice(fam, mu, focus, cfg).and_then(|sl| {
            let r = sl.correct(&cfg.scan, s_pred, cur.d_prime)?;
            Ok((sl, r))
        });
        match outcome {
            Ok((sl, Some(r))) => {
                path.push(FamilySample { mu, s_star: r.s, period: r.period, d_prime: r.d_prime() });
                let t = if r.s < cfg.shrink_s {
                    Some(Termination::ShrinksToFocus)
                } else if r.period > cfg.period_blowup * sl.linear_period || sl.near_separatrix(&r, cfg.saddle_eps) {
                    Some(Termination::SeparatrixLike)
                } else if r.radius > 0.5 * cfg.scan.integrator.r_escape {
                    Some(Termination::Unbounded)
                } else {
                    None
                };
                if let Some(t) = t {
                    fam_out.samples = path;
                    return Ok(finish(fam_out, t));
                }
                h = (h_try * 1.5).min(cfg.dmu_max);
                continue;
            }
            Ok((_, None)) | Err(CycleError::NoReturn { .. }) => {}
            Err(e) => return Err(e.into()),
        }
        if cur.d_prime.abs() < cfg.fold_trigger {
            match locate_fold(fam, &cur, mu, focus, cfg) {
                Ok(Some(fold)) => {
                    fam_out.folds.push(fold);
                    fam_out.samples = path;
                    return Ok(finish(fam_out, Termination::FoldEnd));
                }
                Ok(None) | Err(CycleError::NoReturn { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        h = h_try * 0.5;
        if h < cfg.dmu_min * (1.0 + cur.mu.abs()) {
            fam_out.samples = path;
            return Err(ContinuationError::Stall { mu: cur.mu, dmu: h, partial: Box::new(finish(fam_out, Termination::RangeEnd)) });
        }
    }
    let mu = path.last().unwrap().mu;
    fam_out.samples = path;
    Err(ContinuationError::Stall { mu, dmu: h, partial: Box::new(finish(fam_out, Termination::RangeEnd)) })
}

/// Brackets the parameter where the cycle at `cur` merges with its neighbour, if the
/// pair has disappeared by `mu_far`.
fn locate_fold(
    fam: &ParamFamily,
    cur: &FamilySample,
    mu_far: f64,
    focus: Point,
    cfg: &ContinuationConfig,
) -> Result<Option<FoldPoint>, CycleError> {
    let sc = &cfg.scan;
    let sl = slice(fam, cur.mu, focus, cfg)?;
    let Some(e) = sl.find_extremum(sc, cur.s_star, 1e-4)? else { return Ok(None) };
    // Sign of d between the two cycles of the pair.
    let side = if e.s > cur.s_star { 1.0 } else { -1.0 };
    let between = cur.d_prime.signum() * side;
    let state = |mu: f64, s_guess: f64| -> Result<Option<Return>, CycleError> {
        let sl = slice(fam, mu, focus, cfg)?;
        sl.find_extremum(sc, s_guess, 1e-4)
    };
    let present = |r: &Return| r.displacement() * between > 0.0;
    if !present(&e) {
        return Ok(None);
    }
    let far = match state(mu_far, e.s)? {
        Some(r) => r,
        None => return Ok(None),
    };
    if present(&far) {
        return Ok(None);
    }
    let (mut a, mut b) = (cur.mu, mu_far);
    let mut ea = e;
    let mut eb = far;
    while (b - a).abs() > cfg.fold_mu_width {
        let m = 0.5 * (a + b);
        let Some(em) = state(m, ea.s)? else { break };
        if present(&em) {
            a = m;
            ea = em;
        } else {
            b = m;
            eb = em;
        }
    }
    // The merging pair just before the fold.
    let sl = slice(fam, a, focus, cfg)?;
    let lo = sl.root_from(sc, ea.s, -1.0)?;
    let hi = sl.root_from(sc, ea.s, 1.0)?;
    let (branch_d_prime, branch_s) = match (lo, hi) {
        (Some(l), Some(h)) => ((l.d_prime(), h.d_prime()), (l.s, h.s)),
        _ => ((f64::NAN, f64::NAN), (f64::NAN, f64::NAN)),
    };
    // Report the side whose displacement is closer to zero.
    let at = if ea.displacement().abs() <= eb.displacement().abs() { (a, &ea) } else { (b, &eb) };
    Ok(Some(FoldPoint {
        mu_fold: at.0,
        s_fold: at.1.s,
        mu_bracket: (a, b),
        d_prime: at.1.d_prime(),
        displacement: at.1.displacement(),
        branch_d_prime,
        branch_s,
    }))
}
