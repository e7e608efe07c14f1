use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roots::bracketed;
use super::section::{NoReturn, Return, ReturnMap, Section, DEFAULT_S_MAX};
use super::CycleError;
use crate::integrate::IntegratorConfig;
use crate::systems::{equilibria, Equilibrium, EquilibriumKind, GeneralQuadraticField, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    SemiStable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle {
    pub s_star: f64,
    pub period: f64,
    pub stability: Stability,
    /// Slope of the displacement map at `s_star`.
    pub d_prime: f64,
    pub focus: Point,
    /// Displacement left at `s_star`.
    pub residual: f64,
    #[serde(skip)]
    pub orbit: Vec<Point>,
}

impl LimitCycle {
    fn from_return(r: &Return, stability: Stability, focus: Point) -> Self {
        Self {
            s_star: r.s,
            period: r.period,
            stability,
            d_prime: r.d_prime(),
            focus,
            residual: r.displacement(),
            orbit: r.orbit(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Grid size on the section.
    pub n: usize,
    /// Required `|d(s_star)|`, scaled by `min(1, s_star)`.
    pub residual_tol: f64,
    /// Relative displacements `|d| / s` at or below this are treated as zero when
    /// reading signs off the grid.
    pub zero_floor: f64,
    /// Bound on `|d|` for a sign-change-free extremum to count as a semi-stable cycle.
    pub semi_stable_tol: f64,
    /// Cap on the section length for the default sections.
    pub s_max: f64,
    pub integrator: IntegratorConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            n: 64,
            residual_tol: 1e-9,
            zero_floor: 1e-10,
            semi_stable_tol: 1e-9,
            s_max: DEFAULT_S_MAX,
            integrator: IntegratorConfig::default(),
        }
    }
}

/// Grid value of the displacement map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub s: f64,
    /// `d(s) / s`, `None` past the first point that fails to return.
    pub r: Option<f64>,
    /// Change in `r` when the integrator is run at a tighter tolerance.
    pub noise: Option<f64>,
    pub d_prime: Option<f64>,
    pub period: Option<f64>,
}

impl Sample {
    const EMPTY: Sample = Sample { s: 0.0, r: None, noise: None, d_prime: None, period: None };
}

/// Tolerance ratio between the working integrator and the reference used to estimate noise.
const NOISE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub section: Section,
    pub cycles: Vec<LimitCycle>,
    pub samples: Vec<Sample>,
    /// First grid offset without a return, and why.
    pub no_return: Option<(f64, NoReturn)>,
    /// No returning grid sample has a definite sign.
    pub center_like: bool,
}

impl ScanResult {
    /// Stability of the innermost orbits as read off the grid.
    pub fn focus_attracting(&self) -> Option<bool> {
        self.samples.iter().find_map(|p| p.r).map(|r| r < 0.0)
    }
}

pub(crate) fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let q = (b / a).ln() / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { b } else { a * (q * k as f64).exp() }).collect()
}

/// Largest relative Newton step `|d / d'| / s` accepted at a refined cycle.
const ROOT_STEP_TOL: f64 = 1e-11;

pub(crate) struct Refiner<'a> {
    pub map: ReturnMap,
    pub cfg: &'a ScanConfig,
}

impl Refiner<'_> {
    pub fn eval(&self, s: f64) -> Result<Return, CycleError> {
        self.map.eval(s)
    }

    /// Root of `d` in `[a, b]` given the relative displacements at both ends.
    pub fn root(&self, (a, ra): (f64, f64), (b, rb): (f64, f64)) -> Result<Return, CycleError> {
        let tol = self.cfg.residual_tol;
        let root = bracketed(
            |s| self.eval(s).map(|r| (r.relative_displacement(), r)),
            (a, ra),
            (b, rb),
            // Also require the Newton step to be negligible: near a weak focus `d'` is tiny and a
            // small residual alone leaves the offset loose.
            |s, q, r| (s * q).abs() <= tol * s.min(1.0) && (s * q / r.d_prime()).abs() <= ROOT_STEP_TOL * s,
            200,
        )?;
        match root.best {
            Some((_, _, r)) => Ok(r),
            None => self.eval(0.5 * (a + b)),
        }
    }

    /// Zero of `d'` in `[a, b]` given `d'` at both ends.
    pub fn extremum(&self, (a, da): (f64, f64), (b, db): (f64, f64)) -> Result<Return, CycleError> {
        let root = bracketed(
            |s| self.eval(s).map(|r| (r.d_prime(), r)),
            (a, da),
            (b, db),
            |_, d, _| d.abs() <= 1e-12,
            200,
        )?;
        match root.best {
            Some((_, _, r)) => Ok(r),
            None => self.eval((a * b).sqrt()),
        }
    }

    fn cycle_at_root(&self, lo: (f64, f64), hi: (f64, f64)) -> Result<LimitCycle, CycleError> {
        let r = self.root(lo, hi)?;
        // Outward drift inside and inward drift outside attract.
        let stab = if lo.1 > 0.0 { Stability::Stable } else { Stability::Unstable };
        Ok(LimitCycle::from_return(&r, stab, self.map.section.focus))
    }
}

/// All limit cycles crossing `sec`, located on an `n`-point grid with default tolerances.
pub fn scan_and_refine(f: &GeneralQuadraticField, sec: &Section, n: usize) -> Result<Vec<LimitCycle>, CycleError> {
    scan_with(f, sec, &ScanConfig { n, ..Default::default() }).map(|s| s.cycles)
}

pub fn scan_with(f: &GeneralQuadraticField, sec: &Section, cfg: &ScanConfig) -> Result<ScanResult, CycleError> {
    let map = ReturnMap::new(f, *sec, cfg.integrator);
    let refiner = Refiner { map, cfg };
    let grid = log_grid(sec.s_min, sec.s_max, cfg.n);
    let tight = map.with_config(cfg.integrator.tightened(NOISE_FACTOR));
    let evals: Vec<Result<(Return, f64), CycleError>> = grid
        .par_iter()
        .map(|&s| {
            let r = map.eval(s)?;
            let noise = match tight.eval(s) {
                Ok(q) => (q.relative_displacement() - r.relative_displacement()).abs(),
                Err(CycleError::NoReturn { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            Ok((r, noise))
        })
        .collect();

    let mut samples = Vec::with_capacity(grid.len());
    let mut returns: Vec<(Return, f64)> = Vec::new();
    let mut no_return = None;
    for (s, e) in grid.iter().zip(evals) {
        match e {
            Ok((r, noise)) if no_return.is_none() => {
                samples.push(Sample {
                    s: *s,
                    r: Some(r.relative_displacement()),
                    noise: Some(noise),
                    d_prime: Some(r.d_prime()),
                    period: Some(r.period),
                });
                returns.push((r, noise));
            }
            Ok(_) => samples.push(Sample { s: *s, ..Sample::EMPTY }),
            Err(CycleError::NoReturn { reason, .. }) => {
                no_return.get_or_insert((*s, reason));
                samples.push(Sample { s: *s, ..Sample::EMPTY });
            }
            Err(e) => return Err(e),
        }
    }

    // A sample has a sign only when it clears both the floor and its own noise estimate.
    let floor = cfg.zero_floor;
    let sign = |(r, noise): &(Return, f64)| {
        let q = r.relative_displacement();
        if q.abs() <= floor.max(4.0 * noise) {
            0
        } else if q > 0.0 {
            1
        } else {
            -1
        }
    };
    let center_like = !returns.is_empty() && returns.iter().all(|r| sign(r) == 0);
    let mut cycles = Vec::new();
    if !center_like {
        // Walk the signed samples, skipping runs inside the zero floor.
        let mut last: Option<(&Return, i32)> = None;
        for rn in &returns {
            let sr = sign(rn);
            if sr == 0 {
                continue;
            }
            let r = &rn.0;
            if let Some((p, sp)) = last {
                let rp = p.relative_displacement();
                let rn = r.relative_displacement();
                let found = if sp != sr {
                    refiner.cycle_at_root((p.s, rp), (r.s, rn)).map(|c| vec![c])
                } else {
                    refiner.hidden_pair(p, r)
                };
                match found {
                    Ok(c) => cycles.extend(c),
                    // Orbits inside the bracket that never come back leave it unresolved.
                    Err(CycleError::NoReturn { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            last = Some((r, sr));
        }
        // A sign change can hide between the last return and the first escape.
        if let (Some((p, _)), Some((s_nr, _))) = (last, no_return) {
            match refiner.before_escape(p, s_nr) {
                Ok(c) => cycles.extend(c),
                Err(CycleError::NoReturn { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    cycles.sort_by(|a, b| a.s_star.total_cmp(&b.s_star));
    Ok(ScanResult { section: *sec, cycles, samples, no_return, center_like })
}

impl Refiner<'_> {
    /// Cycles between two grid points of equal displacement sign: an extremum of `d` that
    /// crosses zero hides a pair, one that touches zero is a semi-stable candidate.
    fn hidden_pair(&self, p: &Return, q: &Return) -> Result<Vec<LimitCycle>, CycleError> {
        let (dp, dq) = (p.d_prime(), q.d_prime());
        let towards_zero = if p.relative_displacement() > 0.0 { dp < 0.0 && dq > 0.0 } else { dp > 0.0 && dq < 0.0 };
        if !towards_zero {
            return Ok(vec![]);
        }
        let e = self.extremum((p.s, dp), (q.s, dq))?;
        let re = e.relative_displacement();
        let rp = p.relative_displacement();
        if re * rp < 0.0 {
            let inner = self.cycle_at_root((p.s, rp), (e.s, re))?;
            let outer = self.cycle_at_root((e.s, re), (q.s, q.relative_displacement()))?;
            return Ok(vec![inner, outer]);
        }
        if e.displacement().abs() < self.cfg.semi_stable_tol {
            // Confirm at a tighter integrator before calling it semi-stable.
            let tight = self.map.with_config(self.map.cfg.tightened(10.0));
            let t = tight.eval(e.s)?;
            if t.displacement().abs() < self.cfg.semi_stable_tol && t.relative_displacement() * rp >= 0.0 {
                return Ok(vec![LimitCycle::from_return(&e, Stability::SemiStable, self.map.section.focus)]);
            }
        }
        Ok(vec![])
    }

    /// Bisects the return/no-return boundary above `p` looking for a sign change that
    /// stands clear of the integration noise.
    fn before_escape(&self, p: &Return, s_nr: f64) -> Result<Option<LimitCycle>, CycleError> {
        let rp = p.relative_displacement();
        let tight = self.map.with_config(self.map.cfg.tightened(NOISE_FACTOR));
        let (mut a, mut ra, mut b) = (p.s, rp, s_nr);
        for _ in 0..40 {
            let m = (a * b).sqrt();
            match self.eval(m) {
                Ok(r) => {
                    let rm = r.relative_displacement();
                    if rm * rp < 0.0 && rm.abs() > self.cfg.zero_floor {
                        let noise = match tight.eval(m) {
                            Ok(q) => (q.relative_displacement() - rm).abs(),
                            Err(CycleError::NoReturn { .. }) => f64::INFINITY,
                            Err(e) => return Err(e),
                        };
                        if rm.abs() <= 4.0 * noise {
                            return Ok(None);
                        }
                        return self.cycle_at_root((a, ra), (m, rm)).map(Some);
                    }
                    a = m;
                    ra = rm;
                }
                Err(CycleError::NoReturn { .. }) => b = m,
                Err(e) => return Err(e),
            }
            if b / a < 1.0 + 1e-9 {
                break;
            }
        }
        Ok(None)
    }
}

/// Cycles found around one anti-saddle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusCycles {
    pub focus: Point,
    pub kind: EquilibriumKind,
    pub trace: f64,
    pub scan: ScanResult,
}

impl FocusCycles {
    pub fn count(&self) -> usize {
        self.scan.cycles.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub foci: Vec<FocusCycles>,
    /// `"(n:m)"` with counts in the order of `foci`.
    pub label: String,
}

impl Distribution {
    pub fn counts(&self) -> Vec<usize> {
        self.foci.iter().map(|f| f.count()).collect()
    }

    pub fn at(&self, focus: Point) -> Option<&FocusCycles> {
        self.foci.iter().find(|f| f.focus.dist(focus) < 1e-8)
    }
}

pub fn label(counts: &[usize]) -> String {
    let parts: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(":"))
}

/// Sections along the x-direction through every anti-saddle, ordered by decreasing `x`.
pub fn default_sections(f: &GeneralQuadraticField, s_max: f64) -> Result<Vec<(Equilibrium, Section)>, CycleError> {
    let eq = equilibria(f)?;
    eq.iter()
        .filter(|e| e.is_anti_saddle())
        .map(|e| Section::along_x(f, e, &eq, s_max).map(|s| (*e, s)))
        .collect()
}

/// Cycle counts around each anti-saddle of `f`.
pub fn count_distribution(f: &GeneralQuadraticField) -> Result<Distribution, CycleError> {
    count_distribution_with(f, &ScanConfig::default())
}

pub fn count_distribution_with(f: &GeneralQuadraticField, cfg: &ScanConfig) -> Result<Distribution, CycleError> {
    let mut foci = Vec::new();
    for (e, sec) in default_sections(f, cfg.s_max)? {
        let scan = scan_with(f, &sec, cfg)?;
        foci.push(FocusCycles { focus: e.location, kind: e.kind, trace: e.trace, scan });
    }
    let label = label(&foci.iter().map(|f| f.count()).collect::<Vec<_>>());
    Ok(Distribution { foci, label })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_focus_has_no_cycles() {
        let f = GeneralQuadraticField { p10: 0.02, p01: -1.0, q10: 1.0, q01: 0.02, ..Default::default() };
        let sec = Section::new(&f, Point::ORIGIN, (1.0, 0.0), 1e-3, 10.0).unwrap();
        let res = scan_with(&f, &sec, &ScanConfig { n: 16, ..Default::default() }).unwrap();
        assert!(res.cycles.is_empty());
        assert!(!res.center_like);
        assert_eq!(res.focus_attracting(), Some(false));
    }

    #[test]
    fn linear_centre_is_center_like() {
        let f = GeneralQuadraticField { p01: -1.0, q10: 1.0, ..Default::default() };
        let sec = Section::new(&f, Point::ORIGIN, (1.0, 0.0), 1e-3, 10.0).unwrap();
        let res = scan_with(&f, &sec, &ScanConfig { n: 16, ..Default::default() }).unwrap();
        assert!(res.center_like && res.cycles.is_empty());
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-3, 10.0, 5);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[4], 10.0);
        assert!((g[2] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn labels() {
        assert_eq!(label(&[2, 1]), "(2:1)");
        assert_eq!(label(&[0, 0]), "(0:0)");
    }
}
