use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{inventory, wide_scan, Inventory, ScenarioError, FOCUS_A, FOCUS_B};
use crate::cycles::{scan_with, CycleError, LimitCycle, ScanConfig, Section, Stability};
use crate::integrate::{integrate, Terminal};
use crate::systems::{compile_24, GeneralQuadraticField, Params24, Point};

/// Grid of `(gamma, lambda, alpha)` searched for the two-to-one arrangement:
/// `lambda = -gamma - offset`, `alpha = -magnitude`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub gammas: Vec<f64>,
    pub lambda_offsets: Vec<f64>,
    pub alpha_magnitudes: Vec<f64>,
    pub scan: ScanConfig,
    /// Largest allowed `|d(s_star)|` on the verification sections.
    pub residual_tol: f64,
    /// Largest allowed distance between the start and the end of one period.
    pub closure_tol: f64,
    /// Stop at the first verified hit in grid order.
    pub first_only: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let mags = (0..12).map(|k| 1e-3 * 1.25f64.powi(k)).collect();
        Self {
            gammas: vec![0.52, 0.55, 0.6],
            lambda_offsets: vec![0.0005, 0.002, 0.005],
            alpha_magnitudes: mags,
            scan: wide_scan(),
            residual_tol: 1e-9,
            closure_tol: 1e-7,
            first_only: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifiedCycle {
    /// Anti-saddle the cycle winds around.
    pub encircles: Point,
    pub section: Section,
    pub s_star: f64,
    pub stability: Stability,
    pub d_prime: f64,
    pub period: f64,
    pub residual: f64,
    pub closure: f64,
    pub max_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepHit {
    pub params: Params24,
    /// Cycles on the default sections.
    pub inventory: Inventory,
    /// The same cycles on the axis segment between the two foci, innermost first per focus.
    pub verified: Vec<VerifiedCycle>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub evaluated: usize,
    pub candidates: usize,
    pub hits: Vec<SweepHit>,
}

/// Rays along the x-axis from each focus towards the other one.
pub fn inner_sections(f: &GeneralQuadraticField) -> Result<[Section; 2], CycleError> {
    let gap = FOCUS_A.dist(FOCUS_B);
    Ok([
        Section::new(f, FOCUS_A, (-1.0, 0.0), 1e-3, gap * 0.9995)?,
        Section::new(f, FOCUS_B, (1.0, 0.0), 1e-3, gap * 0.9995)?,
    ])
}

fn winding(orbit: &[Point], p: Point) -> i32 {
    if orbit.len() < 3 {
        return 0;
    }
    let mut total = 0.0;
    for k in 0..orbit.len() {
        let (a, b) = (orbit[k], orbit[(k + 1) % orbit.len()]);
        let (ax, ay, bx, by) = (a.x - p.x, a.y - p.y, b.x - p.x, b.y - p.y);
        total += (ax * by - ay * bx).atan2(ax * bx + ay * by);
    }
    (total / std::f64::consts::TAU).round() as i32
}

/// Residual, one-period closure and winding of a cycle found on `sec`.
pub fn verify_cycle(f: &GeneralQuadraticField, sec: &Section, c: &LimitCycle, scan: &ScanConfig) -> Result<VerifiedCycle, CycleError> {
    let start = sec.point(c.s_star);
    let cfg = crate::integrate::IntegratorConfig { t_max: c.period, ..scan.integrator };
    let seg = integrate(f, start, &cfg, None)?;
    let closure = if seg.terminal == Terminal::TimeLimit { seg.last().dist(start) } else { f64::INFINITY };
    let encircles = [FOCUS_A, FOCUS_B]
        .into_iter()
        .find(|p| winding(&c.orbit, *p) != 0 && [FOCUS_A, FOCUS_B].iter().all(|q| q == p || winding(&c.orbit, *q) == 0))
        .unwrap_or(Point::new(f64::NAN, f64::NAN));
    Ok(VerifiedCycle {
        encircles,
        section: *sec,
        s_star: c.s_star,
        stability: c.stability,
        d_prime: c.d_prime,
        period: c.period,
        residual: c.residual,
        closure,
        max_norm: seg.max_norm(),
    })
}

/// Rescans a candidate on the inner segment and checks the two-to-one arrangement there.
fn verify(p: &Params24, inv: Inventory, cfg: &SweepConfig) -> Result<SweepHit, CycleError> {
    let f = compile_24(p);
    let [sec, _] = inner_sections(&f)?;
    let scan = ScanConfig { residual_tol: cfg.residual_tol, ..cfg.scan };
    let res = scan_with(&f, &sec, &scan)?;
    let all = res.cycles.iter().map(|c| verify_cycle(&f, &sec, c, &scan)).collect::<Result<Vec<_>, _>>()?;
    // Innermost first around each focus; on this ray larger offsets sit closer to (-2, 0).
    let mut around_a: Vec<VerifiedCycle> = all.iter().filter(|v| v.encircles == FOCUS_A).cloned().collect();
    let mut around_b: Vec<VerifiedCycle> = all.iter().filter(|v| v.encircles == FOCUS_B).cloned().collect();
    around_a.sort_by(|x, y| x.s_star.total_cmp(&y.s_star));
    around_b.sort_by(|x, y| y.s_star.total_cmp(&x.s_star));
    let stab = |v: &[VerifiedCycle]| v.iter().map(|c| c.stability).collect::<Vec<_>>();
    let pattern = stab(&around_a) == [Stability::Unstable, Stability::Stable] && stab(&around_b) == [Stability::Unstable];
    let mut verified = around_a;
    verified.extend(around_b);
    verified.extend(all.into_iter().filter(|v| v.encircles != FOCUS_A && v.encircles != FOCUS_B));
    let pass = pattern
        && verified.len() == 3
        && verified.iter().all(|v| v.residual.abs() <= cfg.residual_tol && v.closure <= cfg.closure_tol);
    Ok(SweepHit { params: *p, inventory: inv, verified, pass })
}

fn is_candidate(inv: &Inventory) -> bool {
    inv.stabilities_at(FOCUS_A) == [Stability::Unstable, Stability::Stable]
        && inv.stabilities_at(FOCUS_B) == [Stability::Unstable]
}

/// Searches the grid in parallel and verifies every two-to-one candidate.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport, ScenarioError> {
    let grid: Vec<Params24> = cfg
        .gammas
        .iter()
        .flat_map(|&g| {
            cfg.lambda_offsets.iter().flat_map(move |&dl| {
                cfg.alpha_magnitudes.iter().map(move |&m| Params24::two_focus(-g - dl, -m, 0.0, g))
            })
        })
        .collect();
    let invs: Vec<Option<Inventory>> = grid
        .par_iter()
        .map(|p| match inventory(p, &cfg.scan) {
            Ok(inv) => Ok(is_candidate(&inv).then_some(inv)),
            Err(CycleError::Section(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;
    let candidates: Vec<(Params24, Inventory)> =
        grid.iter().zip(invs).filter_map(|(p, i)| i.map(|i| (*p, i))).collect();
    let n_candidates = candidates.len();
    let mut hits = Vec::new();
    if cfg.first_only {
        for (p, inv) in candidates {
            let hit = verify(&p, inv, cfg)?;
            let pass = hit.pass;
            hits.push(hit);
            if pass {
                break;
            }
        }
    } else {
        hits = candidates.into_par_iter().map(|(p, inv)| verify(&p, inv, cfg)).collect::<Result<_, _>>()?;
    }
    Ok(SweepReport { evaluated: grid.len(), candidates: n_candidates, hits })
}
