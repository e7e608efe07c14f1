use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{inventory, Assertion, Inventory, ScenarioError, ScenarioReport, StageReport, FOCUS_A, FOCUS_B};
use crate::cycles::{CycleError, ScanConfig, Stability};
use crate::rotation::RotationParamId;
use crate::systems::Params24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniquenessConfig {
    pub gamma_range: (f64, f64),
    pub n_gamma: usize,
    pub n_lambda: usize,
    /// Lower end of the lambda interval; the upper end is `-gamma - lambda_gap`.
    pub lambda_min: f64,
    pub lambda_gap: f64,
    /// Intermediate values of the second parameter on each input-order path.
    pub path_steps: usize,
    pub scan: ScanConfig,
}

impl Default for UniquenessConfig {
    fn default() -> Self {
        Self {
            gamma_range: (0.02, 0.3),
            n_gamma: 10,
            n_lambda: 10,
            lambda_min: -0.4,
            lambda_gap: 0.01,
            path_steps: 4,
            scan: ScanConfig::default(),
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
struct Point2 {
    gamma: f64,
    lambda: f64,
    inv: Inventory,
}

impl Point2 {
    fn counts(&self) -> (usize, usize) {
        (self.inv.cycles_at(FOCUS_A).len(), self.inv.cycles_at(FOCUS_B).len())
    }

    fn ambiguous(&self) -> bool {
        self.inv.foci.iter().flat_map(|f| &f.cycles).any(|c| c.stability == Stability::SemiStable)
    }

    fn describe(&self) -> String {
        format!("(gamma {:.4}, lambda {:.4}) -> {}", self.gamma, self.lambda, self.inv.label)
    }
}

fn grid_eval(pairs: &[(f64, f64)], scan: &ScanConfig) -> Result<Vec<Point2>, CycleError> {
    pairs
        .par_iter()
        .map(|&(gamma, lambda)| {
            let p = Params24::two_focus(lambda, 0.0, 0.0, gamma);
            Ok(Point2 { gamma, lambda, inv: inventory(&p, scan)? })
        })
        .collect()
}

fn summarize(st: &mut StageReport, name: &str, pts: &[Point2], ok: impl Fn(&Point2) -> bool) {
    let ambiguous: Vec<&Point2> = pts.iter().filter(|p| p.ambiguous()).collect();
    let failed: Vec<&Point2> = pts.iter().filter(|p| !p.ambiguous() && !ok(p)).collect();
    let mut detail = format!("{} of {} points fail", failed.len(), pts.len());
    if let Some(first) = failed.first() {
        detail += &format!("; first: {}", first.describe());
    }
    st.assertions.push(Assertion::hard(name, failed.is_empty(), detail));
    if !ambiguous.is_empty() {
        st.assertions.push(Assertion::soft(
            "no near-tangent displacement",
            false,
            format!("{} flagged; first: {}", ambiguous.len(), ambiguous[0].describe()),
        ));
    }
}

/// Cycle counts after reaching `(gamma, lambda)` by inputting `first` and then stepping
/// the other parameter from zero, scanning at every step.
fn path_counts(
    gamma: f64,
    lambda: f64,
    first: RotationParamId,
    cfg: &UniquenessConfig,
) -> Result<Vec<(usize, usize)>, CycleError> {
    let (second, target) = match first {
        RotationParamId::Gamma => (RotationParamId::Lambda, lambda),
        _ => (RotationParamId::Gamma, gamma),
    };
    let start = first.with(&Params24::two_focus(0.0, 0.0, 0.0, 0.0), if first == RotationParamId::Gamma { gamma } else { lambda });
    let n = cfg.path_steps.max(1);
    (1..=n)
        .map(|k| {
            let p = second.with(&start, target * k as f64 / n as f64);
            let inv = inventory(&p, &cfg.scan)?;
            Ok((inv.cycles_at(FOCUS_A).len(), inv.cycles_at(FOCUS_B).len()))
        })
        .collect()
}

/// Counts cycles over a grid of opposite-sign and same-sign `(gamma, lambda)` and compares
/// the two input orders.
pub fn run_uniqueness_experiment(cfg: &UniquenessConfig) -> Result<ScenarioReport, ScenarioError> {
    let gammas = linspace(cfg.gamma_range.0, cfg.gamma_range.1, cfg.n_gamma);
    let opposite: Vec<(f64, f64)> = gammas
        .iter()
        .flat_map(|&g| linspace(cfg.lambda_min, -g - cfg.lambda_gap, cfg.n_lambda).into_iter().map(move |l| (g, l)))
        .collect();
    let same: Vec<(f64, f64)> = gammas
        .iter()
        .flat_map(|&g| {
            linspace(cfg.lambda_gap, -cfg.lambda_min, cfg.n_lambda)
                .into_iter()
                .flat_map(move |l| [(g, l), (-g, -l)])
        })
        .collect();
    let region = format!(
        "gamma in [{}, {}] ({} values), lambda in [{}, -gamma - {}] ({} values)",
        cfg.gamma_range.0, cfg.gamma_range.1, cfg.n_gamma, cfg.lambda_min, cfg.lambda_gap, cfg.n_lambda
    );

    let mut st = StageReport::new("opposite signs", "scan every grid point with gamma > 0 > lambda + gamma", None);
    st.notes.push(format!("scanned region: {region}"));
    let opp = grid_eval(&opposite, &cfg.scan)?;
    summarize(&mut st, "one cycle around (0,0), none around (-2,0)", &opp, |p| {
        p.counts() == (1, 0) && p.inv.stabilities_at(FOCUS_A) == [Stability::Unstable]
    });
    let mut stages = vec![st];

    let mut st = StageReport::new("same signs", "scan grid points with gamma and lambda of one sign", None);
    st.notes.push("both quadrants, |lambda| mirrored from the opposite-sign grid".into());
    let sm = grid_eval(&same, &cfg.scan)?;
    summarize(&mut st, "no cycle around (0,0)", &sm, |p| p.counts().0 == 0);
    stages.push(st);

    let mut st = StageReport::new(
        "input order",
        "reach each opposite-sign point by inputting gamma then lambda and lambda then gamma",
        None,
    );
    let swaps: Vec<(Point2, Vec<(usize, usize)>, Vec<(usize, usize)>)> = opp
        .into_par_iter()
        .map(|p| {
            let a = path_counts(p.gamma, p.lambda, RotationParamId::Gamma, cfg)?;
            let b = path_counts(p.gamma, p.lambda, RotationParamId::Lambda, cfg)?;
            Ok((p, a, b))
        })
        .collect::<Result<_, CycleError>>()?;
    let bad: Vec<String> = swaps
        .iter()
        .filter(|(p, a, b)| a.last() != b.last() || a.last() != Some(&p.counts()))
        .map(|(p, a, b)| format!("{}: gamma first {:?}, lambda first {:?}", p.describe(), a, b))
        .collect();
    let mut detail = format!("{} of {} points disagree", bad.len(), swaps.len());
    if let Some(first) = bad.first() {
        detail += &format!("; first: {first}");
    }
    st.assertions.push(Assertion::hard("final counts agree between input orders", bad.is_empty(), detail));
    stages.push(st);

    Ok(ScenarioReport::finish("uniqueness", stages, None, String::new()).with_outcome())
}
