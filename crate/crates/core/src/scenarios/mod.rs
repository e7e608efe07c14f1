//! Staged parameter constructions run as experiments with per-stage assertions.

mod monotone;
mod sweep;
mod theorem31;
mod uniqueness;

pub use monotone::{check_stretch, run_monotone_family_check, stretches, MonotoneConfig, Stretch};
pub use sweep::{inner_sections, run_sweep, verify_cycle, SweepConfig, SweepHit, SweepReport, VerifiedCycle};
pub use theorem31::{alpha_stage, AlphaSearch, beta_flip, lambda_birth, run_theorem31, BetaFlip, Theorem31Config, Transition};
pub use uniqueness::{run_uniqueness_experiment, UniquenessConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::{
    count_distribution_with, ContinuationError, CycleError, Distribution, LimitCycle, ScanConfig, Stability,
};
use crate::integrate::IntegratorConfig;
use crate::rotation::RotationParamId;
use crate::systems::{compile_24, EquilibriumKind, Params24, Point};

/// Upper bound on the cycles around one quadratic focus; reported, never computed.
pub const CYCLICITY_BOUND: usize = 3;

pub const FOCUS_A: Point = Point { x: 0.0, y: 0.0 };
pub const FOCUS_B: Point = Point { x: -2.0, y: 0.0 };

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
}

/// Scan settings that reach the large outer cycles of the two-focus systems.
pub fn wide_scan() -> ScanConfig {
    ScanConfig {
        n: 96,
        s_max: 1e4,
        integrator: IntegratorConfig { r_escape: 1e6, t_max: 1e4, ..Default::default() },
        ..Default::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    /// Soft assertions are reported but do not decide the exit status.
    pub hard: bool,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    pub fn hard(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), hard: true, pass, detail: detail.into() }
    }

    pub fn soft(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), hard: false, pass, detail: detail.into() }
    }
}

/// Cycles found around one anti-saddle, without the raw scan samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusInventory {
    pub focus: Point,
    pub kind: EquilibriumKind,
    pub trace: f64,
    pub cycles: Vec<LimitCycle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inventory {
    pub params: Params24,
    pub label: String,
    pub foci: Vec<FocusInventory>,
}

impl Inventory {
    pub fn from_distribution(params: Params24, d: &Distribution) -> Self {
        Self {
            params,
            label: d.label.clone(),
            foci: d
                .foci
                .iter()
                .map(|f| FocusInventory { focus: f.focus, kind: f.kind, trace: f.trace, cycles: f.scan.cycles.clone() })
                .collect(),
        }
    }

    pub fn at(&self, focus: Point) -> Option<&FocusInventory> {
        self.foci.iter().find(|f| f.focus.dist(focus) < 1e-8)
    }

    pub fn cycles_at(&self, focus: Point) -> &[LimitCycle] {
        self.at(focus).map_or(&[], |f| &f.cycles)
    }

    pub fn stabilities_at(&self, focus: Point) -> Vec<Stability> {
        self.cycles_at(focus).iter().map(|c| c.stability).collect()
    }
}

/// Cycle inventory of the canonical system with parameters `p`.
pub fn inventory(p: &Params24, scan: &ScanConfig) -> Result<Inventory, CycleError> {
    let d = count_distribution_with(&compile_24(p), scan)?;
    Ok(Inventory::from_distribution(*p, &d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub name: String,
    pub directive: String,
    pub param: Option<RotationParamId>,
    /// Value of `param` the stage settled on.
    pub value: Option<f64>,
    pub inventory: Option<Inventory>,
    pub assertions: Vec<Assertion>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl StageReport {
    fn new(name: &str, directive: &str, param: Option<RotationParamId>) -> Self {
        Self {
            name: name.into(),
            directive: directive.into(),
            param,
            value: None,
            inventory: None,
            assertions: vec![],
            notes: vec![],
        }
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass || !a.hard)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub stages: Vec<StageReport>,
    /// Distribution label of the final state.
    pub distribution: Option<String>,
    pub outcome: String,
    pub passed: bool,
    pub cyclicity_bound: usize,
}

impl ScenarioReport {
    fn finish(scenario: &str, stages: Vec<StageReport>, distribution: Option<String>, outcome: String) -> Self {
        let passed = stages.iter().all(|s| s.passed());
        Self { scenario: scenario.into(), stages, distribution, outcome, passed, cyclicity_bound: CYCLICITY_BOUND }
    }

    fn with_outcome(mut self) -> Self {
        self.outcome = if self.passed { "verified".into() } else { "failed".into() };
        self
    }

    pub fn failed_assertions(&self) -> Vec<(&str, &Assertion)> {
        self.stages
            .iter()
            .flat_map(|s| s.assertions.iter().filter(|a| a.hard && !a.pass).map(move |a| (s.name.as_str(), a)))
            .collect()
    }
}

/// Bisects `[lo, hi]`, whose ends disagree under `pred`, down to `width` or `budget` steps.
pub(crate) fn bisect_flag<E>(
    mut pred: impl FnMut(f64) -> Result<bool, E>,
    (mut lo, flo): (f64, bool),
    (mut hi, fhi): (f64, bool),
    width: f64,
    budget: usize,
) -> Result<(f64, f64), E> {
    debug_assert!(flo != fhi);
    for _ in 0..budget {
        if (hi - lo).abs() <= width {
            break;
        }
        let m = 0.5 * (lo + hi);
        if pred(m)? == flo {
            lo = m;
        } else {
            hi = m;
        }
    }
    let _ = fhi;
    Ok((lo, hi))
}

fn fmt_stabilities(v: &[Stability]) -> String {
    format!("{v:?}")
}
