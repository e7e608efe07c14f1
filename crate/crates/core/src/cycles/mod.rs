//! Poincaré sections, displacement maps, cycle detection and one-parameter continuation.

mod continuation;
mod roots;
mod scan;
mod section;

pub use continuation::{
    continue_family, ContinuationConfig, ContinuationError, CycleFamily, FamilySample, FoldPoint, ParamFamily,
    Termination,
};
pub use scan::{
    count_distribution, count_distribution_with, default_sections, label, scan_and_refine, scan_with, Distribution,
    FocusCycles, LimitCycle, Sample, ScanConfig, ScanResult, Stability,
};
pub use section::{displacement, return_map, NoReturn, Return, ReturnMap, Section, DEFAULT_S_MAX, DEFAULT_S_MIN};

use thiserror::Error;

use crate::integrate::IntegrateError;
use crate::systems::SystemError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CycleError {
    #[error("no return from s = {s}: {reason:?}")]
    NoReturn { s: f64, reason: NoReturn },
    #[error("section: {0}")]
    Section(String),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    System(#[from] SystemError),
}
