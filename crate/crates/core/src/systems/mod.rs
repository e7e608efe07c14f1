//! Canonical quadratic families, their compilation to a general quadratic field, and
//! finite equilibria.

mod equilibria;
mod field;
mod params;
pub mod poly;

pub use equilibria::{equilibria, Equilibrium, EquilibriumKind, CENTER_TRACE_TOL, RESIDUAL_TOL};
pub use field::{GeneralQuadraticField, Point, Quadratic};
pub use params::{
    compile_21, compile_24, compile_25, compile_26, embed_26_into_canonical, CanonicalParams, Embedding,
    Params21, Params24, Params25, Params26,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate field: {0}")]
    DegenerateField(String),
}
