//! Numerical laboratory for limit cycles of planar quadratic vector fields.

pub mod cli;
pub mod cycles;
pub mod integrate;
pub mod portrait;
pub mod scenarios;
pub mod rotation;
pub mod systems;
