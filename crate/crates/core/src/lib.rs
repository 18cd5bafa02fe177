//! Implicit Euler steps solved as Anderson-accelerated fixed-point
//! iterations of the explicit update.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod anderson;
pub mod error;
pub mod fixedpoint;
pub mod harness;
pub mod linalg;
pub mod problems;
pub mod timestep;

pub use anderson::{AaStep, Anderson, AndersonConfig, AndersonWindow, Mixing};
pub use error::{Error, Result};
pub use fixedpoint::{solve_fixed_point, FixedPointConfig, FixedPointOutcome, FixedPointReport, FixedPointStatus};
pub use linalg::StateVec;
pub use timestep::{
    ground_truth_step, implicitized_step, integrate, quasi_newton_step, step_map, ImplicitStep, MassMatrix,
    OdeSystem, Scheme, TimeGrid, Trajectory,
};
