//! One-dimensional compressible Navier–Stokes flow of a viscous, heat-conducting
//! ideal gas in Lagrangian mass coordinates, with temperature-dependent
//! viscosity and heat conductivity.
//!
//! The core is generic over the scalar type (`f32` or `f64`); the `*64`
//! aliases below fix it to `f64`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod gas;
pub mod grid;
pub mod identity;
pub mod io;
pub mod num;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Field, RegimeExit, Result};
pub use gas::{GasParams, TransportKind, TransportLaw};
pub use grid::{Grid, State};
pub use num::Real;
pub use solver::{RunOptions, RunOutcome, Solver, StepControl};

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type State64 = State<f64>;
pub type State32 = State<f32>;
pub type GasParams64 = GasParams<f64>;
pub type TransportLaw64 = TransportLaw<f64>;
pub type Solver64 = Solver<f64>;
pub type Solver32 = Solver<f32>;
pub type DiagnosticsRecord64 = diagnostics::DiagnosticsRecord<f64>;
