//! Littlewood-Paley operators, maximal functions, weak Hardy quasinorms and
//! Calderon-Zygmund decompositions on uniform periodic grids in one and two
//! dimensions.
//!
//! Every numerical routine is generic over the scalar type through
//! [`Real`]; the aliases at the crate root fix it to `f64` or `f32`.

// `!(x > 0)` guards are written that way so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bumps;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod lp_ops;
pub mod maximal;
pub mod quasinorm;
pub mod scalar;
pub mod verify;
pub mod whitney_cz;

pub use error::{Error, Result};
pub use grid::{Domain, FftPlan, Grid, GridFunction, VectorGridFunction};
pub use kernel::{smooth_with, Kernel};
pub use scalar::Real;

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type GridFunction64 = GridFunction<f64>;
pub type GridFunction32 = GridFunction<f32>;
pub type VectorGridFunction64 = VectorGridFunction<f64>;
pub type VectorGridFunction32 = VectorGridFunction<f32>;
pub type BumpSpec64 = bumps::BumpSpec<f64>;
pub type BumpSpec32 = bumps::BumpSpec<f32>;
pub type TestFunction64 = bumps::TestFunction<f64>;
pub type TestFunction32 = bumps::TestFunction<f32>;
