//! Surfaces with flat normal bundle built from solutions of a linear
//! hyperbolic system, with their congruences, flows and Gauss-Codazzi checks.

// stencils index several arrays at once; `!(x > 0.0)` is used to reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod linsys;
pub mod construction;
pub mod euclid3;
pub mod ribaucour;
pub mod projective;
pub mod highdim;
pub mod mvn;
pub mod catalog;
pub mod verify;
pub mod io;
pub mod cli;

pub use error::{Error, Result};
pub use grid::{Axis, Grid2D, ScalarField2D};
pub use linsys::{PhiField, SolutionPair};
