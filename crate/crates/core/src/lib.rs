//! Adapted-chart geometry of almost contact metric manifolds.
//!
//! Structures are given by scalar expressions in an adapted chart
//! `(x^1, .., x^n)` whose last coordinate is the Reeb direction. Every
//! quantity is evaluated pointwise with forward-mode automatic
//! differentiation up to second order.

// index loops mirror the tensor formulas
#![allow(clippy::needless_range_loop)]

mod error;
pub mod expr;
pub mod jet;
mod linalg;
pub mod tensor;

pub mod catalog;
pub mod chart;
pub mod classify;
pub mod connection;
pub mod curvature;
pub mod structure;

pub use chart::{change_chart, pull_back, AdaptedChart, Point, Transition};
pub use error::{EvalError, GeometryError, ParseError};
pub use expr::{parse, ScalarField};
pub use jet::{Dual, Jet};
pub use structure::{AdaptedStructure, AxiomResiduals, DerivedTensors};
pub use tensor::{Slot, TensorGrid};
