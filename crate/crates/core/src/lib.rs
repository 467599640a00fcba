//! Metric isometry games and their quantum strategies, finite-dimensional
//! W*-quantum metrics, and quantum graphs.
//!
//! Structural conditions (subspace inclusions, commutants, algebra
//! relations on exact representations) are decided in exact ℚ(i)
//! arithmetic. Strategies supplied as floating-point matrices are checked
//! against a tolerance and every check reports its residual.

#![allow(clippy::needless_range_loop, clippy::result_large_err)]

pub mod error;
pub mod linalg;
pub mod metric;
pub mod report;
pub mod rng;
pub mod algebra;
pub mod game;
pub mod wstar;
pub mod qgraph;
