//! Exact linear algebra over ℚ and ℚ(i), a small complex double-precision
//! matrix type, and canonical subspaces of M_n.

mod echelon;
mod gaussian;
mod matrix;
mod rational;
mod subspace;

pub use echelon::{null_space, rref, EchelonBasis, Rref};
pub use gaussian::GaussianRational;
pub use matrix::{MatrixCF, MatrixGQ};
pub use rational::Rational;
pub use subspace::OperatorSubspace;
