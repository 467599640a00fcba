//! Finite-dimensional representations of the game algebra of Isom(X, Y):
//! verification of the defining relations, constructors, a spectral
//! obstruction, and a heuristic witness search.

mod rep;
mod search;
mod verify;

use thiserror::Error;

pub use rep::{GameAlgebraRep, RepBlocks, RepShapeError};
pub use search::{
    random_magic_unitary, search_quantum_rep, search_quantum_rep_with, SearchOutcome, SearchParams,
    SEARCH_ACCEPT_TOL,
};
pub use verify::{
    is_magic_unitary, pauli_block_rep, pauli_block_rep_exact, permutation_of, rep_from_isometry,
    spectral_obstruction, verify_intertwiner, verify_rep_relations, IntertwinerCheck, ObstructionReport,
};

/// Default pass/fail tolerance for floating representations.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("SizeMismatch: representation is {nx}x{ny}, a magic unitary must be square")]
    SizeMismatch { nx: usize, ny: usize },
    #[error("representation is {nx}x{ny} but the spaces have {x} and {y} points")]
    SpaceMismatch { nx: usize, ny: usize, x: usize, y: usize },
    #[error("NotProjection: {which} is not an orthogonal projection")]
    NotProjection { which: String },
    #[error("invalid block shape: {0}")]
    BlockShape(String),
}
