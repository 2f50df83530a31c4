//! Representations of contractions: dense matrices, weighted orbit shifts
//! on countable index sets, and block-diagonal sums of either.

mod io;
mod orbit;

pub use io::{parse_matrix_json, read_matrix_file, write_matrix_json, MatrixFileError};
pub use orbit::{
    orbit_apply, orbit_compose, truncate, truncate_sparse, Block, BlockDiagonalOperator, Index, IndexUniverse,
    OrbitShift, SparseVector, Truncatable, Window, WindowedShift, DEFAULT_DENSE_CAP,
};

use thiserror::Error;

use crate::linalg::{operator_norm, ComplexMatrix, LinalgError};
use crate::scalar::Real;

pub const DEFAULT_NORM_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("not a contraction: operator norm {norm} exceeds 1 + {slack:e}")]
    NotContraction { norm: f64, slack: f64 },
    #[error("index {0} is not in the operator's domain")]
    InvalidIndex(Index),
    #[error("weight {weight} at index {index} lies outside [0, 1]")]
    InvalidWeight { index: Index, weight: f64 },
    #[error("successor map is not injective: {first} and {second} both map to {target}")]
    InjectivityViolation { first: Index, second: Index, target: Index },
    #[error("window of {size} indices exceeds the dense cap {cap}")]
    WindowTooLarge { size: usize, cap: usize },
    #[error("window is empty")]
    EmptyWindow,
    #[error("window shape does not match universe {0:?}")]
    WindowShape(IndexUniverse),
    #[error("operators live on different index universes")]
    UniverseMismatch,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Square matrix with operator norm at most `1 + norm_slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseContraction<S: Real> {
    matrix: ComplexMatrix<S>,
    norm_slack: S,
}

impl<S: Real> DenseContraction<S> {
    pub fn new(matrix: ComplexMatrix<S>) -> Result<Self, OperatorError> {
        Self::with_slack(matrix, S::lit(DEFAULT_NORM_SLACK))
    }

    pub fn with_slack(matrix: ComplexMatrix<S>, norm_slack: S) -> Result<Self, OperatorError> {
        matrix.require_square()?;
        let norm = operator_norm(&matrix);
        if norm > S::one() + norm_slack {
            return Err(OperatorError::NotContraction { norm: norm.as_f64(), slack: norm_slack.as_f64() });
        }
        Ok(Self { matrix, norm_slack })
    }

    /// Skips the norm computation. Callers must hold a structural proof of
    /// contractivity (e.g. orthogonal columns of norm at most one).
    pub(crate) fn from_certified(matrix: ComplexMatrix<S>) -> Self {
        Self { matrix, norm_slack: S::lit(DEFAULT_NORM_SLACK) }
    }

    pub fn matrix(&self) -> &ComplexMatrix<S> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<S> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn norm_slack(&self) -> S {
        self.norm_slack
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: crate::linalg::adjoint(&self.matrix), norm_slack: self.norm_slack }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.direct_sum(&other.matrix), norm_slack: self.norm_slack.max(other.norm_slack) }
    }
}
