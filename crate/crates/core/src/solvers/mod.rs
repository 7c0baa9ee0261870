//! Combinatorial kernels behind the schedulers, plus exhaustive oracles.

pub mod brute;
mod hungarian;
mod knapsack;
mod matrix;

use thiserror::Error;

pub use brute::{brute_force_gap, brute_force_mcap, GapSolution};
pub use hungarian::{hungarian_max, hungarian_max_rect};
pub use knapsack::{knapsack_max, ExactDp, KnapsackSolution, KnapsackSolver};
pub use matrix::{canonical_sum, Matching, WeightMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("assignment matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("row {row} has {got} cells, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("cell ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("{values} values but {weights} weights")]
    LengthMismatch { values: usize, weights: usize },
    #[error("item {item} has zero weight")]
    ZeroWeight { item: usize },
    #[error("item {item} has a negative or non-finite value")]
    BadValue { item: usize },
    #[error("{what} enumeration too large (size {size})")]
    EnumerationBudget { what: &'static str, size: usize },
}
