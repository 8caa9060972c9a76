//! Open-system engine: truncated Fock spaces, the cascaded master equation as
//! a dense superoperator, time integration, steady states, two-time
//! correlations and blockade observables.
//!
//! Density matrices are vectorized by column stacking, `vec(ρ)[i + d·j] = ρᵢⱼ`,
//! so that `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

mod blockade;
mod correlation;
mod integrate;
mod space;
mod steady;
mod superop;

pub use blockade::{
    blockade_observables, blockade_scan, BlockadeObservables, BlockadeOptions, BlockadePoint, CONVERGENCE_TOL,
};
pub use correlation::{correlation, emission_spectrum, regression_spectrum};
pub use integrate::{integrate, propagate, Tolerances, Trajectory, POSITIVITY_FLOOR};
pub use space::{build_operators, DensityMatrix, HilbertSpace, Operators, MAX_DIM};
pub use steady::{steady_state, steady_state_svd, DEGENERACY_TOL};
pub use superop::{
    build_collective_generator, build_generator, build_generator_with, hamiltonian, CavityModel, Superoperator,
};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LindbladError {
    #[error("Hilbert-space dimension {dim} exceeds the limit of {max}")]
    DimensionGuard { dim: usize, max: usize },
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(&'static str),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("time grid must be finite and non-decreasing")]
    InvalidTimeGrid,
    #[error("state lost positivity at t = {time}: minimum eigenvalue {min_eigenvalue:e}")]
    PositivityViolation { time: f64, min_eigenvalue: f64 },
    #[error("step size underflow at t = {time}")]
    StepFailure { time: f64 },
    #[error("steady state is not unique (smallest singular value {sigma_min:e}); set gamma > 0")]
    DegenerateSteadyState { sigma_min: f64 },
    #[error("steady state residual {residual:e} exceeds tolerance")]
    SteadyStateResidual { residual: f64 },
    #[error("blockade observables need a nonzero drive amplitude")]
    UniqueSteadyStateRequiresDrive,
    #[error("operator dimension {got} does not match the space dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
