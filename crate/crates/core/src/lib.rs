//! Guaranteed maximum-norm a posteriori error bounds at final time for time
//! semidiscretisations of 1-D linear parabolic problems
//!
//! ```text
//! ∂ₜu − u_xx + c(x)u = f   in (−1, 1) × (0, T],   u(±1, t) = 0,   u(·, 0) = u⁰.
//! ```
//!
//! Five schemes are provided (backward Euler, Crank–Nicolson, extrapolated
//! Euler, dG(1) and variable-step BDF-2) together with an order-5 Radau IIA
//! reference. Every estimator works from a recorded [`Trajectory`] and the
//! Green's-function constants of the problem; space is discretised by
//! Chebyshev collocation so that the spatial error stays far below the
//! temporal one.

pub mod error;
pub mod estimators;
pub mod greens;
pub mod problems;
pub mod quadrature;
pub mod spatial;
pub mod steppers;
pub mod timemesh;

pub use error::{Error, Result};
pub use estimators::{
    Estimator, OscillationKind, StepEstimate,
    BackwardEulerVariant, CrankNicolsonVariant, EstimatorContext, EstimatorOptions,
    EstimatorReport, FhatVariant, QuadRule,
};
pub use greens::{GreenFunctionBounds, Interval};
pub use problems::ParabolicProblem;
pub use spatial::{EllipticOperator, Field, SpatialGrid};
pub use steppers::{Discretisation, ExtrapolatedRun, Method, StepRecord, Trajectory};
pub use timemesh::TimeMesh;
