//! Numerical toolkit for a smooth, non-analytic planar vector field whose
//! bounded orbits either close at the origin or accumulate on the edge of a
//! rose with countably many petals.
//!
//! The rose is the zero level set of `F(r, theta) = r - rho(theta)` where
//! `rho` is a flat (all derivatives vanishing) profile that has infinitely
//! many zeros accumulating at `theta = pi`. The crate provides:
//!
//! * exact evaluation of the profile, the level function and the petal
//!   combinatorics ([`rose_geometry`]),
//! * the regularized field in polar and Cartesian charts ([`vector_field`]),
//! * the closed-form orbit representation and the trichotomy classification
//!   of initial conditions ([`analytic_orbits`]),
//! * adaptive integration in both parameterizations with origin-event
//!   detection ([`integrator`]),
//! * omega-limit estimation, petal measure bucketing and a numerical
//!   smoothness audit ([`analysis`]),
//! * a command-line front end ([`cli`]).

pub mod analysis;
pub mod analytic_orbits;
pub mod cli;
pub mod integrator;
pub mod rose_geometry;
pub mod vector_field;

pub use analytic_orbits::{InitialCondition, OrbitClass};
pub use integrator::{IntegratorConfig, Orbit, Parameterization, Terminal};
pub use rose_geometry::{Angle, PetalDescriptor, PetalIndex};
pub use vector_field::{CartesianState, Chart, FieldVector, PolarState};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("theta = {0} lies at the accumulation angle; no petal is defined there")]
    AccumulationAngle(f64),
    #[error("theta = {0} outside the principal branch (-pi, pi)")]
    OutOfBranch(f64),
    #[error("adaptive quadrature did not converge on [{lo}, {hi}] within depth {depth}")]
    QuadratureDepth { lo: f64, hi: f64, depth: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid initial condition: {0}")]
    InvalidInitialCondition(String),
    #[error("root bracketing failed in {0}")]
    RootBracketing(&'static str),
    #[error("orbit has the wrong parameterization for this operation")]
    WrongParameterization,
    #[error("omega estimate not converged: sup |F| = {sup_f} after {revolutions} revolutions")]
    OmegaNotConverged { sup_f: f64, revolutions: u32 },
    #[error("non-finite field value at ({x}, {y})")]
    NonFiniteField { x: f64, y: f64 },
    #[error("measure bound violated: {0}")]
    MeasureBound(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
