//! Numerical verification library for the homogeneous nearly Kähler
//! structure on S³×S³ and the CR geometry of its 3-dimensional
//! submanifolds.
//!
//! The crate is organized bottom-up:
//!
//! * [`quat`] — quaternion and imaginary-quaternion algebra,
//! * [`nkcore`] — points, tangent vectors, the structures J, P, Q, the
//!   nearly Kähler metric, the G tensor, curvature, and the ambient
//!   isometries,
//! * [`frame`] — the adapted moving frame E₁…E₆ along an immersed
//!   3-manifold, angle functions, connection coefficients, and the
//!   CR classification,
//! * [`catalog`] — the explicit immersions that realize each class,
//! * [`report`] / [`suites`] — machine-readable check reports and the
//!   batch verification suites behind the `nkcheck` CLI.

pub mod catalog;
pub mod frame;
pub mod nkcore;
pub mod quat;
pub mod report;
pub mod sampling;
pub mod suites;

use thiserror::Error;

/// Errors surfaced by the geometric layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("quaternion norm {0} is below the degeneracy threshold")]
    DegenerateQuaternion(f64),
    #[error("tangent vectors live at different base points (distance {0})")]
    BasePointMismatch(f64),
    #[error("isometry parameter is not a unit quaternion (norm {0})")]
    NonUnitParameter(f64),
    #[error("point ({0}, {1}, {2}) too close to the chart boundary for the stencil")]
    DomainBoundary(f64, f64, f64),
    #[error("differentiation direction is numerically zero")]
    DegenerateDirection,
    #[error("tangent space is not a proper CR plane: {0}")]
    NotProperCR(String),
    #[error("frame fails the orthonormality check (residual {0})")]
    FrameNotOrthonormal(f64),
    #[error("frame gauge could not be aligned across the stencil (dot {0})")]
    GaugeDiscontinuity(f64),
    #[error("initial condition norm {0} is not 1")]
    InvalidInitialNorm(f64),
    #[error("profile not defined over the requested t-domain")]
    ProfileDomainMismatch,
    #[error("coefficient must have norm 1/2, got {0}")]
    WrongCoefficientNorm(f64),
    #[error("unknown chart id: {0}")]
    UnknownChart(String),
    #[error("point not on S³×S³ (unit-norm residual {0})")]
    NotOnSurface(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
