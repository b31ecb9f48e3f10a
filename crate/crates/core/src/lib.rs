//! Tracking controllers for the fully actuated rigid body and the quadcopter,
//! designed by linearization in the ambient space `R^{3x3} x R^k` after adding
//! a transversally stabilizing term that makes `SO(3)` attractive.
//!
//! Module map:
//!
//! * [`matlib`]: hat/vee, Sym/Skew, Frobenius inner product, rotations.
//! * [`embedding`]: the constraint potential, its gradient, the modified
//!   vector field combinator and exponential-rate fitting.
//! * [`stability`]: Hurwitz tests via block companion matrices.
//! * [`rigid_body`]: rigid-body plant, reference, error coordinates and the
//!   five linear tracking laws plus a geometric comparison law.
//! * [`quadcopter`]: quadcopter with thrust extension, its reference and
//!   the exact reduction of the error dynamics to integrator chains.
//! * [`odesim`]: fixed-step RK4 and closed-loop simulation with metrics.

// `!(x > 0.0)` style checks are there to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod eigen;
pub mod embedding;
pub mod matlib;
pub mod odesim;
pub mod quadcopter;
pub mod rigid_body;
pub mod stability;

pub use embedding::StabilizationParams;
pub use matlib::{Mat3, Vec3};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    /// A gain set fails the stability condition of its control law.
    #[error("invalid gains for {law}: {reason}")]
    InvalidGains { law: &'static str, reason: String },
    /// Preconditions of a gain bound computation are violated.
    #[error("bad gains: {0}")]
    BadGains(String),
    #[error("geometric attitude error is singular: 1 + tr(R0^T R) = {one_plus_trace:e}")]
    NearSingular { one_plus_trace: f64 },
    #[error("reference thrust {f0} is below the invertibility floor {floor:e}")]
    SingularB0 { f0: f64, floor: f64 },
}

impl ControlError {
    pub(crate) fn invalid(law: &'static str, reason: impl Into<String>) -> Self {
        ControlError::InvalidGains {
            law,
            reason: reason.into(),
        }
    }
}
