//! Numerical substrate shared by every other module.

pub mod diff;
pub mod jet;
pub mod ode;
pub mod poly;
pub mod quad;
pub mod signature;
pub mod smooth;

pub use diff::{central_step, derivative5, num_jacobian};
pub use jet::Jet2;
pub use ode::{ode_solve, ode_solve_until, OdeConfig, OdeMethod, Trajectory, TwoSided};
pub use poly::Poly1D;
pub use quad::{integrate, Antiderivative, QuadConfig};
pub use signature::Signature;
pub use smooth::{NamedFn, Smooth1D};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum NumError {
    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, state: Vec<f64>, reason: String },
    #[error("non-finite value at {at}")]
    NonFinite { at: f64 },
    #[error("difference stencil leaves the domain at {at:?}")]
    StencilOutOfDomain { at: Vec<f64> },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{x} lies outside the domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },
}
