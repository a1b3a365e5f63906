//! Master-function construction of shape-invariant one-dimensional systems,
//! their Riccati deformations, and the two-dimensional superintegrable
//! systems assembled from them.

pub mod deformation;
pub mod error;
pub mod function_algebra;
pub mod interval;
pub mod master_system;
pub mod operator_calculus;
pub mod quadrature;
pub mod superintegrable_assembly;
pub mod verification;

pub use error::{Error, Result};
pub use function_algebra::SmoothFn;
pub use interval::Interval;
