//! Discrete quad-mesh geometry: singularity divisors, period matrices,
//! Abel-Jacobi verification and genus-zero quartic differentials.

pub mod abel_jacobi;
pub mod divisor;
pub mod error;
pub mod generators;
pub mod hodge;
pub mod homology;
pub mod mesh;
pub mod metric;
pub mod obj;
pub mod quartic;
pub mod registry;
pub mod report;
pub mod solver;

pub use divisor::{Divisor, DivisorEntry, Site};
pub use error::{Error, Result};
pub use mesh::Mesh;
