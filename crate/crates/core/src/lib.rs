//! Face-centred finite volume solver for linear elasticity.
//!
//! Displacements are constant per face, stresses and displacements are
//! constant per element and recovered in closed form, and the only global
//! unknowns are the face displacements of a symmetric positive definite
//! system.

pub mod assembly;
pub mod benchmarks;
pub mod mesh;
pub mod pipeline;
pub mod postproc;
pub mod solver;
pub mod sparse;
pub mod voigt;

mod error;

pub use error::Error;
