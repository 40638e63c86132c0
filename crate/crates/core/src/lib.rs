//! Spectral theory of submodular transformations.
//!
//! A submodular transformation `F: 2^V -> R^E` is a list of normalized
//! submodular functions `F_e`, each depending on a small support. Its
//! Laplacian, Cheeger-type inequalities relating the second eigenvalue to the
//! conductance, covers of base polytopes, and semidefinite relaxations of the
//! eigenvalue are implemented in the modules below.

pub mod cheeger;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lovasz;
pub mod oracle;
pub mod polytope;
pub mod sdp;
pub mod set;
pub mod spectral;

pub use error::{Error, Result};
