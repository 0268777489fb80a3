//! Spectral analysis of perturbed operator families A_γ = A + γB, where A is
//! self-adjoint and B is sectorial: eigenvalue curves along rays in the
//! coupling sector, monodromy of their endpoint assignment, Herglotz-function
//! localization of spectra with certified error control, and the large-N
//! limit objects of the associated one-parameter families.
//!
//! The numerical kernel (dense complex eigensolvers, polynomial roots, matrix
//! exponential) is self-contained in [`linalg`]; the remaining modules build
//! the analysis layer on top of it.

pub mod curves;
pub mod cyclicity;
pub mod herglotz;
pub mod limits;
pub mod linalg;
pub mod localize;
pub mod problem;
pub mod sectorial;

pub use linalg::{ComplexEigenSystem, ComplexMatrix, HermitianEigenSystem};
pub use problem::PerturbationProblem;
