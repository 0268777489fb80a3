//! Self-contained dense complex linear algebra: Hermitian and general
//! eigensolvers, polynomial root finding, the matrix exponential, and the
//! eigenvalue multiset pairing used by cross-checks. Everything here is
//! written against plain row-major storage; no external solver crates.

mod expm;
mod general;
mod hermitian;
mod matrix;
mod pairing;
mod poly;

pub use expm::matrix_exp;
pub use general::{general_eig, ComplexEigenSystem};
pub use hermitian::{hermitian_eig, HermitianEigenSystem};
pub use matrix::{
    cdot, operator_norm, vec_axpy, vec_norm, vec_scale, vec_sub, ComplexMatrix, LuFactors,
};
pub use pairing::{pair_multisets, pairing_max_distance, MultisetPairing};
pub use poly::{char_poly_coeffs, poly_from_roots, poly_roots, Poly};

use thiserror::Error;

/// Hard cap on matrix dimension for the dense paths.
pub const DIMENSION_CAP: usize = 512;

/// Cap on Faddeev–LeVerrier characteristic polynomial extraction; the
/// coefficient recurrence loses too many digits past this size.
pub const CHAR_POLY_CAP: usize = 64;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {n} exceeds cap {cap}")]
    DimensionCap { n: usize, cap: usize },
    #[error("matrix is not Hermitian: ‖A − A*‖ = {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("eigenvalue iteration failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("leading polynomial coefficient is exactly zero")]
    DegenerateLeadingCoefficient,
    #[error("intermediate quantity overflowed (‖A‖ = {norm:.3e})")]
    Overflow { norm: f64 },
    #[error("exactly singular matrix in solve")]
    SingularMatrix,
}
