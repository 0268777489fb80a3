//! The perturbed family A_γ = A + γB as a validated object: spectral data
//! of A, sectorial decomposition of B, Krylov ladder, the endpoint data
//! β_r (nonzero eigenvalues of B) and δ_r (eigenvalues of A on Ker B), and
//! the genericity hypotheses
//!   H1  finite dimension, A = A*, B sectorial
//!   H2  B cyclic for A
//!   H3  eigenvalues of A simple
//!   H4  nonzero eigenvalues of B simple
//!   H5  eigenvalues of A truncated to Ker(B) simple.

use num_complex::Complex64;
use thiserror::Error;

use crate::cyclicity::{krylov_decompose, CyclicityError, KrylovDecomposition};
use crate::linalg::{general_eig, hermitian_eig, ComplexMatrix, HermitianEigenSystem, LinalgError};
use crate::sectorial::{analyze_sectorial, coupling_sector, CouplingSector, SectorialDecomposition, SectorialError};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("A is {a_rows}×{a_cols}, B is {b_rows}×{b_cols}; both must be square of equal size")]
    DimensionMismatch { a_rows: usize, a_cols: usize, b_rows: usize, b_cols: usize },
    #[error("A is not self-adjoint: ‖A−A*‖ = {residual:.3e}")]
    NotSelfAdjoint { residual: f64 },
    #[error(transparent)]
    Sectorial(#[from] SectorialError),
    #[error(transparent)]
    Cyclicity(#[from] CyclicityError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Relative gap below which two eigenvalues count as a multiplicity.
pub const MULTIPLICITY_REL_GAP: f64 = 1e-10;

/// Pass/fail record for H1 through H5 with the gap witnesses that
/// justified each verdict.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub h1_selfadjoint_sectorial: bool,
    pub h2_cyclic: bool,
    pub h3_a_simple: bool,
    pub h4_b_nonzero_simple: bool,
    pub h5_kernel_truncation_simple: bool,
    /// Smallest relative gap among the eigenvalues of A.
    pub min_gap_a: Option<f64>,
    /// Smallest relative pairwise distance among nonzero eigenvalues of B.
    pub min_gap_b: Option<f64>,
    /// Smallest relative gap among the δ_r.
    pub min_gap_kernel: Option<f64>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.h1_selfadjoint_sectorial
            && self.h2_cyclic
            && self.h3_a_simple
            && self.h4_b_nonzero_simple
            && self.h5_kernel_truncation_simple
    }
}

fn min_consecutive_relative_gap(sorted: &[f64]) -> Option<f64> {
    if sorted.len() < 2 {
        return None;
    }
    let spread = sorted[sorted.len() - 1] - sorted[0];
    if spread <= 0.0 {
        return Some(0.0);
    }
    let mut min = f64::INFINITY;
    for w in sorted.windows(2) {
        min = min.min((w[1] - w[0]) / spread);
    }
    Some(min)
}

/// Validated problem instance; every field is derived from (A, B) once at
/// construction and stays immutable.
#[derive(Debug, Clone)]
pub struct PerturbationProblem {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    /// Eigensystem of A; eigenvalues α_r ascending.
    pub a_eig: HermitianEigenSystem,
    pub sectorial: SectorialDecomposition,
    pub sector: CouplingSector,
    pub krylov: KrylovDecomposition,
    /// Nonzero eigenvalues of B, ascending |β| then ascending arg.
    pub beta: Vec<Complex64>,
    /// Eigenvalues of A truncated to Ker(B), ascending.
    pub delta: Vec<f64>,
    pub hypotheses: HypothesisReport,
}

impl PerturbationProblem {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix) -> Result<Self, ProblemError> {
        if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
            return Err(ProblemError::DimensionMismatch {
                a_rows: a.rows(),
                a_cols: a.cols(),
                b_rows: b.rows(),
                b_cols: b.cols(),
            });
        }
        let scale_a = a.frobenius_norm();
        let residual = a.hermitian_residual();
        if residual > 1e-12 * scale_a.max(1.0) {
            return Err(ProblemError::NotSelfAdjoint { residual });
        }

        let a_eig = hermitian_eig(&a)?;
        let sectorial = analyze_sectorial(&b)?;
        let sector = coupling_sector(&sectorial);
        let krylov = krylov_decompose(&a, &b)?;

        // Nonzero spectrum of B; sectoriality makes B block diagonal over
        // Ker(B) ⊕ Ker(B)^⊥, so exactly rank(B) eigenvalues are nonzero.
        let b_eig = general_eig(&b, false)?;
        let b_scale = b.frobenius_norm();
        let mut beta: Vec<Complex64> =
            b_eig.eigenvalues.into_iter().filter(|z| z.norm() > 1e-12 * b_scale).collect();
        beta.sort_by(|x, y| {
            x.norm().total_cmp(&y.norm()).then_with(|| x.arg().total_cmp(&y.arg()))
        });

        let delta = if sectorial.kernel_basis.cols() == 0 {
            Vec::new()
        } else {
            let a_kernel = a.compress_to_basis(&sectorial.kernel_basis).hermitian_part();
            hermitian_eig(&a_kernel)?.eigenvalues
        };

        let min_gap_a = min_consecutive_relative_gap(&a_eig.eigenvalues);
        let min_gap_kernel = min_consecutive_relative_gap(&delta);
        let min_gap_b = if beta.len() < 2 {
            None
        } else {
            let scale = beta.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let mut min = f64::INFINITY;
            for i in 0..beta.len() {
                for j in i + 1..beta.len() {
                    min = min.min((beta[i] - beta[j]).norm() / scale);
                }
            }
            Some(min)
        };

        let hypotheses = HypothesisReport {
            h1_selfadjoint_sectorial: true,
            h2_cyclic: krylov.cyclic,
            h3_a_simple: min_gap_a.is_none_or(|g| g > MULTIPLICITY_REL_GAP),
            h4_b_nonzero_simple: min_gap_b.is_none_or(|g| g > MULTIPLICITY_REL_GAP),
            h5_kernel_truncation_simple: min_gap_kernel.is_none_or(|g| g > MULTIPLICITY_REL_GAP),
            min_gap_a,
            min_gap_b,
            min_gap_kernel,
        };

        Ok(Self { a, b, a_eig, sectorial, sector, krylov, beta, delta, hypotheses })
    }

    pub fn dimension(&self) -> usize {
        self.a.rows()
    }

    /// rank(B) = number of divergent spectral curves.
    pub fn rank(&self) -> usize {
        self.sectorial.rank
    }

    pub fn a_gamma(&self, gamma: Complex64) -> ComplexMatrix {
        self.a.add(&self.b.scale(gamma))
    }

    /// Eigenvalues of A, ascending.
    pub fn alphas(&self) -> &[f64] {
        &self.a_eig.eigenvalues
    }
}
