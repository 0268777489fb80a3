//! Krylov cyclicity of a perturbation range under a self-adjoint A:
//! the orthogonal ladder R₀ ⊥ R₁ ⊥ … built by repeatedly applying A to
//! Ran(B), the block-tridiagonal compression of A in that ladder, and the
//! upper-half-plane check Spec(A + γB) ⊂ ℂ₊ with geometric multiplicity
//! bounded by rank(B).

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    cdot, general_eig, hermitian_eig, vec_norm, ComplexMatrix, LinalgError,
};
use crate::sectorial::{analyze_sectorial, coupling_sector, SectorialError};

#[derive(Debug, Error)]
pub enum CyclicityError {
    #[error("operand is {rows}×{cols}, expected {expected}×{expected}")]
    DimensionMismatch { rows: usize, cols: usize, expected: usize },
    #[error("hypothesis violated: {detail}")]
    HypothesisViolated { detail: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl From<SectorialError> for CyclicityError {
    fn from(err: SectorialError) -> Self {
        CyclicityError::HypothesisViolated { detail: err.to_string() }
    }
}

/// Orthogonal ladder R₀, R₁, …, R_K with R₀ spanning Ran(B) and
/// R_m the fresh directions in A·R_{m−1}. The concatenated basis block-
/// tridiagonalizes A; `cyclic` says the ladder exhausts the whole space.
#[derive(Debug, Clone)]
pub struct KrylovDecomposition {
    /// Orthonormal basis of each rung, in ladder order.
    pub subspaces: Vec<ComplexMatrix>,
    pub cyclic: bool,
    /// A compressed to the concatenated ladder basis.
    pub tridiagonal_blocks: ComplexMatrix,
    pub block_dims: Vec<usize>,
}

impl KrylovDecomposition {
    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    /// All rung bases side by side as one N×(Σ dims) matrix.
    pub fn concatenated_basis(&self) -> ComplexMatrix {
        let mut cols = Vec::new();
        for sub in &self.subspaces {
            for j in 0..sub.cols() {
                cols.push(sub.column(j));
            }
        }
        if cols.is_empty() {
            let n = self.subspaces.first().map_or(0, ComplexMatrix::rows);
            ComplexMatrix::zeros(n, 0)
        } else {
            ComplexMatrix::from_columns(&cols)
        }
    }

    /// The (i, j) block of the compressed A.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let offset = |k: usize| self.block_dims[..k].iter().sum::<usize>();
        let (ri, rj) = (offset(i), offset(j));
        ComplexMatrix::from_fn(self.block_dims[i], self.block_dims[j], |p, q| {
            self.tridiagonal_blocks[(ri + p, rj + q)]
        })
    }

    /// Largest ‖block(i,j)‖_F over |i−j| ≥ 2; zero for a true
    /// block-tridiagonal compression.
    pub fn far_block_leak(&self) -> f64 {
        let k = self.block_dims.len();
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                if i.abs_diff(j) >= 2 {
                    worst = worst.max(self.block(i, j).frobenius_norm());
                }
            }
        }
        worst
    }
}

/// Acceptance threshold for a new Krylov direction, relative to the
/// candidate's norm before orthogonalization.
const NEW_DIRECTION_TOL: f64 = 1e-10;

fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    // Modified Gram-Schmidt, one pass.
    for q in basis {
        let overlap = cdot(q, v);
        for (vi, qi) in v.iter_mut().zip(q) {
            *vi -= overlap * qi;
        }
    }
}

/// Build the ladder decomposition of the pair (A, B).
pub fn krylov_decompose(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<KrylovDecomposition, CyclicityError> {
    let n = a.rows();
    if !a.is_square() {
        return Err(CyclicityError::DimensionMismatch { rows: a.rows(), cols: a.cols(), expected: n });
    }
    if b.rows() != n || b.cols() != n {
        return Err(CyclicityError::DimensionMismatch { rows: b.rows(), cols: b.cols(), expected: n });
    }

    // R₀: orthonormalize the columns of B directly. Eigenvectors of BB*
    // would inject √eps-sized noise directions whenever B is rank deficient.
    let col_tol = 1e-12 * b.frobenius_norm();
    let mut accepted: Vec<Vec<Complex64>> = Vec::new();
    let mut block_dims = Vec::new();
    let mut subspaces = Vec::new();

    let mut rung: Vec<Vec<Complex64>> = Vec::new();
    for j in 0..n {
        let mut v: Vec<Complex64> = (0..n).map(|i| b[(i, j)]).collect();
        let incoming = vec_norm(&v);
        if incoming <= col_tol {
            continue;
        }
        orthogonalize(&mut v, &rung);
        orthogonalize(&mut v, &rung);
        let remaining = vec_norm(&v);
        if remaining > NEW_DIRECTION_TOL * incoming {
            let inv = 1.0 / remaining;
            for vi in &mut v {
                *vi *= inv;
            }
            rung.push(v);
        }
    }

    while !rung.is_empty() {
        let mut fresh = Vec::new();
        for mut v in rung {
            let incoming = vec_norm(&v);
            if incoming == 0.0 {
                continue;
            }
            orthogonalize(&mut v, &accepted);
            orthogonalize(&mut v, &fresh);
            // One reorthogonalization pass to clean up cancellation.
            orthogonalize(&mut v, &accepted);
            orthogonalize(&mut v, &fresh);
            let remaining = vec_norm(&v);
            if remaining > NEW_DIRECTION_TOL * incoming {
                let inv = 1.0 / remaining;
                for vi in &mut v {
                    *vi *= inv;
                }
                fresh.push(v);
            }
        }
        if fresh.is_empty() {
            break;
        }
        block_dims.push(fresh.len());
        subspaces.push(ComplexMatrix::from_columns(&fresh));
        rung = fresh.iter().map(|q| a.matvec(q)).collect();
        accepted.extend(fresh);
    }

    let total: usize = block_dims.iter().sum();
    let basis = if accepted.is_empty() {
        ComplexMatrix::zeros(n, 0)
    } else {
        ComplexMatrix::from_columns(&accepted)
    };
    let tridiagonal_blocks = a.compress_to_basis(&basis);

    Ok(KrylovDecomposition {
        subspaces,
        cyclic: total == n,
        tridiagonal_blocks,
        block_dims,
    })
}

/// Rank of the stacked controllability matrix [B, AB, …, A^{N−1}B],
/// an independent route to the same cyclicity answer.
pub fn controllability_rank(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize, CyclicityError> {
    let n = a.rows();
    if b.rows() != n || b.cols() != n {
        return Err(CyclicityError::DimensionMismatch { rows: b.rows(), cols: b.cols(), expected: n });
    }
    // Staircase count: grow an orthonormal basis one power at a time,
    // seeded from the raw columns of B. Forming the stack's Gram matrix
    // instead would square the conditioning and undercount for N ≳ 8.
    let col_tol = 1e-12 * b.frobenius_norm();
    let mut accepted: Vec<Vec<Complex64>> = Vec::new();
    let mut rung: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| b[(i, j)]).collect::<Vec<_>>())
        .filter(|col| vec_norm(col) > col_tol)
        .collect();
    while !rung.is_empty() && accepted.len() < n {
        let mut fresh = Vec::new();
        for mut v in rung {
            let incoming = vec_norm(&v);
            if incoming == 0.0 {
                continue;
            }
            orthogonalize(&mut v, &accepted);
            orthogonalize(&mut v, &fresh);
            orthogonalize(&mut v, &accepted);
            orthogonalize(&mut v, &fresh);
            let remaining = vec_norm(&v);
            if remaining > NEW_DIRECTION_TOL * incoming {
                let inv = 1.0 / remaining;
                for vi in &mut v {
                    *vi *= inv;
                }
                fresh.push(v);
            }
        }
        if fresh.is_empty() {
            break;
        }
        rung = fresh.iter().map(|q| a.matvec(q)).collect();
        accepted.extend(fresh);
    }
    Ok(accepted.len().min(n))
}

/// Outcome of the upper-half-plane verification for one coupling γ.
#[derive(Debug, Clone)]
pub struct UpperHalfPlaneReport {
    pub eigenvalues: Vec<Complex64>,
    pub min_imag: f64,
    pub geometric_multiplicities: Vec<usize>,
    pub rank_bound: usize,
    pub all_in_upper_halfplane: bool,
    pub multiplicities_within_rank: bool,
}

/// Check Spec(A + γB) ⊂ ℂ₊ and bound each geometric multiplicity by
/// rank(B). Requires sectorial B, γ ≠ 0 inside the coupling sector, and a
/// cyclic pair.
pub fn verify_upper_halfplane(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    gamma: Complex64,
) -> Result<UpperHalfPlaneReport, CyclicityError> {
    let dec = analyze_sectorial(b)?;
    if gamma == Complex64::new(0.0, 0.0) {
        return Err(CyclicityError::HypothesisViolated {
            detail: "γ = 0 leaves the spectrum real; the check needs a nonzero coupling".into(),
        });
    }
    let sector = coupling_sector(&dec);
    if !sector.contains(gamma) {
        return Err(CyclicityError::HypothesisViolated {
            detail: format!(
                "γ = {gamma} has arg {:.6} outside the open sector ({:.6}, {:.6})",
                gamma.arg(),
                sector.sigma1,
                std::f64::consts::PI - sector.sigma2
            ),
        });
    }
    let kry = krylov_decompose(a, b)?;
    if !kry.cyclic {
        return Err(CyclicityError::HypothesisViolated {
            detail: format!(
                "Krylov ladder spans only {} of {} dimensions",
                kry.total_dim(),
                a.rows()
            ),
        });
    }

    let n = a.rows();
    let a_gamma = a.add(&b.scale(gamma));
    let scale = a_gamma.frobenius_norm();
    let sys = general_eig(&a_gamma, false)?;
    let rank_bound = dec.rank;

    let mut mults = Vec::with_capacity(n);
    for &lambda in &sys.eigenvalues {
        let shifted = a_gamma.add_scalar_diag(-lambda);
        // Numerical null-space dimension via singular values of A_γ − λI.
        let gram = shifted.adjoint().matmul(&shifted);
        let svs = hermitian_eig(&gram)?;
        let tol = 1e-8 * scale;
        let dim = svs.eigenvalues.iter().filter(|&&ev| ev.max(0.0).sqrt() <= tol).count();
        mults.push(dim.max(1));
    }

    let min_imag = sys.eigenvalues.iter().map(|l| l.im).fold(f64::INFINITY, f64::min);
    let all_up = min_imag > 0.0;
    let mult_ok = mults.iter().all(|&m| m <= rank_bound);
    Ok(UpperHalfPlaneReport {
        eigenvalues: sys.eigenvalues,
        min_imag,
        geometric_multiplicities: mults,
        rank_bound,
        all_in_upper_halfplane: all_up,
        multiplicities_within_rank: mult_ok,
    })
}
