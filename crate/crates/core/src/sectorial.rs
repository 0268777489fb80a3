//! Sectorial analysis of a perturbation B: kernel splitting, the
//! representation of the nonzero part as X^{1/2}(I + iE)X^{1/2} with
//! −tan(σ₁)·I ≤ E ≤ tan(σ₂)·I, the admissible coupling sector
//! S_B = {0} ∪ {γ : σ₁ < arg γ < π − σ₂}, and the extreme-ray test.
//!
//! Norm thresholds in this module are relative to the Frobenius norm of B.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{hermitian_eig, ComplexMatrix, LinalgError};

#[derive(Debug, Error)]
pub enum SectorialError {
    #[error("matrix is not sectorial: {detail}")]
    NotSectorial { detail: String },
    #[error("matrix is not in the cone C(σ₁={sigma1:.6}, σ₂={sigma2:.6}): {detail}")]
    NotInCone { sigma1: f64, sigma2: f64, detail: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Kernel/range splitting of a sectorial matrix together with its sector
/// representation. `x` and `e` are expressed in the coordinates of
/// `range_basis`, so the reconstruction identity reads
/// V*·B·V = X^{1/2}(I + iE)X^{1/2} with V = `range_basis`.
#[derive(Debug, Clone)]
pub struct SectorialDecomposition {
    /// Lower sector half-angle, in [0, π/2).
    pub sigma1: f64,
    /// Upper sector half-angle, in [0, π/2).
    pub sigma2: f64,
    /// Orthonormal columns spanning Ker(B) (= Ker(B*) for sectorial B).
    pub kernel_basis: ComplexMatrix,
    /// Orthonormal columns spanning Ker(B)^⊥ = closure Ran(B).
    pub range_basis: ComplexMatrix,
    /// PSD truncation of (B + B*)/2 to the range, in `range_basis` coords.
    pub x: ComplexMatrix,
    /// Hermitian E with −tan(σ₁)·I ≤ E ≤ tan(σ₂)·I.
    pub e: ComplexMatrix,
    /// rank(B) = dim Ker(B)^⊥.
    pub rank: usize,
}

impl SectorialDecomposition {
    /// X^{1/2}(I + iE)X^{1/2}, the model form of the truncated B.
    pub fn model_truncation(&self) -> ComplexMatrix {
        let m = self.rank;
        // x is diagonal by construction (eigenbasis of the Hermitian part).
        let sqrt_x: Vec<f64> = (0..m).map(|i| self.x[(i, i)].re.max(0.0).sqrt()).collect();
        ComplexMatrix::from_fn(m, m, |i, j| {
            let one_plus_ie = if i == j {
                Complex64::new(1.0, 0.0) + Complex64::new(0.0, 1.0) * self.e[(i, j)]
            } else {
                Complex64::new(0.0, 1.0) * self.e[(i, j)]
            };
            one_plus_ie * sqrt_x[i] * sqrt_x[j]
        })
    }

    /// ‖V*·B·V − X^{1/2}(I+iE)X^{1/2}‖_F for the B this was built from.
    pub fn reconstruction_residual(&self, b: &ComplexMatrix) -> f64 {
        let truncated = b.compress_to_basis(&self.range_basis);
        truncated.sub(&self.model_truncation()).frobenius_norm()
    }
}

/// Admissible couplings S_B = {0} ∪ {γ ≠ 0 : σ₁ < arg(γ) < π − σ₂}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSector {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl CouplingSector {
    pub fn contains(&self, gamma: Complex64) -> bool {
        if gamma == Complex64::new(0.0, 0.0) {
            return true;
        }
        let arg = gamma.arg();
        arg > self.sigma1 && arg < std::f64::consts::PI - self.sigma2
    }

    /// Open admissible angle interval (σ₁, π − σ₂) for ray directions.
    pub fn theta_interval(&self) -> (f64, f64) {
        (self.sigma1, std::f64::consts::PI - self.sigma2)
    }
}

/// Split B into kernel and range, build the X/E representation, and report
/// the minimal sector constants.
///
/// Kernel detection uses eigenvalues of D₀ = (B+B*)/2 at threshold
/// 1e-12·‖B‖; D₀ must be PSD up to that threshold and its kernel must be
/// annihilated by D₁ = (B−B*)/(2i), otherwise B is not sectorial.
pub fn analyze_sectorial(b: &ComplexMatrix) -> Result<SectorialDecomposition, SectorialError> {
    assert!(b.is_square(), "sectorial analysis needs a square matrix");
    let n = b.rows();
    let norm = b.frobenius_norm();
    if norm == 0.0 {
        // Zero matrix: everything is kernel, sector degenerate at 0.
        return Ok(SectorialDecomposition {
            sigma1: 0.0,
            sigma2: 0.0,
            kernel_basis: ComplexMatrix::identity(n),
            range_basis: ComplexMatrix::zeros(n, 0),
            x: ComplexMatrix::zeros(0, 0),
            e: ComplexMatrix::zeros(0, 0),
            rank: 0,
        });
    }

    let d0 = b.hermitian_part();
    let d1 = b.skew_part();
    let sys = hermitian_eig(&d0)?;
    let kernel_tol = 1e-12 * norm;

    if sys.eigenvalues[0] < -kernel_tol {
        return Err(SectorialError::NotSectorial {
            detail: format!(
                "Re-part has eigenvalue {:.6e} < -{:.3e}; numerical range leaves the right half plane",
                sys.eigenvalues[0], kernel_tol
            ),
        });
    }

    let mut kernel_cols = Vec::new();
    let mut range_cols = Vec::new();
    let mut x_diag = Vec::new();
    for (i, &ev) in sys.eigenvalues.iter().enumerate() {
        if ev <= kernel_tol {
            kernel_cols.push(sys.eigenvector(i));
        } else {
            range_cols.push(sys.eigenvector(i));
            x_diag.push(ev);
        }
    }
    let kernel_basis = ComplexMatrix::from_columns(&kernel_cols);
    let range_basis = if range_cols.is_empty() {
        ComplexMatrix::zeros(n, 0)
    } else {
        ComplexMatrix::from_columns(&range_cols)
    };
    let rank = x_diag.len();

    // Sectoriality forces Ker(D₀) ⊆ Ker(D₁); a violation means the skew
    // part acts on directions where the quadratic form vanishes, i.e. E
    // would be unbounded.
    for j in 0..kernel_basis.cols() {
        let col = kernel_basis.column(j);
        let image = d1.matvec(&col);
        let leak = crate::linalg::vec_norm(&image);
        if leak > 1e-8 * norm {
            return Err(SectorialError::NotSectorial {
                detail: format!(
                    "Ker(Re B) is not invariant: ‖Im-part · kernel vector‖ = {leak:.3e}"
                ),
            });
        }
    }

    let x = ComplexMatrix::real_diagonal(&x_diag);
    let d1_trunc = d1.compress_to_basis(&range_basis);
    let e = ComplexMatrix::from_fn(rank, rank, |i, j| {
        d1_trunc[(i, j)] / (x_diag[i].sqrt() * x_diag[j].sqrt())
    })
    .hermitian_part();

    let (sigma1, sigma2) = if rank == 0 {
        (0.0, 0.0)
    } else {
        let esys = hermitian_eig(&e)?;
        let lo = esys.eigenvalues[0];
        let hi = esys.eigenvalues[rank - 1];
        ((-lo).max(0.0).atan(), hi.max(0.0).atan())
    };

    let dec = SectorialDecomposition { sigma1, sigma2, kernel_basis, range_basis, x, e, rank };
    let recon = dec.reconstruction_residual(b);
    if recon > 1e-10 * norm {
        return Err(SectorialError::NotSectorial {
            detail: format!("X^½(I+iE)X^½ reconstruction residual {recon:.3e} exceeds 1e-10·‖B‖"),
        });
    }
    Ok(dec)
}

/// The coupling sector determined by a decomposition's minimal constants.
pub fn coupling_sector(dec: &SectorialDecomposition) -> CouplingSector {
    CouplingSector { sigma1: dec.sigma1, sigma2: dec.sigma2 }
}

const ANGLE_TOL: f64 = 1e-10;

/// Extreme-ray test in the cone C_{σ₁,σ₂}: true iff B = α⟨·,e⟩e with
/// arg(α) on the sector boundary {−σ₁, σ₂}.
pub fn is_extreme_ray(
    b: &ComplexMatrix,
    sigma1: f64,
    sigma2: f64,
) -> Result<bool, SectorialError> {
    let dec = analyze_sectorial(b).map_err(|err| match err {
        SectorialError::NotSectorial { detail } => {
            SectorialError::NotInCone { sigma1, sigma2, detail }
        }
        other => other,
    })?;
    if dec.sigma1 > sigma1 + ANGLE_TOL || dec.sigma2 > sigma2 + ANGLE_TOL {
        return Err(SectorialError::NotInCone {
            sigma1,
            sigma2,
            detail: format!(
                "minimal constants (σ₁={:.6}, σ₂={:.6}) exceed the admissible bounds",
                dec.sigma1, dec.sigma2
            ),
        });
    }
    if dec.rank != 1 {
        return Ok(false);
    }
    // Rank one: B = α e e* with e the unit range vector; α = ⟨e, Be⟩.
    let e = dec.range_basis.column(0);
    let alpha = crate::linalg::cdot(&e, &b.matvec(&e));
    let arg = alpha.arg();
    Ok((arg - sigma2).abs() <= ANGLE_TOL || (arg + sigma1).abs() <= ANGLE_TOL)
}

/// For sectorial B the statements S·B·S* = 0, S·B = 0, S·B* = 0 are
/// equivalent; returns the three truth values so callers (and the property
/// suite) can observe the agreement.
pub fn check_zero_equivalence(
    b: &ComplexMatrix,
    s: &ComplexMatrix,
) -> Result<(bool, bool, bool), SectorialError> {
    analyze_sectorial(b)?;
    assert_eq!(s.cols(), b.rows(), "S must act on the space of B");
    let ns = s.frobenius_norm();
    let nb = b.frobenius_norm();
    let sbs = s.matmul(b).matmul(&s.adjoint()).frobenius_norm();
    let sb = s.matmul(b).frobenius_norm();
    let sbstar = s.matmul(&b.adjoint()).frobenius_norm();
    // The quadratic product gets the quadratic scale; the linear ones the
    // linear scale.
    let quad_tol = 1e-12 * ns * ns * nb;
    let lin_tol = 1e-12 * ns * nb;
    Ok((sbs <= quad_tol, sb <= lin_tol, sbstar <= lin_tol))
}
