//! Hermitian eigensolver: unitary Householder reduction to a real symmetric
//! tridiagonal, then implicit QL with Wilkinson shifts, accumulating the
//! complex transformations so A = U diag(λ) U* with U unitary.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::{LinalgError, DIMENSION_CAP};

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascend; eigenvector
/// k is the k-th column of `eigenvectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// U diag(λ) U*, for reconstruction checks.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| {
            self.eigenvectors[(i, j)] * self.eigenvalues[j]
        });
        scaled.matmul(&self.eigenvectors.adjoint())
    }
}

/// Reduce Hermitian A to real symmetric tridiagonal T = U* A U.
/// Returns (diagonal, subdiagonal, U).
fn tridiagonalize(a: &ComplexMatrix) -> (Vec<f64>, Vec<f64>, ComplexMatrix) {
    let n = a.rows();
    let mut m = a.clone();
    let mut u = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for k in 0..n.saturating_sub(2) {
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| m[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm <= 1e-300 * scale {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        x[0] += phase * xnorm;
        let vnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut x {
            *z /= vnorm;
        }
        // Similarity by H = I − 2vv* acting on indices k+1..n.
        // Columns first: m[k+1.., j] -= 2 v (v* m[k+1.., j]).
        for j in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (r, vi) in x.iter().enumerate() {
                dot += vi.conj() * m[(k + 1 + r, j)];
            }
            dot *= 2.0;
            for (r, vi) in x.iter().enumerate() {
                let sub = vi * dot;
                m[(k + 1 + r, j)] -= sub;
            }
        }
        // Rows: m[i, k+1..] -= 2 (m[i, k+1..] v) v*.
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (r, vi) in x.iter().enumerate() {
                dot += m[(i, k + 1 + r)] * vi;
            }
            dot *= 2.0;
            for (r, vi) in x.iter().enumerate() {
                let sub = dot * vi.conj();
                m[(i, k + 1 + r)] -= sub;
            }
        }
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (r, vi) in x.iter().enumerate() {
                dot += u[(i, k + 1 + r)] * vi;
            }
            dot *= 2.0;
            for (r, vi) in x.iter().enumerate() {
                let sub = dot * vi.conj();
                u[(i, k + 1 + r)] -= sub;
            }
        }
    }

    // Phase-rotate so the subdiagonal becomes real nonnegative.
    let mut phi = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let t = m[(i + 1, i)] * phi[i];
        let r = t.norm();
        phi[i + 1] = if r > 0.0 { t / r } else { phi[i] };
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    for i in 0..n {
        d[i] = m[(i, i)].re;
        if i + 1 < n {
            e[i] = m[(i + 1, i)].norm();
        }
        for r in 0..n {
            u[(r, i)] = u[(r, i)] * phi[i];
        }
    }
    (d, e, u)
}

/// Implicit QL with Wilkinson shift on a real symmetric tridiagonal,
/// accumulating the real rotations into the complex column basis `z`.
fn tridiag_ql(
    d: &mut [f64],
    e: &mut Vec<f64>,
    z: &mut ComplexMatrix,
) -> Result<(), LinalgError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e.push(0.0);
    let eps = f64::EPSILON;
    let mut total_iters = 0usize;
    let cap = 30 * n;

    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total_iters += 1;
            if iter > 30 || total_iters > cap {
                return Err(LinalgError::NoConvergence { iterations: total_iters });
            }
            // Wilkinson shift from the leading 2x2 of the active block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..z.rows() {
                    let f2 = z[(k, i + 1)];
                    z[(k, i + 1)] = z[(k, i)] * s + f2 * c;
                    z[(k, i)] = z[(k, i)] * c - f2 * s;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input must satisfy ‖A − A*‖ ≤ 1e-12·‖A‖; reconstruction
/// U diag(λ) U* agrees with A to 1e-12·N·‖A‖ on well-scaled inputs.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigenSystem, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n > DIMENSION_CAP {
        return Err(LinalgError::DimensionCap { n, cap: DIMENSION_CAP });
    }
    let norm = a.frobenius_norm();
    let residual = a.hermitian_residual();
    let tol = 1e-12 * norm.max(f64::MIN_POSITIVE);
    if residual > tol {
        return Err(LinalgError::NotHermitian { residual, tol });
    }
    if n == 0 {
        return Ok(HermitianEigenSystem {
            eigenvalues: vec![],
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    if n == 1 {
        return Ok(HermitianEigenSystem {
            eigenvalues: vec![a[(0, 0)].re],
            eigenvectors: ComplexMatrix::identity(1),
        });
    }

    // Work on the exactly Hermitian average; the residual gate above bounds
    // the perturbation this introduces.
    let sym = a.hermitian_part();
    let (mut d, mut e, mut u) = tridiagonalize(&sym);
    tridiag_ql(&mut d, &mut e, &mut u)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok(HermitianEigenSystem { eigenvalues, eigenvectors })
}
