//! General complex eigensolver: Parlett–Reinsch balancing, unitary Householder
//! reduction to upper Hessenberg form, then explicitly shifted QR with Givens
//! rotations and deflation. Eigenvectors come from back-substitution on the
//! final triangular factor, pushed through the accumulated unitary.

use num_complex::Complex64;

use super::matrix::{vec_norm, ComplexMatrix};
use super::{LinalgError, DIMENSION_CAP};

/// Spectrum of a general complex matrix. `eigenvectors`, when requested,
/// holds unit right eigenvectors column-aligned with `eigenvalues`; each pair
/// satisfies ‖Av − λv‖ ≤ 1e-9·N·‖A‖.
#[derive(Debug, Clone)]
pub struct ComplexEigenSystem {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Option<ComplexMatrix>,
}

impl ComplexEigenSystem {
    pub fn eigenvector(&self, k: usize) -> Option<Vec<Complex64>> {
        self.eigenvectors.as_ref().map(|m| m.column(k))
    }
}

/// In-place diagonal similarity scaling (radix 2) to reduce the norm spread.
/// Returns the scale factors; right eigenvectors un-balance by multiplying
/// component i with scale[i].
fn balance(a: &mut ComplexMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut scale = vec![1.0f64; n];
    let radix = 2.0f64;
    let sq = radix * radix;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm();
                    r += a[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 || !c.is_finite() || !r.is_finite() {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sq;
            }
            g = r * radix;
            while c >= g {
                f /= radix;
                c /= sq;
            }
            if (c + r) / f < 0.95 * s {
                let ginv = 1.0 / f;
                scale[i] *= f;
                for j in 0..n {
                    a[(i, j)] = a[(i, j)] * ginv;
                }
                for j in 0..n {
                    a[(j, i)] = a[(j, i)] * f;
                }
                done = false;
            }
        }
        if done {
            break;
        }
    }
    scale
}

/// Householder reduction to upper Hessenberg; returns the accumulated unitary
/// Q with A = Q H Q*.
fn hessenberg(a: &mut ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut q = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = vec_norm(&v);
        if xnorm <= 1e-300 * scale {
            continue;
        }
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { Complex64::new(1.0, 0.0) };
        v[0] += phase * xnorm;
        let vnorm = vec_norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // Left: rows k+1..n of all columns.
        for j in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (r, vi) in v.iter().enumerate() {
                dot += vi.conj() * a[(k + 1 + r, j)];
            }
            dot *= 2.0;
            for (r, vi) in v.iter().enumerate() {
                let sub = vi * dot;
                a[(k + 1 + r, j)] -= sub;
            }
        }
        // Right: columns k+1..n of all rows.
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (r, vi) in v.iter().enumerate() {
                dot += a[(i, k + 1 + r)] * vi;
            }
            dot *= 2.0;
            for (r, vi) in v.iter().enumerate() {
                let sub = dot * vi.conj();
                a[(i, k + 1 + r)] -= sub;
            }
        }
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (r, vi) in v.iter().enumerate() {
                dot += q[(i, k + 1 + r)] * vi;
            }
            dot *= 2.0;
            for (r, vi) in v.iter().enumerate() {
                let sub = dot * vi.conj();
                q[(i, k + 1 + r)] -= sub;
            }
        }
    }
    // Zero the junk below the first subdiagonal.
    for i in 2..n {
        for j in 0..i - 1 {
            a[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    q
}

/// Complex Givens pair (c real, s) with
/// [c, s; -conj(s), c]·[a; b] = [r; 0].
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let an = a.norm();
    if an == 0.0 {
        // Pure swap with a phase that makes the new diagonal |b|.
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Eigenvalues of [[a, b], [c, d]]; the Wilkinson shift picks the one
/// closer to d.
fn trailing_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Shifted QR on the Hessenberg matrix, reducing it to upper triangular form
/// while accumulating the transformations into `z` when present.
fn hessenberg_qr(
    h: &mut ComplexMatrix,
    mut z: Option<&mut ComplexMatrix>,
    iter_cap_per_eig: usize,
) -> Result<(), LinalgError> {
    let n = h.rows();
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let norm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut hi = n; // active block is rows/cols [lo, hi)
    let mut iters_this_eig = 0usize;
    let mut total_iters = 0usize;

    while hi > 1 {
        // Deflate converged trailing eigenvalues and find the block start.
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= eps * local.max(1e-300 * norm) {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            hi -= 1;
            iters_this_eig = 0;
            continue;
        }

        iters_this_eig += 1;
        total_iters += 1;
        if iters_this_eig > iter_cap_per_eig {
            return Err(LinalgError::NoConvergence { iterations: total_iters });
        }

        let sigma = if iters_this_eig % 12 == 0 {
            // Exceptional shift breaks symmetry-induced stalls.
            let m = h[(hi - 1, hi - 2)].norm()
                + if hi >= 3 { h[(hi - 2, hi - 3)].norm() } else { 0.0 };
            h[(hi - 1, hi - 1)] + Complex64::new(1.5 * m, 0.5 * m)
        } else {
            trailing_shift(
                h[(hi - 2, hi - 2)],
                h[(hi - 2, hi - 1)],
                h[(hi - 1, hi - 2)],
                h[(hi - 1, hi - 1)],
            )
        };

        for i in lo..hi {
            h[(i, i)] -= sigma;
        }
        // Left sweep: rotations r_i kill the subdiagonal of the shifted block.
        let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo - 1);
        for i in lo..hi - 1 {
            let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
            rots.push((c, s));
            for j in i..n {
                let top = h[(i, j)];
                let bot = h[(i + 1, j)];
                h[(i, j)] = top * c + bot * s;
                h[(i + 1, j)] = top * -s.conj() + bot * c;
            }
        }
        // Right sweep (RQ): columns i, i+1 over rows 0..=i+1.
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let i = lo + idx;
            for r in 0..(i + 2).min(n) {
                let left = h[(r, i)];
                let right = h[(r, i + 1)];
                h[(r, i)] = left * c + right * s.conj();
                h[(r, i + 1)] = left * -s + right * c;
            }
            if let Some(zm) = z.as_deref_mut() {
                for r in 0..n {
                    let left = zm[(r, i)];
                    let right = zm[(r, i + 1)];
                    zm[(r, i)] = left * c + right * s.conj();
                    zm[(r, i + 1)] = left * -s + right * c;
                }
            }
        }
        for i in lo..hi {
            h[(i, i)] += sigma;
        }
    }
    Ok(())
}

/// Unit right eigenvectors of an upper triangular T pushed through Z
/// (A = Z T Z*). Repeated diagonal entries get the standard tiny-divisor
/// perturbation, which keeps residuals small even for defective blocks.
fn triangular_eigenvectors(t: &ComplexMatrix, z: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let norm = t.frobenius_norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * norm;
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * x[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            x[i] = -acc / denom;
            let xin = x[i].norm();
            if !xin.is_finite() || xin > 1e250 {
                // Rescale to dodge overflow on badly graded triangles.
                let inv = 1.0 / xin.max(1.0);
                for xx in x.iter_mut() {
                    *xx *= inv;
                }
            }
        }
        let mut v = z.matvec(&x);
        let vn = vec_norm(&v);
        if vn > 0.0 {
            for zz in &mut v {
                *zz /= vn;
            }
        }
        cols.push(v);
    }
    ComplexMatrix::from_columns(&cols)
}

/// Full spectrum of a general complex square matrix.
///
/// Eigenvalues are sorted lexicographically by (Re, Im) for determinism;
/// eigenvectors (optional) stay column-aligned through the sort.
pub fn general_eig(
    a: &ComplexMatrix,
    want_vectors: bool,
) -> Result<ComplexEigenSystem, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n > DIMENSION_CAP {
        return Err(LinalgError::DimensionCap { n, cap: DIMENSION_CAP });
    }
    if !a.frobenius_norm().is_finite() {
        return Err(LinalgError::Overflow { norm: f64::INFINITY });
    }
    if n == 0 {
        return Ok(ComplexEigenSystem { eigenvalues: vec![], eigenvectors: None });
    }
    if n == 1 {
        return Ok(ComplexEigenSystem {
            eigenvalues: vec![a[(0, 0)]],
            eigenvectors: want_vectors.then(|| ComplexMatrix::identity(1)),
        });
    }

    let mut h = a.clone();
    let scale = balance(&mut h);
    let mut z = hessenberg(&mut h);
    let cap = 40 * n;
    if want_vectors {
        hessenberg_qr(&mut h, Some(&mut z), cap)?;
    } else {
        hessenberg_qr(&mut h, None, cap)?;
    }

    let mut eigenvalues: Vec<Complex64> = (0..n).map(|i| h[(i, i)]).collect();
    let mut vectors = if want_vectors {
        let mut v = triangular_eigenvectors(&h, &z);
        // Undo the balancing similarity, then renormalize.
        for j in 0..n {
            let mut col: Vec<Complex64> = (0..n).map(|i| v[(i, j)] * scale[i]).collect();
            let nrm = vec_norm(&col);
            if nrm > 0.0 {
                for c in &mut col {
                    *c /= nrm;
                }
            }
            for i in 0..n {
                v[(i, j)] = col[i];
            }
        }
        Some(v)
    } else {
        None
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (eigenvalues[i], eigenvalues[j]);
        a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap())
    });
    eigenvalues = order.iter().map(|&i| eigenvalues[i]).collect();
    if let Some(v) = vectors.take() {
        vectors = Some(ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]));
    }
    Ok(ComplexEigenSystem { eigenvalues, eigenvectors: vectors })
}
