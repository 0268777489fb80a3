//! Shared generators and an independent eigenvalue oracle for the
//! integration suites. The oracle is cyclic-by-rows complex Jacobi, sharing
//! no code path with the library's Householder + QL solver.

#![allow(dead_code)]

use num_complex::Complex64;
use perturbatrix_core::ComplexMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| random_complex(rng)).collect()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| random_complex(rng));
    g.hermitian_part().scale(c(scale, 0.0))
}

/// Haar-ish unitary via Gram-Schmidt on a random complex matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    loop {
        let mut cols: Vec<Vec<Complex64>> = (0..n).map(|_| random_vector(rng, n)).collect();
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let proj: Complex64 =
                    (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..n {
                    let step = proj * cols[k][i];
                    cols[j][i] -= step;
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for z in &mut cols[j] {
                *z /= norm;
            }
        }
        if ok {
            return ComplexMatrix::from_columns(&cols);
        }
    }
}

/// Normal sectorial B = U diag(β, 0) U* with `rank` nonzero eigenvalues whose
/// arguments sit strictly inside [−σ₁, σ₂]. The numerical range of a normal
/// matrix is the hull of its eigenvalues, so B is sectorial by construction.
pub fn random_normal_sectorial(
    rng: &mut ChaCha8Rng,
    n: usize,
    rank: usize,
    sigma1: f64,
    sigma2: f64,
) -> ComplexMatrix {
    assert!(rank <= n);
    let u = random_unitary(rng, n);
    let mut d = vec![c(0.0, 0.0); n];
    for slot in d.iter_mut().take(rank) {
        let r = rng.gen_range(0.2..2.0);
        let phi = rng.gen_range(-0.95 * sigma1..0.95 * sigma2);
        *slot = Complex64::from_polar(r, phi);
    }
    let ud = ComplexMatrix::from_fn(n, n, |i, j| u[(i, j)] * d[j]);
    ud.matmul(&u.adjoint())
}

/// diag(α) with distinct gaps plus a rank-one PSD perturbation from a vector
/// bounded away from zero in every coordinate, so B is cyclic for A.
pub fn random_cyclic_rank_one(
    rng: &mut ChaCha8Rng,
    n: usize,
) -> (ComplexMatrix, ComplexMatrix, Vec<f64>, Vec<Complex64>) {
    let mut alphas: Vec<f64> = Vec::with_capacity(n);
    let mut cur = rng.gen_range(-2.0..-1.0);
    for _ in 0..n {
        cur += rng.gen_range(0.3..1.2);
        alphas.push(cur);
    }
    let mut e: Vec<Complex64> = (0..n)
        .map(|_| {
            let r = rng.gen_range(0.15..1.0);
            let phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            Complex64::from_polar(r, phi)
        })
        .collect();
    let norm = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut e {
        *z /= norm;
    }
    let a = ComplexMatrix::real_diagonal(&alphas);
    let b = ComplexMatrix::from_fn(n, n, |i, j| e[i] * e[j].conj());
    (a, b, alphas, e)
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi, ascending.
pub fn jacobi_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    assert!(m.is_square());
    let mut a = m.clone();
    let norm = a.frobenius_norm().max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-14 * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let phase = apq / apq.norm();
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                // Columns: [p q] ← [p q]·[[c, −s e^{iφ}], [s e^{−iφ}, c]]
                for i in 0..n {
                    let (aip, aiq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = aip * cth + aiq * sth * phase.conj();
                    a[(i, q)] = -aip * sth * phase + aiq * cth;
                }
                // Rows, with the adjoint factor.
                for j in 0..n {
                    let (apj, aqj) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = apj * cth + aqj * sth * phase;
                    a[(q, j)] = -apj * sth * phase.conj() + aqj * cth;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

pub fn max_abs_diff(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    xs.iter().zip(ys).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
