//! Matrix exponential by scaling-and-squaring with the degree-13 Padé
//! approximant. The scaling power is chosen so the scaled one-norm sits
//! under the standard θ₁₃ threshold, the rational approximant is evaluated
//! with the usual even/odd split, and the result is squared back up.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::LinalgError;

/// ‖A‖₁ threshold below which the (13,13) approximant is full accuracy.
const THETA_13: f64 = 5.371920351148152;

/// Padé(13) numerator coefficients b₀..b₁₃.
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Norm cap: past this the squaring chain amplifies rounding beyond any
/// useful accuracy claim, so we refuse instead of silently degrading.
const NORM_CAP: f64 = 1e6;

/// e^A for square complex A.
///
/// Relative accuracy is ~1e-10 or better for ‖A‖ up to 1e4; larger norms up
/// to the hard cap still compute but with degraded accuracy, and non-finite
/// or cap-exceeding norms report `Overflow`.
pub fn matrix_exp(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let norm = a.one_norm();
    if !norm.is_finite() || norm > NORM_CAP {
        return Err(LinalgError::Overflow { norm });
    }

    let s = if norm > THETA_13 { ((norm / THETA_13).log2().ceil() as i32).max(0) } else { 0 };
    let scaled = a.scale(Complex64::new(0.5f64.powi(s), 0.0));

    let a2 = scaled.matmul(&scaled);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let b = |k: usize| Complex64::new(PADE_13[k], 0.0);
    let ident = ComplexMatrix::identity(n);

    // U = A·(A6·(b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let u_inner_high = a6.scale(b(13)).add(&a4.scale(b(11))).add(&a2.scale(b(9)));
    let u_inner = a6
        .matmul(&u_inner_high)
        .add(&a6.scale(b(7)))
        .add(&a4.scale(b(5)))
        .add(&a2.scale(b(3)))
        .add(&ident.scale(b(1)));
    let u = scaled.matmul(&u_inner);

    // V = A6·(b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let v_inner_high = a6.scale(b(12)).add(&a4.scale(b(10))).add(&a2.scale(b(8)));
    let v = a6
        .matmul(&v_inner_high)
        .add(&a6.scale(b(6)))
        .add(&a4.scale(b(4)))
        .add(&a2.scale(b(2)))
        .add(&ident.scale(b(0)));

    // (V − U) X = (V + U)
    let lhs = v.sub(&u);
    let rhs = v.add(&u);
    let mut x = lhs
        .lu()
        .map_err(|_| LinalgError::Overflow { norm })?
        .solve_mat(&rhs)
        .map_err(|_| LinalgError::Overflow { norm })?;

    for _ in 0..s {
        x = x.matmul(&x);
        if !x.frobenius_norm().is_finite() {
            return Err(LinalgError::Overflow { norm });
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_of_zero_is_identity() {
        let e = matrix_exp(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert!(e.sub(&ComplexMatrix::identity(3)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn diagonal_case_matches_scalar_exp() {
        let d = [c(1.0, 2.0), c(-0.5, 0.0), c(0.0, -3.0)];
        let e = matrix_exp(&ComplexMatrix::diagonal(&d)).unwrap();
        for (i, &z) in d.iter().enumerate() {
            assert!((e[(i, i)] - z.exp()).norm() < 1e-13 * z.exp().norm());
        }
    }

    #[test]
    fn rotation_generator_gives_sine_cosine() {
        // exp(t·[[0,-1],[1,0]]) = [[cos t, −sin t],[sin t, cos t]].
        let t = 0.7;
        let g = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(-t, 0.0)],
            vec![c(t, 0.0), c(0.0, 0.0)],
        ]);
        let e = matrix_exp(&g).unwrap();
        assert!((e[(0, 0)] - c(t.cos(), 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - c(-t.sin(), 0.0)).norm() < 1e-14);
        assert!((e[(1, 0)] - c(t.sin(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn large_norm_goes_through_squaring() {
        // ‖A‖ = 40 forces several squarings; compare against the diagonal
        // closed form under a fixed similarity.
        let d = ComplexMatrix::diagonal(&[c(3.0, 10.0), c(-2.0, -7.0), c(1.0, 0.0)]);
        let p = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)],
        ]);
        let pinv = p.lu().unwrap().inverse().unwrap();
        let a = p.matmul(&d).matmul(&pinv);
        let expected = {
            let ed = ComplexMatrix::diagonal(&[
                c(3.0, 10.0).exp(),
                c(-2.0, -7.0).exp(),
                c(1.0, 0.0).exp(),
            ]);
            p.matmul(&ed).matmul(&pinv)
        };
        let e = matrix_exp(&a).unwrap();
        let rel = e.sub(&expected).frobenius_norm() / expected.frobenius_norm();
        assert!(rel < 1e-10, "relative error {rel:.3e}");
    }

    #[test]
    fn semigroup_property_holds() {
        let a = ComplexMatrix::from_fn(4, 4, |i, j| {
            c(((i + 3 * j) % 5) as f64 * 0.2 - 0.4, ((2 * i + j) % 3) as f64 * 0.3 - 0.3)
        });
        let e1 = matrix_exp(&a).unwrap();
        let e2 = matrix_exp(&a.scale(c(2.0, 0.0))).unwrap();
        let rel = e1.matmul(&e1).sub(&e2).frobenius_norm() / e2.frobenius_norm();
        assert!(rel < 1e-12, "semigroup defect {rel:.3e}");
    }

    #[test]
    fn overflow_norm_rejected() {
        let a = ComplexMatrix::diagonal(&[c(1e7, 0.0)]);
        assert!(matches!(matrix_exp(&a), Err(LinalgError::Overflow { .. })));
    }
}
