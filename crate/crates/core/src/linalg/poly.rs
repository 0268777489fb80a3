//! Polynomial utilities: evaluation, root finding via balanced companion
//! matrices with Newton polish, stable coefficient construction from roots,
//! and Faddeev–LeVerrier characteristic polynomials for small matrices.

use num_complex::Complex64;

use super::general::general_eig;
use super::matrix::ComplexMatrix;
use super::{LinalgError, CHAR_POLY_CAP};

/// Polynomial with ascending coefficients: p(z) = c[0] + c[1]z + … + c[d]z^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// (p(z), p′(z)) in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![Complex64::new(0.0, 0.0)]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Poly::new(coeffs)
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Poly::new(out)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out =
            vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Largest coefficient magnitude, a cheap scale for residual tests.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Monic polynomial with the given roots, multiplied as a balanced pairwise
/// tree so the partial products stay well-scaled for hundreds of roots.
pub fn poly_from_roots(roots: &[Complex64]) -> Poly {
    if roots.is_empty() {
        return Poly::new(vec![Complex64::new(1.0, 0.0)]);
    }
    let mut level: Vec<Poly> = roots
        .iter()
        .map(|&r| Poly::new(vec![-r, Complex64::new(1.0, 0.0)]))
        .collect();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2 + 1);
        let mut it = level.chunks(2);
        for pair in &mut it {
            match pair {
                [a, b] => next.push(a.mul(b)),
                [a] => next.push(a.clone()),
                _ => unreachable!(),
            }
        }
        level = next;
    }
    level.pop().unwrap()
}

/// Coefficients of det(λI − A), monic and ascending, by the
/// Faddeev–LeVerrier recurrence. Restricted to N ≤ 64: the recurrence is
/// exact in rationals but sheds digits fast, and callers above the cap are
/// expected to go through the eigensolver instead.
pub fn char_poly_coeffs(a: &ComplexMatrix) -> Result<Poly, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n > CHAR_POLY_CAP {
        return Err(LinalgError::DimensionCap { n, cap: CHAR_POLY_CAP });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let mut m = ComplexMatrix::identity(n);
    for k in 1..=n {
        m = a.matmul(&m);
        let c = -m.trace() / k as f64;
        coeffs[n - k] = c;
        m = m.add_scalar_diag(c);
    }
    Ok(Poly::new(coeffs))
}

fn companion_matrix(monic: &[Complex64]) -> ComplexMatrix {
    let d = monic.len() - 1;
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -monic[i];
    }
    m
}

/// All roots of a degree ≥ 1 polynomial: balanced companion-matrix
/// eigenvalues finished with 3 Newton steps on the original coefficients.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    let lead = match coeffs.last() {
        Some(&c) => c,
        None => return Err(LinalgError::DegenerateLeadingCoefficient),
    };
    if lead == Complex64::new(0.0, 0.0) {
        return Err(LinalgError::DegenerateLeadingCoefficient);
    }
    if coeffs.len() < 2 {
        return Err(LinalgError::DegenerateLeadingCoefficient);
    }
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();
    let p = Poly::new(coeffs.to_vec());

    // Strip exact zero roots first; they cost the companion matrix accuracy.
    let zeros_at_origin = monic.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &monic[zeros_at_origin..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    if reduced.len() >= 2 {
        let companion = companion_matrix(reduced);
        let sys = general_eig(&companion, false)?;
        for mut root in sys.eigenvalues {
            for _ in 0..3 {
                let (val, dval) = p.eval_with_derivative(root);
                if dval.norm() == 0.0 {
                    break;
                }
                let step = val / dval;
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                let next = root - step;
                // Newton may bounce on multiple roots; keep the better point.
                if p.eval(next).norm() <= val.norm() {
                    root = next;
                } else {
                    break;
                }
            }
            roots.push(root);
        }
    }
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pair_multisets;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_of_quadratic_with_complex_pair() {
        // z² + 1 = 0.
        let roots = poly_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((roots[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_round_trip_through_coefficients() {
        let original = vec![c(1.0, 0.5), c(-2.0, 1.0), c(0.0, -3.0), c(4.0, 0.0), c(0.5, 0.5)];
        let p = poly_from_roots(&original);
        let recovered = poly_roots(&p.coeffs).unwrap();
        let pairing = pair_multisets(&original, &recovered);
        assert!(pairing.max_distance < 1e-10, "max pairing {:.3e}", pairing.max_distance);
    }

    #[test]
    fn wilkinson_style_clustered_roots_stay_accurate_enough() {
        // Roots 1..=12; classically ill-conditioned in coefficient space.
        let original: Vec<Complex64> = (1..=12).map(|k| c(k as f64, 0.0)).collect();
        let p = poly_from_roots(&original);
        let recovered = poly_roots(&p.coeffs).unwrap();
        let pairing = pair_multisets(&original, &recovered);
        assert!(pairing.max_distance < 1e-6, "max pairing {:.3e}", pairing.max_distance);
    }

    #[test]
    fn zero_leading_coefficient_rejected() {
        assert!(matches!(
            poly_roots(&[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]),
            Err(LinalgError::DegenerateLeadingCoefficient)
        ));
        assert!(matches!(
            poly_roots(&[c(1.0, 0.0)]),
            Err(LinalgError::DegenerateLeadingCoefficient)
        ));
    }

    #[test]
    fn exact_zero_roots_are_stripped() {
        // z³ − z² = z²(z − 1).
        let roots =
            poly_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(roots.len(), 3);
        assert!(roots[0].norm() < 1e-14);
        assert!(roots[1].norm() < 1e-14);
        assert!((roots[2] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn char_poly_matches_det_at_probe_points() {
        let a = ComplexMatrix::from_fn(6, 6, |i, j| {
            c(((i + 2 * j) % 5) as f64 - 2.0, ((3 * i + j) % 4) as f64 - 1.5)
        });
        let p = char_poly_coeffs(&a).unwrap();
        for &probe in &[c(0.3, 0.7), c(-2.0, 0.1), c(5.0, -3.0)] {
            // det(λI − A) via LU at the probe.
            let shifted = ComplexMatrix::identity(6).scale(probe).sub(&a);
            let det = shifted.det();
            let val = p.eval(probe);
            assert!(
                (det - val).norm() <= 1e-10 * det.norm().max(1.0),
                "probe {probe}: det {det} vs poly {val}"
            );
        }
    }

    #[test]
    fn char_poly_cap() {
        let a = ComplexMatrix::zeros(65, 65);
        assert!(matches!(char_poly_coeffs(&a), Err(LinalgError::DimensionCap { .. })));
    }

    #[test]
    fn pairwise_tree_handles_many_roots() {
        // 200 roots on a ring; coefficients span a huge range but the
        // evaluation at fresh points must stay relatively accurate.
        let roots: Vec<Complex64> = (0..200)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 200.0;
                c(t.cos() * 1.1, t.sin() * 1.1)
            })
            .collect();
        let p = poly_from_roots(&roots);
        // p(z) = z^200 ... with ring radius 1.1: p(0) = Π(−r) → |p(0)| = 1.1^200.
        let expected = 1.1f64.powi(200);
        assert!((p.eval(c(0.0, 0.0)).norm() - expected).abs() < 1e-9 * expected);
    }
}
