//! Interval compression and zero certification over random measures and
//! polynomials: the cubic error bound, Herglotz preservation, and Rouché
//! acceptance/rejection behaviour.

mod common;

use common::*;
use num_complex::Complex64;
use perturbatrix_core::herglotz::{eval_m, HerglotzFunction, SpectralMeasure};
use perturbatrix_core::linalg::poly_from_roots;
use perturbatrix_core::localize::{
    compress, compression_error_bound, rouche_certify, AffineMap, Region,
};
use perturbatrix_core::ComplexMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_measure(r: &mut ChaCha8Rng, dim: usize, atoms: usize) -> SpectralMeasure {
    let mut locations: Vec<f64> = (0..atoms).map(|_| r.gen_range(-3.0..3.0)).collect();
    locations.sort_by(f64::total_cmp);
    locations.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let pairs = locations
        .iter()
        .map(|&s| {
            // PSD weight G·G* with small random factors.
            let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
                random_complex(r) * Complex64::new(0.5, 0.0)
            });
            (s, g.matmul(&g.adjoint()))
        })
        .collect();
    SpectralMeasure { atoms: pairs, dimension: dim }
}

fn direct_eval(measure: &SpectralMeasure, lambda: Complex64) -> ComplexMatrix {
    let mut sum = ComplexMatrix::zeros(measure.dimension, measure.dimension);
    for (s, q) in &measure.atoms {
        sum = sum.add(&q.scale((Complex64::new(*s, 0.0) - lambda).inv()));
    }
    sum
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn compression_error_obeys_the_cubic_bound(
        seed in any::<u64>(),
        dim in 1usize..=3,
        atoms in 3usize..=9,
        width in 0.2f64..1.6,
    ) {
        let mut r = rng(seed);
        let measure = random_measure(&mut r, dim, atoms);
        let mid = r.gen_range(-2.0..2.0);
        let (a, b) = (mid - width / 2.0, mid + width / 2.0);
        let comp = match compress(&measure, a, b) {
            Ok(c) => c,
            // Nothing captured: the statement is vacuous for this draw.
            Err(_) => return Ok(()),
        };
        prop_assert!(comp.interval_defect() <= 1e-10);
        prop_assert!(comp.moment_defect() <= 1e-10);

        for _ in 0..20 {
            let l = r.gen_range(0.8 * width.max(0.3)..4.0);
            let phi = r.gen_range(0.1..std::f64::consts::PI - 0.1);
            let anchor = if r.gen_bool(0.5) { a } else { b };
            let lambda = Complex64::new(anchor, 0.0) + Complex64::from_polar(l, phi);
            let dist = dist_to_segment(lambda, a, b);
            prop_assume!(dist > 1e-6);
            let exact = direct_eval(&measure, lambda);
            let approx = comp.eval(lambda).unwrap();
            // The bound is an operator-norm statement.
            let diff = exact.sub(&approx);
            let err = jacobi_eigenvalues(&diff.adjoint().matmul(&diff))
                .last()
                .copied()
                .unwrap()
                .max(0.0)
                .sqrt();
            let bound = compression_error_bound(&comp, dist);
            prop_assert!(
                err <= bound + 1e-12,
                "err {err:.3e} over bound {bound:.3e} at dist {dist:.3}"
            );
        }
    }

    #[test]
    fn compression_preserves_the_herglotz_property(
        seed in any::<u64>(),
        dim in 1usize..=3,
        atoms in 3usize..=8,
    ) {
        let mut r = rng(seed);
        let measure = random_measure(&mut r, dim, atoms);
        let comp = match compress(&measure, -1.0, 1.0) {
            Ok(c) => c,
            Err(_) => return Ok(()),
        };
        for _ in 0..30 {
            let lambda = c(r.gen_range(-5.0..5.0), r.gen_range(0.02..3.0));
            let m = comp.eval(lambda).unwrap();
            // Hermitian part of (M − M*)/(2i) must be PSD for a Herglotz map.
            let imag_part = m.sub(&m.adjoint()).scale(c(0.0, -0.5));
            let eigs = jacobi_eigenvalues(&imag_part);
            prop_assert!(eigs[0] >= -1e-11, "Im-part eigenvalue {} < 0", eigs[0]);
        }
        // The compressed object is itself a valid atomic Herglotz function.
        let as_measure = comp.as_measure();
        let mu = HerglotzFunction::Matrix(as_measure);
        let m = eval_m(&mu, c(0.3, 0.9)).unwrap();
        let direct = comp.eval(c(0.3, 0.9)).unwrap();
        prop_assert!(m.sub(&direct).frobenius_norm() <= 1e-9 * direct.frobenius_norm().max(1.0));
    }

    #[test]
    fn bound_is_monotone_in_distance_and_width(
        seed in any::<u64>(),
        width in 0.2f64..2.0,
    ) {
        let mut r = rng(seed);
        let measure = random_measure(&mut r, 2, 6);
        let mid = 0.0;
        let full = match compress(&measure, mid - width / 2.0, mid + width / 2.0) {
            Ok(c) => c,
            Err(_) => return Ok(()),
        };
        let b1 = compression_error_bound(&full, 1.0);
        let b2 = compression_error_bound(&full, 2.0);
        prop_assert!(b2 <= b1 / 7.9, "cubic decay violated: {b1:.3e} → {b2:.3e}");
        let half = match compress(&measure, mid - width / 4.0, mid + width / 4.0) {
            Ok(c) => c,
            Err(_) => return Ok(()),
        };
        // Same distance, half the width, no more mass: at least 4× smaller.
        prop_assert!(
            compression_error_bound(&half, 1.0) <= b1 / 3.9,
            "quadratic width factor violated"
        );
    }

    #[test]
    fn rouche_certifies_small_perturbations_of_separated_roots(
        seed in any::<u64>(),
        n in 2usize..=6,
        eta in 1e-4f64..0.05,
    ) {
        let mut r = rng(seed);
        // Roots on a circle with chords ≈ 2: pairwise separated yet compact
        // enough for the grid sweep to certify at every degree.
        let ring = if n == 2 { 1.0 } else { 1.0 / (std::f64::consts::PI / n as f64).sin() };
        let roots: Vec<Complex64> = (0..n)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / n as f64;
                c(
                    ring * phi.cos() + r.gen_range(-0.1..0.1),
                    ring * phi.sin() + r.gen_range(-0.1..0.1),
                )
            })
            .collect();
        let map = AffineMap::for_roots(&roots);
        // Inflate past the knife edge so recomputed roots stay ≥ 2 apart.
        let normalized: Vec<Complex64> =
            roots.iter().map(|&z| map.forward(z) * 1.02).collect();
        let p = poly_from_roots(&normalized);
        // Constant-coefficient shift keeps |p − q| = η on every contour.
        let shift = Complex64::from_polar(eta, r.gen_range(0.0..std::f64::consts::TAU));
        let radius = normalized.iter().map(|z| z.norm()).fold(0.0, f64::max) + 2.0;
        let region = Region::Disc { center: c(0.0, 0.0), radius };
        let cert = rouche_certify(&p, |z| p.eval(z) + shift, region, 0.45).unwrap();
        prop_assert_eq!(cert.p_count, n as i64);
        prop_assert_eq!(cert.q_count, n as i64);
        prop_assert_eq!(cert.discs.len(), n);
        for disc in &cert.discs {
            prop_assert_eq!(disc.p_count, 1);
            prop_assert_eq!(disc.q_count, 1);
        }
    }
}

fn dist_to_segment(lambda: Complex64, a: f64, b: f64) -> f64 {
    let x = lambda.re.clamp(a, b);
    (Complex64::new(x, 0.0) - lambda).norm()
}
