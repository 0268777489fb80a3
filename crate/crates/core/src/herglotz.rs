//! The Birman–Schwinger side of the family A_γ = A + γB: the spectral
//! measure Q built from B^{1/2} and the eigenprojections of A, the
//! Herglotz function m(λ) = ∫ (s−λ)^{−1} Q(ds) in scalar and matrix form,
//! the relative determinant det(I + γ(A−λI)^{−1}B)^♮, and the rank-one
//! secular pair p(γ,λ) = p₀(λ) + γp₁(λ).
//!
//! Sign convention: p₀(λ) = det(A − λI) and p₁(λ) = det(A^♮ − λI), so the
//! leading coefficients carry (−1)^N and (−1)^{N−1} respectively.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    char_poly_coeffs, general_eig, hermitian_eig, poly_from_roots, vec_norm, ComplexMatrix,
    HermitianEigenSystem, LinalgError, Poly,
};

#[derive(Debug, Error)]
pub enum HerglotzError {
    #[error("weight matrix is not PSD: min eigenvalue {min_eigenvalue:.3e}")]
    NotPSD { min_eigenvalue: f64 },
    #[error("λ = {lambda} is within {distance:.3e} of the atom at {nearest}")]
    PoleProximity { lambda: Complex64, nearest: f64, distance: f64 },
    #[error("vector has norm {norm}, expected a unit vector")]
    NotUnitVector { norm: f64 },
    #[error("λ = {lambda} collides with the spectrum of A")]
    SpectrumCollision { lambda: Complex64 },
    #[error("m(λ) vanished where the Herglotz property forbids it")]
    ZeroDenominator,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Atomic measure with PSD matrix weights at real locations; the total
/// mass equals the truncation of B to closure Ran(B).
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    /// (location, M×M PSD weight), locations strictly increasing.
    pub atoms: Vec<(f64, ComplexMatrix)>,
    pub dimension: usize,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(self.dimension, self.dimension);
        for (_, q) in &self.atoms {
            sum = sum.add(q);
        }
        sum
    }

    /// Mass carried by atoms with location in [lo, hi].
    pub fn mass_on(&self, lo: f64, hi: f64) -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(self.dimension, self.dimension);
        for (s, q) in &self.atoms {
            if *s >= lo && *s <= hi {
                sum = sum.add(q);
            }
        }
        sum
    }

    /// Most negative weight eigenvalue relative to its atom's norm;
    /// ≥ −1e-12 for a PSD measure.
    pub fn psd_violation(&self) -> Result<f64, LinalgError> {
        let mut worst = 0.0f64;
        for (_, q) in &self.atoms {
            let scale = q.frobenius_norm();
            if scale == 0.0 {
                continue;
            }
            let sys = hermitian_eig(q)?;
            worst = worst.min(sys.eigenvalues[0] / scale);
        }
        Ok(worst)
    }
}

/// Merge locations closer than 1e-10 of the overall spread; projections
/// are only defined per distinct eigenvalue.
const COALESCE_REL_TOL: f64 = 1e-10;

fn coalesce_tolerance(locations: &[f64]) -> f64 {
    let lo = locations.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = locations.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo).abs();
    if spread > 0.0 { COALESCE_REL_TOL * spread } else { 0.0 }
}

/// m(λ) as a finite sum of simple poles on the real axis, either scalar
/// (rank-one data) or matrix-valued over a `SpectralMeasure`.
#[derive(Debug, Clone)]
pub enum HerglotzFunction {
    Scalar { locations: Vec<f64>, weights: Vec<f64> },
    Matrix(SpectralMeasure),
}

impl HerglotzFunction {
    /// Scalar m for the pair (A, e): locations are A's eigenvalues,
    /// weights |⟨e, u_r⟩|², coalescing near-degenerate locations.
    pub fn scalar(a_eig: &HermitianEigenSystem, e: &[Complex64]) -> Result<Self, HerglotzError> {
        let norm = vec_norm(e);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(HerglotzError::NotUnitVector { norm });
        }
        let n = a_eig.eigenvalues.len();
        let tol = coalesce_tolerance(&a_eig.eigenvalues);
        let mut locations: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for r in 0..n {
            let u = a_eig.eigenvector(r);
            let w = crate::linalg::cdot(&u, e).norm_sqr();
            let s = a_eig.eigenvalues[r];
            match locations.last() {
                Some(&prev) if (s - prev).abs() <= tol => {
                    *weights.last_mut().unwrap() += w;
                }
                _ => {
                    locations.push(s);
                    weights.push(w);
                }
            }
        }
        Ok(HerglotzFunction::Scalar { locations, weights })
    }

    /// Scalar m directly from (location, weight) pairs; weights must be
    /// nonnegative. Locations are sorted and coalesced.
    pub fn from_atoms(pairs: &[(f64, f64)]) -> Result<Self, HerglotzError> {
        let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
        for &(_, w) in &sorted {
            if w < 0.0 {
                return Err(HerglotzError::NotPSD { min_eigenvalue: w });
            }
        }
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let locs: Vec<f64> = sorted.iter().map(|p| p.0).collect();
        let tol = coalesce_tolerance(&locs);
        let mut locations: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (s, w) in sorted {
            match locations.last() {
                Some(&prev) if (s - prev).abs() <= tol => *weights.last_mut().unwrap() += w,
                _ => {
                    locations.push(s);
                    weights.push(w);
                }
            }
        }
        Ok(HerglotzFunction::Scalar { locations, weights })
    }

    pub fn dimension(&self) -> usize {
        match self {
            HerglotzFunction::Scalar { .. } => 1,
            HerglotzFunction::Matrix(measure) => measure.dimension,
        }
    }

    fn pole_locations(&self) -> Vec<f64> {
        match self {
            HerglotzFunction::Scalar { locations, .. } => locations.clone(),
            HerglotzFunction::Matrix(measure) => measure.atoms.iter().map(|a| a.0).collect(),
        }
    }

    fn check_pole(&self, lambda: Complex64) -> Result<(), HerglotzError> {
        let locations = self.pole_locations();
        let mut nearest = f64::NAN;
        let mut distance = f64::INFINITY;
        let mut scale = lambda.norm().max(1.0);
        for &s in &locations {
            scale = scale.max(s.abs());
            let d = (lambda - Complex64::new(s, 0.0)).norm();
            if d < distance {
                distance = d;
                nearest = s;
            }
        }
        if distance <= 1e-14 * scale {
            return Err(HerglotzError::PoleProximity { lambda, nearest, distance });
        }
        Ok(())
    }

    /// Scalar evaluation; panics on a matrix-valued function of dimension
    /// above one.
    pub fn eval_scalar(&self, lambda: Complex64) -> Result<Complex64, HerglotzError> {
        self.check_pole(lambda)?;
        match self {
            HerglotzFunction::Scalar { locations, weights } => {
                let mut sum = Complex64::new(0.0, 0.0);
                for (&s, &w) in locations.iter().zip(weights) {
                    sum += Complex64::new(w, 0.0) / (Complex64::new(s, 0.0) - lambda);
                }
                Ok(sum)
            }
            HerglotzFunction::Matrix(measure) => {
                assert_eq!(measure.dimension, 1, "scalar read of a matrix-valued m");
                let mut sum = Complex64::new(0.0, 0.0);
                for (s, q) in &measure.atoms {
                    sum += q[(0, 0)] / (Complex64::new(*s, 0.0) - lambda);
                }
                Ok(sum)
            }
        }
    }

    /// (m(λ), m′(λ)) for the scalar case; m′(λ) = Σ w/(s−λ)².
    pub fn eval_scalar_with_derivative(
        &self,
        lambda: Complex64,
    ) -> Result<(Complex64, Complex64), HerglotzError> {
        self.check_pole(lambda)?;
        match self {
            HerglotzFunction::Scalar { locations, weights } => {
                let mut m = Complex64::new(0.0, 0.0);
                let mut dm = Complex64::new(0.0, 0.0);
                for (&s, &w) in locations.iter().zip(weights) {
                    let d = Complex64::new(s, 0.0) - lambda;
                    m += w / d;
                    dm += w / (d * d);
                }
                Ok((m, dm))
            }
            HerglotzFunction::Matrix(_) => panic!("derivative read of a matrix-valued m"),
        }
    }
}

/// Evaluate m(λ) as an M×M matrix (1×1 in the scalar case).
pub fn eval_m(mu: &HerglotzFunction, lambda: Complex64) -> Result<ComplexMatrix, HerglotzError> {
    mu.check_pole(lambda)?;
    match mu {
        HerglotzFunction::Scalar { .. } => {
            let v = mu.eval_scalar(lambda)?;
            Ok(ComplexMatrix::from_fn(1, 1, |_, _| v))
        }
        HerglotzFunction::Matrix(measure) => {
            let m = measure.dimension;
            let mut sum = ComplexMatrix::zeros(m, m);
            for (s, q) in &measure.atoms {
                let f = (Complex64::new(*s, 0.0) - lambda).inv();
                sum = sum.add(&q.scale(f));
            }
            Ok(sum)
        }
    }
}

/// Couplings γ = −1/ν over the nonzero eigenvalues ν of m(λ); these are
/// exactly the γ for which λ ∈ Spec(A + γB).
pub fn couplings_at(
    mu: &HerglotzFunction,
    lambda: Complex64,
) -> Result<Vec<Complex64>, HerglotzError> {
    let m = eval_m(mu, lambda)?;
    let sys = general_eig(&m, false)?;
    let scale = m.frobenius_norm();
    Ok(sys
        .eigenvalues
        .iter()
        .filter(|nu| nu.norm() > 1e-14 * scale.max(1.0))
        .map(|nu| -nu.inv())
        .collect())
}

/// Build the measure Q(ds) = Σ_j δ(s − s_j) (B^{1/2} P_j B^{1/2})^♮ from
/// the eigensystem of A and a PSD B.
pub fn build_measure(
    a_eig: &HermitianEigenSystem,
    b: &ComplexMatrix,
) -> Result<SpectralMeasure, HerglotzError> {
    let n = a_eig.eigenvalues.len();
    assert_eq!(b.rows(), n, "B must act on the space of A");
    let bsys = hermitian_eig(b)?;
    let bnorm = b.frobenius_norm();
    if bsys.eigenvalues[0] < -1e-12 * bnorm {
        return Err(HerglotzError::NotPSD { min_eigenvalue: bsys.eigenvalues[0] });
    }

    // Range basis of B and B^{1/2} restricted to it.
    let rank_tol = 1e-12 * bnorm;
    let mut range_cols = Vec::new();
    let mut sqrt_evs = Vec::new();
    for i in 0..n {
        let ev = bsys.eigenvalues[i].max(0.0);
        if ev > rank_tol {
            range_cols.push(bsys.eigenvector(i));
            sqrt_evs.push(ev.sqrt());
        }
    }
    let m = range_cols.len();
    if m == 0 {
        return Ok(SpectralMeasure { atoms: Vec::new(), dimension: 0 });
    }
    let v = ComplexMatrix::from_columns(&range_cols);
    // G = B^{1/2} V = V·diag(√eigs); atoms are Q_j = G* P_j G.
    let g = ComplexMatrix::from_fn(n, m, |i, j| v[(i, j)] * sqrt_evs[j]);

    let tol = coalesce_tolerance(&a_eig.eigenvalues);
    let mut atoms: Vec<(f64, ComplexMatrix)> = Vec::new();
    let mut cluster_start = 0usize;
    while cluster_start < n {
        let mut cluster_end = cluster_start + 1;
        while cluster_end < n
            && (a_eig.eigenvalues[cluster_end] - a_eig.eigenvalues[cluster_end - 1]).abs() <= tol
        {
            cluster_end += 1;
        }
        // U* G stacked over the cluster's eigenvectors, then Q = (U*G)*(U*G).
        let k = cluster_end - cluster_start;
        let mut ug = ComplexMatrix::zeros(k, m);
        for (row, idx) in (cluster_start..cluster_end).enumerate() {
            let u = a_eig.eigenvector(idx);
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    acc += u[i].conj() * g[(i, j)];
                }
                ug[(row, j)] = acc;
            }
        }
        let q = ug.adjoint().matmul(&ug).hermitian_part();
        let location = a_eig.eigenvalues[cluster_start..cluster_end].iter().sum::<f64>() / k as f64;
        atoms.push((location, q));
        cluster_start = cluster_end;
    }

    Ok(SpectralMeasure { atoms, dimension: m })
}

/// Rank-one secular data: p₀ = det(A − λI), p₁ = det(A^♮ − λI) with A^♮
/// the compression of A to e^⊥.
#[derive(Debug, Clone)]
pub struct SecularPair {
    pub p0: Poly,
    pub p1: Poly,
}

impl SecularPair {
    pub fn eval(&self, gamma: Complex64, lambda: Complex64) -> Complex64 {
        self.p0.eval(lambda) + gamma * self.p1.eval(lambda)
    }

    /// ∂p/∂λ at fixed γ.
    pub fn eval_dlambda(&self, gamma: Complex64, lambda: Complex64) -> Complex64 {
        self.p0.derivative().eval(lambda) + gamma * self.p1.derivative().eval(lambda)
    }

    /// Roots of λ ↦ p(γ, λ).
    pub fn lambda_roots(&self, gamma: Complex64) -> Result<Vec<Complex64>, LinalgError> {
        let p = self.p0.add(&self.p1.scale(gamma));
        crate::linalg::poly_roots(&p.coeffs)
    }

    /// Strict interlacing λ₁ < δ₁ < λ₂ < … < δ_{N−1} < λ_N of the real
    /// roots of p₀ and p₁; holds exactly when e is cyclic for A.
    pub fn interlacing_ok(&self) -> Result<bool, LinalgError> {
        let mut lam: Vec<f64> =
            crate::linalg::poly_roots(&self.p0.coeffs)?.iter().map(|z| z.re).collect();
        let mut del: Vec<f64> =
            crate::linalg::poly_roots(&self.p1.coeffs)?.iter().map(|z| z.re).collect();
        lam.sort_by(f64::total_cmp);
        del.sort_by(f64::total_cmp);
        if del.len() + 1 != lam.len() {
            return Ok(false);
        }
        Ok((0..del.len()).all(|i| lam[i] < del[i] && del[i] < lam[i + 1]))
    }
}

fn realify(p: Poly) -> Poly {
    Poly::new(p.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect())
}

/// det(M − λI) with real coefficients, from Leverrier recursion for small
/// M and from eigenvalue products above dimension 20 for accuracy.
fn signed_char_poly(m: &ComplexMatrix) -> Result<Poly, LinalgError> {
    let n = m.rows();
    let monic = if n <= 20 {
        char_poly_coeffs(m)?
    } else {
        let sys = hermitian_eig(m)?;
        let roots: Vec<Complex64> =
            sys.eigenvalues.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        poly_from_roots(&roots)
    };
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(realify(monic.scale(Complex64::new(sign, 0.0))))
}

/// Unitary whose first column is e (Householder reflector construction);
/// columns 2..N form a deterministic orthonormal basis of e^⊥.
pub fn householder_completion(e: &[Complex64]) -> ComplexMatrix {
    let n = e.len();
    let alpha = if e[0].norm() > 0.0 { -e[0] / e[0].norm() } else { Complex64::new(-1.0, 0.0) };
    // w = e − α·e₁ has no cancellation: ⟨w,w⟩ = 2(1 + |e₀|).
    let mut w: Vec<Complex64> = e.to_vec();
    w[0] -= alpha;
    let ww = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let h = if ww == 0.0 {
        ComplexMatrix::identity(n)
    } else {
        ComplexMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            delta - w[i] * w[j].conj() * (2.0 / ww)
        })
    };
    // H e = α e₁ and H is its own inverse, so H(α e₁) = e; rescale the
    // first column's phase so it is exactly e.
    ComplexMatrix::from_fn(n, n, |i, j| if j == 0 { h[(i, 0)] * alpha.conj() } else { h[(i, j)] })
}

/// Build (p₀, p₁) for a Hermitian A and unit vector e.
pub fn secular_pair(a: &ComplexMatrix, e: &[Complex64]) -> Result<SecularPair, HerglotzError> {
    let n = a.rows();
    assert_eq!(e.len(), n, "vector length must match A");
    let norm = vec_norm(e);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(HerglotzError::NotUnitVector { norm });
    }
    let scale = a.frobenius_norm();
    if a.hermitian_residual() > 1e-12 * scale.max(1.0) {
        return Err(HerglotzError::Linalg(LinalgError::NotHermitian {
            residual: a.hermitian_residual(),
            tol: 1e-12 * scale.max(1.0),
        }));
    }

    let p0 = signed_char_poly(a)?;
    let u = householder_completion(e);
    let perp_cols: Vec<Vec<Complex64>> = (1..n).map(|j| u.column(j)).collect();
    let p1 = if perp_cols.is_empty() {
        Poly::from_real(&[1.0])
    } else {
        let v = ComplexMatrix::from_columns(&perp_cols);
        signed_char_poly(&a.compress_to_basis(&v).hermitian_part())?
    };
    Ok(SecularPair { p0, p1 })
}

/// det((I + γ(A−λI)^{−1}B)^♮), the truncation taken to Ran(B*); equals
/// det(A + γB − λI)/det(A − λI).
pub fn relative_determinant(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    gamma: Complex64,
    lambda: Complex64,
) -> Result<Complex64, HerglotzError> {
    let n = a.rows();
    assert!(a.is_square() && b.rows() == n && b.cols() == n, "A and B must be square and match");

    // Right singular vectors of B above the rank threshold span Ran(B*).
    let gram = b.adjoint().matmul(b);
    let sys = hermitian_eig(&gram)?;
    let sv_tol = 1e-12 * b.frobenius_norm();
    let mut cols = Vec::new();
    for i in 0..n {
        if sys.eigenvalues[i].max(0.0).sqrt() > sv_tol {
            cols.push(sys.eigenvector(i));
        }
    }
    if cols.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let w = ComplexMatrix::from_columns(&cols);
    let m = cols.len();

    let shifted = a.add_scalar_diag(-lambda);
    let lu = shifted.lu()?;
    let (lo, hi) = lu.pivot_extremes();
    if lu.is_singular() || lo <= 1e-14 * hi {
        return Err(HerglotzError::SpectrumCollision { lambda });
    }
    let bw = b.matmul(&w);
    let z = lu.solve_mat(&bw)?;
    let t = ComplexMatrix::identity(m).add(&w.adjoint().matmul(&z).scale(gamma));
    Ok(t.det())
}

/// γ(λ) = −1/m(λ) for scalar m and λ in the open upper half plane.
pub fn gamma_of_lambda(
    mu: &HerglotzFunction,
    lambda: Complex64,
) -> Result<Complex64, HerglotzError> {
    assert!(lambda.im > 0.0, "γ(λ) is defined on the open upper half plane");
    let m = mu.eval_scalar(lambda)?;
    if m.norm() == 0.0 {
        return Err(HerglotzError::ZeroDenominator);
    }
    Ok(-m.inv())
}

/// (γ(λ), γ′(λ)); γ′ = m′/m² is nonvanishing wherever m′ is.
pub fn gamma_of_lambda_with_derivative(
    mu: &HerglotzFunction,
    lambda: Complex64,
) -> Result<(Complex64, Complex64), HerglotzError> {
    assert!(lambda.im > 0.0, "γ(λ) is defined on the open upper half plane");
    let (m, dm) = mu.eval_scalar_with_derivative(lambda)?;
    if m.norm() == 0.0 {
        return Err(HerglotzError::ZeroDenominator);
    }
    Ok((-m.inv(), dm / (m * m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cdot;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn uniform_unit(n: usize) -> Vec<Complex64> {
        vec![c(1.0 / (n as f64).sqrt(), 0.0); n]
    }

    fn rank_one_from(e: &[Complex64]) -> ComplexMatrix {
        let n = e.len();
        ComplexMatrix::from_fn(n, n, |i, j| e[i] * e[j].conj())
    }

    #[test]
    fn uniform_rank_one_measure_has_equal_atoms() {
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let e = uniform_unit(5);
        let b = rank_one_from(&e);
        let sys = hermitian_eig(&a).unwrap();
        let q = build_measure(&sys, &b).unwrap();
        assert_eq!(q.dimension, 1);
        assert_eq!(q.atoms.len(), 5);
        for (i, (s, w)) in q.atoms.iter().enumerate() {
            assert!((s - (i as f64 + 1.0)).abs() < 1e-12);
            assert!((w[(0, 0)].re - 0.2).abs() < 1e-12);
        }
        let mass = q.total_mass();
        assert!((mass[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_perturbation_measure_reproduces_projections() {
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0, 2.0, 5.0]);
        let b = ComplexMatrix::identity(4);
        let sys = hermitian_eig(&a).unwrap();
        let q = build_measure(&sys, &b).unwrap();
        assert_eq!(q.dimension, 4);
        assert_eq!(q.atoms.len(), 3);
        let mass = q.total_mass();
        assert!(mass.sub(&ComplexMatrix::identity(4)).frobenius_norm() < 1e-10);
        // The middle atom carries the two-dimensional eigenspace.
        let traces: Vec<f64> = q.atoms.iter().map(|(_, w)| w.trace().re).collect();
        assert!((traces[0] - 1.0).abs() < 1e-10);
        assert!((traces[1] - 2.0).abs() < 1e-10);
        assert!((traces[2] - 1.0).abs() < 1e-10);
        assert!(q.psd_violation().unwrap() >= -1e-12);
    }

    fn trunc3_problem(m1: usize, m2: usize, l: f64) -> (ComplexMatrix, Vec<Complex64>) {
        let n = m1 + m2;
        let mut diag = Vec::with_capacity(n);
        for r in 0..m1 {
            diag.push(r as f64 / (m1 as f64 - 1.0));
        }
        for s in 0..m2 {
            diag.push(l + 1.0 + s as f64 / (m2 as f64 - 1.0));
        }
        let mut e = Vec::with_capacity(n);
        let w1 = 1.0 / (2.0 * m1 as f64).sqrt();
        let w2 = 1.0 / (2.0 * m2 as f64).sqrt();
        for i in 0..n {
            e.push(c(if i < m1 { w1 } else { w2 }, 0.0));
        }
        (ComplexMatrix::real_diagonal(&diag), e)
    }

    #[test]
    fn two_band_measure_splits_mass_evenly() {
        let (a, e) = trunc3_problem(5, 25, 4.0);
        let b = rank_one_from(&e);
        let sys = hermitian_eig(&a).unwrap();
        let q = build_measure(&sys, &b).unwrap();
        assert_eq!(q.atoms.len(), 30);
        assert!((q.mass_on(0.0, 1.0)[(0, 0)].re - 0.5).abs() < 1e-10);
        assert!((q.mass_on(5.0, 6.0)[(0, 0)].re - 0.5).abs() < 1e-10);
    }

    #[test]
    fn single_atom_evaluation() {
        let mu = HerglotzFunction::from_atoms(&[(0.0, 1.0)]).unwrap();
        let m = mu.eval_scalar(c(0.0, 1.0)).unwrap();
        assert!((m - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn scalar_m_matches_direct_resolvent() {
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let e = uniform_unit(5);
        let sys = hermitian_eig(&a).unwrap();
        let mu = HerglotzFunction::scalar(&sys, &e).unwrap();
        let lambda = c(3.0, 1.0);
        let m = mu.eval_scalar(lambda).unwrap();

        let shifted = a.add_scalar_diag(-lambda);
        let x = shifted.lu().unwrap().solve_vec(&e).unwrap();
        let direct = cdot(&e, &x);
        assert!((m - direct).norm() < 1e-12);
    }

    #[test]
    fn pole_proximity_detected() {
        let mu = HerglotzFunction::from_atoms(&[(2.0, 1.0)]).unwrap();
        assert!(matches!(
            mu.eval_scalar(c(2.0, 0.0)),
            Err(HerglotzError::PoleProximity { .. })
        ));
    }

    #[test]
    fn secular_pair_two_by_two_closed_form() {
        let alpha = 3.0f64.sqrt() / 2.0;
        let beta = 0.5;
        let a = ComplexMatrix::real_diagonal(&[1.0, -1.0]);
        let e = vec![c(alpha, 0.0), c(beta, 0.0)];
        let pair = secular_pair(&a, &e).unwrap();

        // p₀ = λ² − 1, p₁ = −λ − 1/2.
        assert!((pair.p0.eval(c(0.0, 0.0)) - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((pair.p0.eval(c(2.0, 0.0)) - c(3.0, 0.0)).norm() < 1e-12);
        assert!((pair.p1.eval(c(0.0, 0.0)) - c(-0.5, 0.0)).norm() < 1e-12);
        assert!((pair.p1.eval(c(1.0, 0.0)) - c(-1.5, 0.0)).norm() < 1e-12);

        // Roots of p(γ,·) against the closed form for a few couplings.
        for &gamma in &[c(0.3, 0.9), c(-1.0, 1.7), c(0.0, 2.0)] {
            let disc = (gamma * gamma / 4.0 + 1.0 - gamma * (beta * beta - alpha * alpha)).sqrt();
            let plus = gamma / 2.0 + disc;
            let minus = gamma / 2.0 - disc;
            let mut roots = pair.lambda_roots(gamma).unwrap();
            roots.sort_by(|x, y| x.re.total_cmp(&y.re));
            let mut expect = vec![plus, minus];
            expect.sort_by(|x, y| x.re.total_cmp(&y.re));
            for (r, x) in roots.iter().zip(&expect) {
                assert!((r - x).norm() < 1e-10, "γ={gamma}: {r} vs {x}");
            }
        }
    }

    #[test]
    fn first_basis_vector_deletes_first_entry() {
        let a = ComplexMatrix::real_diagonal(&[7.0, 1.0, 4.0]);
        let mut e = vec![c(0.0, 0.0); 3];
        e[0] = c(1.0, 0.0);
        let pair = secular_pair(&a, &e).unwrap();
        // p₁ = det(diag(1,4) − λ) = (1−λ)(4−λ).
        for &x in &[0.0, 2.0, 6.0] {
            let expect = (1.0 - x) * (4.0 - x);
            assert!((pair.p1.eval(c(x, 0.0)) - c(expect, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn five_point_secular_roots_match_published_values() {
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let e = uniform_unit(5);
        let pair = secular_pair(&a, &e).unwrap();
        let mut roots: Vec<f64> = crate::linalg::poly_roots(&pair.p1.coeffs)
            .unwrap()
            .iter()
            .map(|z| z.re)
            .collect();
        roots.sort_by(f64::total_cmp);
        let expected = [1.35556, 2.45608, 3.54390, 4.64442];
        for (r, x) in roots.iter().zip(&expected) {
            assert!((r - x).abs() < 5e-5, "root {r} vs {x}");
        }
        assert!(pair.interlacing_ok().unwrap());
    }

    #[test]
    fn relative_determinant_identities() {
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let e = uniform_unit(5);
        let b = rank_one_from(&e);
        let lambda = c(2.4, 0.9);

        // γ = 0 gives exactly 1.
        let one = relative_determinant(&a, &b, c(0.0, 0.0), lambda).unwrap();
        assert!((one - c(1.0, 0.0)).norm() < 1e-14);

        // Rank one reduces to 1 + γ·m(λ).
        let gamma = c(-0.7, 1.3);
        let sys = hermitian_eig(&a).unwrap();
        let mu = HerglotzFunction::scalar(&sys, &e).unwrap();
        let m = mu.eval_scalar(lambda).unwrap();
        let d = relative_determinant(&a, &b, gamma, lambda).unwrap();
        assert!((d - (c(1.0, 0.0) + gamma * m)).norm() < 1e-12);
    }

    #[test]
    fn relative_determinant_matches_determinant_ratio() {
        let e1 = [2.0, 2.0, 2.0, 2.0, 2.0];
        let e2 = [3.0, 3.0, -2.0, -2.0, -2.0];
        let b = ComplexMatrix::from_fn(5, 5, |i, j| c(e1[i] * e1[j] + e2[i] * e2[j], 0.0));
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        for &(gamma, lambda) in
            &[(c(0.4, 0.8), c(1.7, 0.6)), (c(-0.2, 0.5), c(-0.3, 1.1)), (c(0.0, 2.5), c(6.2, 0.4))]
        {
            let d = relative_determinant(&a, &b, gamma, lambda).unwrap();
            let num = a.add(&b.scale(gamma)).add_scalar_diag(-lambda).det();
            let den = a.add_scalar_diag(-lambda).det();
            let ratio = num / den;
            assert!((d - ratio).norm() <= 1e-8 * ratio.norm(), "{d} vs {ratio}");
        }
    }

    #[test]
    fn spectrum_collision_rejected() {
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0]);
        let b = ComplexMatrix::identity(2);
        assert!(matches!(
            relative_determinant(&a, &b, c(0.0, 1.0), c(2.0, 0.0)),
            Err(HerglotzError::SpectrumCollision { .. })
        ));
    }

    #[test]
    fn coupling_map_single_atom() {
        let mu = HerglotzFunction::from_atoms(&[(0.0, 1.0)]).unwrap();
        let gamma = gamma_of_lambda(&mu, c(0.0, 1.0)).unwrap();
        assert!((gamma - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn coupling_map_hits_published_critical_point() {
        let alpha = 3.0f64.sqrt() / 2.0;
        let beta = 0.5;
        let mu = HerglotzFunction::from_atoms(&[(1.0, alpha * alpha), (-1.0, beta * beta)])
            .unwrap();
        let lambda_c = c(-0.5, 3.0f64.sqrt() / 2.0);
        let gamma = gamma_of_lambda(&mu, lambda_c).unwrap();
        assert!((gamma - c(-1.0, 3.0f64.sqrt())).norm() < 1e-12, "γ = {gamma}");
    }

    #[test]
    fn coupling_map_asymptotics() {
        // Exact in dimension one: m = 1/(a−λ) gives γ = λ − a, so the
        // far-field expansion is γ(λ) = λ − ⟨Ae,e⟩ + O(1/|λ|), inverse to
        // the divergent branch λ(γ) = γ + ⟨Ae,e⟩ + O(1/|γ|).
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let e = uniform_unit(5);
        let sys = hermitian_eig(&a).unwrap();
        let mu = HerglotzFunction::scalar(&sys, &e).unwrap();
        let lambda = c(3.0, 100.0);
        let gamma = gamma_of_lambda(&mu, lambda).unwrap();
        // ⟨Ae, e⟩ = mean of 1..5 = 3.
        assert!((gamma - lambda + c(3.0, 0.0)).norm() < 1e-1, "γ = {gamma}");

        // Inverse reading: the divergent eigenvalue of A + γ·ee* sits near
        // γ + ⟨Ae,e⟩ for large γ.
        let b = rank_one_from(&e);
        let big = c(0.0, 100.0);
        let eigs = general_eig(&a.add(&b.scale(big)), false).unwrap().eigenvalues;
        let farthest = eigs.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap();
        assert!((farthest - big - c(3.0, 0.0)).norm() < 1e-1, "λ(γ) = {farthest}");
    }

    #[test]
    fn coupling_count_bounded_by_rank() {
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let e1 = [2.0, 2.0, 2.0, 2.0, 2.0];
        let e2 = [3.0, 3.0, -2.0, -2.0, -2.0];
        let b = ComplexMatrix::from_fn(5, 5, |i, j| c(e1[i] * e1[j] + e2[i] * e2[j], 0.0));
        let sys = hermitian_eig(&a).unwrap();
        let q = build_measure(&sys, &b).unwrap();
        let mu = HerglotzFunction::Matrix(q);
        let gammas = couplings_at(&mu, c(2.2, 1.4)).unwrap();
        assert!(!gammas.is_empty() && gammas.len() <= 2);
        for g in &gammas {
            assert!(g.im > 0.0, "coupling {g} left the upper half plane");
        }
    }

    #[test]
    fn householder_completion_is_unitary_with_first_column_e() {
        let e = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let u = householder_completion(&e);
        let gram = u.adjoint().matmul(&u);
        assert!(gram.sub(&ComplexMatrix::identity(2)).frobenius_norm() < 1e-12);
        for i in 0..2 {
            assert!((u[(i, 0)] - e[i]).norm() < 1e-12);
        }
    }
}
