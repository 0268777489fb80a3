//! N → ∞ behaviour of the canonical families A_N = diag(n/N) with rank-one
//! perturbation e_N e_N^*, where |e_{N,n}|² ∝ f(n/N) for a density f on [0,1].
//!
//! The scalar transforms m_N(λ) = (1/N) Σ f(n/N)/(n/N − λ) converge to the
//! Cauchy transform m_∞(λ) = ∫₀¹ f(s)/(s − λ) ds with a Riemann-sum error
//! bound ‖k′‖_∞/(2N). The top imaginary part μ_N(γ) = max Im σ(A + γB)
//! collapses as N → ∞ exactly when −1/γ escapes the range of m_∞; for f ≡ 1
//! that range is the strip {0 < Im z < π} and the escaping couplings form
//! the disc |γ − i/(2π)| ≤ 1/(2π).

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{general_eig, ComplexMatrix, LinalgError};
use crate::problem::{PerturbationProblem, ProblemError};

#[derive(Debug, Error)]
pub enum LimitsError {
    #[error("coupling {gamma} lies outside the open upper half-plane")]
    OutOfSector { gamma: Complex64 },
    #[error("quadrature did not converge: {detail}")]
    QuadratureFailure { detail: String },
    #[error("no derivative bound available: {detail}")]
    UnboundedDerivative { detail: String },
    #[error("invalid density: {detail}")]
    InvalidDensity { detail: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Density profile f = g² of the coupling vector over [0,1].
#[derive(Debug, Clone)]
pub enum Density {
    /// f ≡ 1.
    Uniform,
    /// f(s) = s.
    LinearRamp,
    /// Samples of f at j/(m−1), j = 0..m−1, joined by linear interpolation.
    Sampled(Vec<f64>),
}

/// A density together with the derived quantities the limit theory uses.
#[derive(Debug, Clone)]
pub struct LimitModel {
    pub density: Density,
    pub sup_norm: f64,
    /// ∫₀¹ f; the coupling vectors are normalized, so mass ≠ 1 only scales e_N.
    pub mass: f64,
    /// ∫₀¹ f(s)/s ds = ∞, i.e. f does not vanish at the left endpoint.
    pub diverges_at_zero: bool,
    /// ∫₀¹ f(s)/(1−s) ds = ∞.
    pub diverges_at_one: bool,
}

impl LimitModel {
    pub fn uniform() -> Self {
        Self {
            density: Density::Uniform,
            sup_norm: 1.0,
            mass: 1.0,
            diverges_at_zero: true,
            diverges_at_one: true,
        }
    }

    pub fn linear_ramp() -> Self {
        Self {
            density: Density::LinearRamp,
            sup_norm: 1.0,
            mass: 0.5,
            diverges_at_zero: false,
            diverges_at_one: true,
        }
    }

    pub fn sampled(values: Vec<f64>) -> Result<Self, LimitsError> {
        if values.len() < 2 {
            return Err(LimitsError::InvalidDensity {
                detail: format!("{} samples, need at least 2", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(LimitsError::InvalidDensity {
                detail: "samples must be finite and nonnegative".into(),
            });
        }
        let sup_norm = values.iter().cloned().fold(0.0, f64::max);
        if sup_norm == 0.0 {
            return Err(LimitsError::InvalidDensity { detail: "density vanishes identically".into() });
        }
        let h = 1.0 / (values.len() - 1) as f64;
        let mass = h
            * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[values.len() - 1]));
        Ok(Self {
            diverges_at_zero: values[0] > 0.0,
            diverges_at_one: values[values.len() - 1] > 0.0,
            density: Density::Sampled(values),
            sup_norm,
            mass,
        })
    }

    pub fn density_at(&self, s: f64) -> f64 {
        match &self.density {
            Density::Uniform => 1.0,
            Density::LinearRamp => s,
            Density::Sampled(v) => {
                let m = v.len() - 1;
                let u = (s.clamp(0.0, 1.0) * m as f64).clamp(0.0, m as f64);
                let j = (u.floor() as usize).min(m - 1);
                let t = u - j as f64;
                v[j] * (1.0 - t) + v[j + 1] * t
            }
        }
    }

    /// m_∞(λ) = ∫₀¹ f(s)/(s − λ) ds for λ ∈ C₊, by closed form (the sampled
    /// case integrates each linear segment exactly).
    pub fn m_infty(&self, lambda: Complex64) -> Complex64 {
        assert!(lambda.im > 0.0, "m_∞ is defined on the open upper half-plane");
        // Both λ − 1 and λ stay in C₊, so the principal logs never cross a cut.
        let log_ratio = (lambda - 1.0).ln() - lambda.ln();
        match &self.density {
            Density::Uniform => log_ratio,
            Density::LinearRamp => Complex64::new(1.0, 0.0) + lambda * log_ratio,
            Density::Sampled(v) => {
                let m = v.len() - 1;
                let h = 1.0 / m as f64;
                let mut sum = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
                    let slope = (v[j + 1] - v[j]) / h;
                    let intercept = v[j] - slope * a;
                    // ∫ₐᵇ (αs+β)/(s−λ) ds = α(b−a) + (αλ+β)(Log(b−λ) − Log(a−λ)),
                    // safe on the principal branch since Im(s−λ) ≡ −Im λ < 0.
                    let log_step = (Complex64::new(b, 0.0) - lambda).ln()
                        - (Complex64::new(a, 0.0) - lambda).ln();
                    sum += slope * (b - a) + (slope * lambda + intercept) * log_step;
                }
                sum
            }
        }
    }

    /// Independent evaluation of m_∞ by adaptive quadrature; the closed forms
    /// are checked against this path rather than the other way around.
    pub fn m_infty_quadrature(&self, lambda: Complex64) -> Result<Complex64, LimitsError> {
        assert!(lambda.im > 0.0, "m_∞ is defined on the open upper half-plane");
        let k = |s: f64| Complex64::new(self.density_at(s), 0.0) / (Complex64::new(s, 0.0) - lambda);
        if lambda.im >= 0.05 {
            return adaptive_simpson(&k, 0.0, 1.0, 1e-11, 30);
        }
        // Peaked integrand: split at the foot of the pole and let the
        // double-exponential rule absorb the near-singular endpoints.
        let x0 = lambda.re.clamp(0.0, 1.0);
        let mut total = Complex64::new(0.0, 0.0);
        if x0 > 0.0 {
            total += tanh_sinh(&k, 0.0, x0)?;
        }
        if x0 < 1.0 {
            total += tanh_sinh(&k, x0, 1.0)?;
        }
        Ok(total)
    }

    /// Right-endpoint Riemann sum m_N(λ) = (1/N) Σ_{n=1}^{N} f(n/N)/(n/N − λ).
    pub fn m_n(&self, n: usize, lambda: Complex64) -> Complex64 {
        assert!(n >= 1);
        let mut sum = Complex64::new(0.0, 0.0);
        for r in 1..=n {
            let s = r as f64 / n as f64;
            sum += Complex64::new(self.density_at(s) / n as f64, 0.0)
                / (Complex64::new(s, 0.0) - lambda);
        }
        sum
    }

    /// Unit coupling vector with |e_r|² ∝ f(r/N).
    pub fn coupling_vector(&self, n: usize) -> Result<Vec<f64>, LimitsError> {
        assert!(n >= 1);
        let mut e: Vec<f64> = (1..=n).map(|r| self.density_at(r as f64 / n as f64).sqrt()).collect();
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(LimitsError::InvalidDensity {
                detail: format!("density vanishes at every grid point n/{n}"),
            });
        }
        for x in &mut e {
            *x /= norm;
        }
        Ok(e)
    }
}

/// Full problem for the canonical N-point family, hypothesis report included.
pub fn canonical_problem(model: &LimitModel, n: usize) -> Result<PerturbationProblem, LimitsError> {
    let e = model.coupling_vector(n)?;
    let diag: Vec<f64> = (1..=n).map(|r| r as f64 / n as f64).collect();
    let a = ComplexMatrix::real_diagonal(&diag);
    let b = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(e[i] * e[j], 0.0));
    Ok(PerturbationProblem::new(a, b)?)
}

/// μ_N(γ) = max Im σ(A + γB).
pub fn mu_n(problem: &PerturbationProblem, gamma: Complex64) -> Result<f64, LimitsError> {
    if gamma.im <= 0.0 {
        return Err(LimitsError::OutOfSector { gamma });
    }
    let eig = general_eig(&problem.a_gamma(gamma), false)?;
    Ok(eig.eigenvalues.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max))
}

/// μ_N for the canonical family, skipping the hypothesis machinery.
pub fn canonical_mu_n(model: &LimitModel, n: usize, gamma: Complex64) -> Result<f64, LimitsError> {
    if gamma.im <= 0.0 {
        return Err(LimitsError::OutOfSector { gamma });
    }
    let e = model.coupling_vector(n)?;
    let a_gamma = ComplexMatrix::from_fn(n, n, |i, j| {
        let mut z = gamma * (e[i] * e[j]);
        if i == j {
            z += (i + 1) as f64 / n as f64;
        }
        z
    });
    let eig = general_eig(&a_gamma, false)?;
    Ok(eig.eigenvalues.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max))
}

/// Riemann-sum bound |m_N − m_∞| ≤ ‖k′‖_∞/(2N) for k(s) = f(s)/(s−λ);
/// available only where ‖k′‖_∞ has a closed form.
pub fn convergence_error(model: &LimitModel, n: usize, lambda: Complex64) -> Result<f64, LimitsError> {
    assert!(n >= 1);
    assert!(lambda.im > 0.0, "the bound is stated for λ in the open upper half-plane");
    let d = dist_to_unit_interval(lambda);
    let sup_k_prime = match model.density {
        Density::Uniform => 1.0 / (d * d),
        // k′(s) = −λ/(s−λ)², so the sup is |λ|/dist².
        Density::LinearRamp => lambda.norm() / (d * d),
        Density::Sampled(_) => {
            return Err(LimitsError::UnboundedDerivative {
                detail: "sampled densities carry no closed-form derivative bound".into(),
            })
        }
    };
    Ok(sup_k_prime / (2.0 * n as f64))
}

fn dist_to_unit_interval(lambda: Complex64) -> f64 {
    let dx = lambda.re - lambda.re.clamp(0.0, 1.0);
    (dx * dx + lambda.im * lambda.im).sqrt()
}

/// Couplings γ ∈ C₊ with −1/γ outside the range of m_∞ over a sector
/// truncation S_{ε,r} = {Im λ ≥ ε, |λ| ≤ r}, classified by the winding of
/// the image curve σ = m_∞ ∘ ∂S_{ε,r}. Carries the analytic disc
/// |γ − i/(2π‖f‖_∞)| ≤ 1/(2π‖f‖_∞) that the region always contains.
#[derive(Debug, Clone)]
pub struct ForbiddenRegion {
    pub disc_center: Complex64,
    pub disc_radius: f64,
    /// m_∞ along ∂S_{ε,r}, counterclockwise, as a closed polygon.
    pub sigma: Vec<Complex64>,
    /// −1/σ, the same curve mapped to the coupling plane.
    pub gamma_curve: Vec<Complex64>,
    pub epsilon: f64,
    pub radius: f64,
    /// Truncating ∂S at |λ| = r leaves the winding test blind where
    /// |−1/γ| exceeds the sampled curve; below this |γ| the classification
    /// is unreliable and callers should mask it out.
    pub artifact_radius: f64,
}

pub fn forbidden_region(
    model: &LimitModel,
    epsilon: f64,
    radius: f64,
) -> Result<ForbiddenRegion, LimitsError> {
    assert!(epsilon > 0.0 && epsilon <= 1e-2, "sector floor ε must lie in (0, 1e-2]");
    assert!(radius >= 10.0, "sector radius must be at least 10");
    let chord_half = (radius * radius - epsilon * epsilon).sqrt();

    // Chord nodes Im λ = ε, geometrically clustered at s = 0 and s = 1 where
    // a non-vanishing density makes m_∞ blow up logarithmically.
    let mut xs: Vec<f64> = Vec::new();
    let base = 2048;
    for k in 0..=base {
        xs.push(-chord_half + 2.0 * chord_half * k as f64 / base as f64);
    }
    let decades = 160;
    let lo_exp = epsilon.log10();
    for k in 0..=decades {
        let t = 10f64.powf(lo_exp + (-0.3 - lo_exp) * k as f64 / decades as f64);
        for x in [t, -t, 1.0 + t, 1.0 - t] {
            if x.abs() <= chord_half {
                xs.push(x);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let mut nodes: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, epsilon)).collect();
    let theta0 = (epsilon / radius).asin();
    let arc = 1024;
    for k in 1..arc {
        let theta = theta0 + (std::f64::consts::PI - 2.0 * theta0) * k as f64 / arc as f64;
        nodes.push(Complex64::from_polar(radius, theta));
    }

    let sigma: Vec<Complex64> = nodes.iter().map(|&z| model.m_infty(z)).collect();
    let gamma_curve: Vec<Complex64> = sigma.iter().map(|&z| -z.inv()).collect();
    let max_abs = sigma.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let disc_radius = 1.0 / (2.0 * std::f64::consts::PI * model.sup_norm);
    Ok(ForbiddenRegion {
        disc_center: Complex64::new(0.0, disc_radius),
        disc_radius,
        sigma,
        gamma_curve,
        epsilon,
        radius,
        artifact_radius: 2.0 / max_abs,
    })
}

impl ForbiddenRegion {
    /// Membership of z in the sampled range of m_∞, by winding number.
    pub fn z_in_range(&self, z: Complex64) -> bool {
        if z.im <= 0.0 {
            return false;
        }
        let mut prev = self.sigma[self.sigma.len() - 1] - z;
        let mut total = 0.0;
        for &s in &self.sigma {
            let cur = s - z;
            if cur.norm() == 0.0 {
                return true;
            }
            let cross = prev.re * cur.im - prev.im * cur.re;
            let dot = prev.re * cur.re + prev.im * cur.im;
            total += cross.atan2(dot);
            prev = cur;
        }
        total.abs() > std::f64::consts::PI
    }

    /// True when the equation −1/γ = m_∞(λ) has no solution in the sector,
    /// so the top imaginary part collapses along the family.
    pub fn gamma_insoluble(&self, gamma: Complex64) -> bool {
        gamma.im > 0.0 && !self.z_in_range(-gamma.inv())
    }

    pub fn classify_grid(
        &self,
        lo: Complex64,
        hi: Complex64,
        nx: usize,
        ny: usize,
    ) -> ForbiddenGrid {
        assert!(nx >= 2 && ny >= 2);
        let mut points = Vec::with_capacity(nx * ny);
        let mut insoluble = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let im = lo.im + (hi.im - lo.im) * j as f64 / (ny - 1) as f64;
            for i in 0..nx {
                let re = lo.re + (hi.re - lo.re) * i as f64 / (nx - 1) as f64;
                let g = Complex64::new(re, im);
                points.push(g);
                insoluble.push(self.gamma_insoluble(g));
            }
        }
        ForbiddenGrid { nx, ny, points, insoluble }
    }
}

/// Row-major classification grid over a coupling-plane box.
#[derive(Debug, Clone)]
pub struct ForbiddenGrid {
    pub nx: usize,
    pub ny: usize,
    pub points: Vec<Complex64>,
    pub insoluble: Vec<bool>,
}

impl ForbiddenGrid {
    pub fn flag(&self, i: usize, j: usize) -> bool {
        self.insoluble[j * self.nx + i]
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        self.points[j * self.nx + i]
    }

    /// Insoluble points with at least one soluble 4-neighbour: the empirical
    /// boundary of the forbidden set at grid resolution.
    pub fn boundary_points(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                if !self.flag(i, j) {
                    continue;
                }
                let mut edge = false;
                if i > 0 && !self.flag(i - 1, j) {
                    edge = true;
                }
                if i + 1 < self.nx && !self.flag(i + 1, j) {
                    edge = true;
                }
                if j > 0 && !self.flag(i, j - 1) {
                    edge = true;
                }
                if j + 1 < self.ny && !self.flag(i, j + 1) {
                    edge = true;
                }
                if edge {
                    out.push(self.point(i, j));
                }
            }
        }
        out
    }
}

fn adaptive_simpson(
    k: &impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
) -> Result<Complex64, LimitsError> {
    fn simpson(k: &impl Fn(f64) -> Complex64, a: f64, fa: Complex64, b: f64, fb: Complex64) -> (Complex64, Complex64) {
        let m = 0.5 * (a + b);
        let fm = k(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    fn recurse(
        k: &impl Fn(f64) -> Complex64,
        a: f64,
        fa: Complex64,
        b: f64,
        fb: Complex64,
        whole: Complex64,
        fm: Complex64,
        tol: f64,
        depth: usize,
    ) -> Result<Complex64, LimitsError> {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(k, a, fa, m, fm);
        let (right, frm) = simpson(k, m, fm, b, fb);
        let delta = left + right - whole;
        if !delta.is_finite() {
            return Err(LimitsError::QuadratureFailure {
                detail: format!("non-finite integrand near [{a:.3e}, {b:.3e}]"),
            });
        }
        if delta.norm() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(LimitsError::QuadratureFailure {
                detail: format!("refinement depth exhausted on [{a:.6e}, {b:.6e}]"),
            });
        }
        Ok(recurse(k, a, fa, m, fm, left, flm, 0.5 * tol, depth - 1)?
            + recurse(k, m, fm, b, fb, right, frm, 0.5 * tol, depth - 1)?)
    }
    let (fa, fb) = (k(a), k(b));
    let (whole, fm) = simpson(k, a, fa, b, fb);
    recurse(k, a, fa, b, fb, whole, fm, tol, depth)
}

/// Double-exponential rule on (a, b); tolerates integrable endpoint blow-up.
fn tanh_sinh(k: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Result<Complex64, LimitsError> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let t_max = 4.0;
    let phi = |t: f64| {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        (mid + half * u.tanh(), half * std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2))
    };
    let eval = |t: f64| {
        let (x, w) = phi(t);
        if x <= a || x >= b {
            Complex64::new(0.0, 0.0)
        } else {
            w * k(x)
        }
    };

    let mut h = 1.0;
    let mut n_half = 4usize;
    let mut total = eval(0.0);
    for j in 1..=n_half {
        total += eval(h * j as f64) + eval(-(h * j as f64));
    }
    let mut estimate = total * h;
    for level in 1..=11 {
        h *= 0.5;
        n_half = (t_max / h).ceil() as usize;
        // Midpoints of the previous grid; the old nodes are reused.
        let mut refined = total;
        for j in (1..=n_half).step_by(2) {
            refined += eval(h * j as f64) + eval(-(h * j as f64));
        }
        total = refined;
        let next = total * h;
        let delta = (next - estimate).norm();
        if !next.is_finite() {
            return Err(LimitsError::QuadratureFailure {
                detail: format!("non-finite double-exponential sum on [{a:.3e}, {b:.3e}]"),
            });
        }
        if level >= 3 && delta <= 1e-11 * (1.0 + next.norm()) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(LimitsError::QuadratureFailure {
        detail: format!("double-exponential levels exhausted on [{a:.6e}, {b:.6e}]"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn uniform_transform_matches_closed_form_and_quadrature() {
        let model = LimitModel::uniform();
        let m = model.m_infty(c(0.0, 1.0));
        let expected = c(0.5 * 2f64.ln(), PI / 4.0);
        assert!((m - expected).norm() < 1e-13);
        let q = model.m_infty_quadrature(c(0.0, 1.0)).unwrap();
        assert!((m - q).norm() < 1e-9);
        // Peaked case exercises the split double-exponential path.
        let lam = c(0.37, 1e-4);
        let q = model.m_infty_quadrature(lam).unwrap();
        assert!((model.m_infty(lam) - q).norm() < 1e-8);
    }

    #[test]
    fn linear_ramp_transform_matches_log_form() {
        let model = LimitModel::linear_ramp();
        let m = model.m_infty(c(0.0, 1.0));
        // 1 + i·Log(1+i), since (λ−1)/λ = 1 + i at λ = i.
        let expected = c(1.0, 0.0) + c(0.0, 1.0) * c(1.0, 1.0).ln();
        assert!((m - expected).norm() < 1e-13);
        let lam = c(0.3, 0.7);
        let q = model.m_infty_quadrature(lam).unwrap();
        assert!((model.m_infty(lam) - q).norm() < 1e-9);
    }

    #[test]
    fn sampled_density_segment_integrals_match_quadrature() {
        let values: Vec<f64> = (0..41)
            .map(|j| {
                let s = j as f64 / 40.0;
                4.0 * s * (1.0 - s)
            })
            .collect();
        let model = LimitModel::sampled(values).unwrap();
        assert!((model.mass - 2.0 / 3.0).abs() < 1e-3);
        assert!(!model.diverges_at_zero && !model.diverges_at_one);
        for lam in [c(0.5, 0.8), c(-0.2, 0.3), c(1.1, 1.5)] {
            let exact = model.m_infty(lam);
            let q = model.m_infty_quadrature(lam).unwrap();
            assert!((exact - q).norm() < 1e-9, "λ = {lam}: {exact} vs {q}");
        }
    }

    #[test]
    fn riemann_sum_error_sits_under_the_stated_bound() {
        let model = LimitModel::uniform();
        let lam = c(0.5, 1.0);
        let bound = convergence_error(&model, 100, lam).unwrap();
        assert!((bound - 0.005).abs() < 1e-15);
        for n in [50, 100, 200, 400] {
            let err = (model.m_n(n, lam) - model.m_infty(lam)).norm();
            let b = convergence_error(&model, n, lam).unwrap();
            assert!(err <= b, "N = {n}: error {err:.3e} over bound {b:.3e}");
        }
        // Halving in N, quadratic growth as the pole approaches the interval.
        let b100 = convergence_error(&model, 100, lam).unwrap();
        let b200 = convergence_error(&model, 200, lam).unwrap();
        assert!((b100 / b200 - 2.0).abs() < 1e-12);
        let near = convergence_error(&model, 100, c(0.5, 0.5)).unwrap();
        assert!((near / b100 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_density_has_no_derivative_bound() {
        let model = LimitModel::sampled(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            convergence_error(&model, 10, c(0.5, 1.0)),
            Err(LimitsError::UnboundedDerivative { .. })
        ));
    }

    #[test]
    fn single_point_family_has_mu_equal_im_gamma() {
        let model = LimitModel::uniform();
        let gamma = c(0.3, 0.7);
        let mu = canonical_mu_n(&model, 1, gamma).unwrap();
        assert!((mu - 0.7).abs() < 1e-14);
    }

    #[test]
    fn mu_n_decays_inside_the_forbidden_disc() {
        let model = LimitModel::uniform();
        let gamma = c(0.0, 1.0 / (2.0 * PI));
        let mut prev = f64::INFINITY;
        for n in [25, 50, 100, 200] {
            let mu = canonical_mu_n(&model, n, gamma).unwrap();
            assert!(mu < prev, "μ_{n} = {mu} did not decrease");
            assert!(mu >= gamma.im / n as f64 - 1e-12);
            prev = mu;
        }
        assert!(prev < 0.02, "μ_200 = {prev} has not collapsed");
    }

    #[test]
    fn mu_n_converges_to_the_limit_root_outside_the_disc() {
        let model = LimitModel::uniform();
        let gamma = c(0.0, 2.0);
        // m_∞(λ) = −1/γ = i/2 at λ* = 1/(1 − e^{i/2}).
        let lam_star = (c(1.0, 0.0) - c(0.0, 0.5).exp()).inv();
        assert!((model.m_infty(lam_star) - c(0.0, 0.5)).norm() < 1e-12);
        let mu100 = canonical_mu_n(&model, 100, gamma).unwrap();
        let mu400 = canonical_mu_n(&model, 400, gamma).unwrap();
        assert!((mu400 - lam_star.im).abs() < (mu100 - lam_star.im).abs());
        assert!((mu400 - lam_star.im).abs() < 0.01, "μ_400 = {mu400} vs {}", lam_star.im);
    }

    #[test]
    fn lower_half_plane_couplings_are_rejected() {
        let model = LimitModel::uniform();
        assert!(matches!(
            canonical_mu_n(&model, 5, c(1.0, -0.2)),
            Err(LimitsError::OutOfSector { .. })
        ));
        let problem = canonical_problem(&model, 4).unwrap();
        assert!(matches!(mu_n(&problem, c(0.5, 0.0)), Err(LimitsError::OutOfSector { .. })));
    }

    #[test]
    fn canonical_problem_satisfies_all_hypotheses() {
        let problem = canonical_problem(&LimitModel::linear_ramp(), 12).unwrap();
        assert!(problem.hypotheses.all_pass());
        assert_eq!(problem.rank(), 1);
    }

    #[test]
    fn uniform_forbidden_set_agrees_with_the_analytic_disc() {
        let model = LimitModel::uniform();
        let region = forbidden_region(&model, 1e-8, 50.0).unwrap();
        assert!((region.disc_center - c(0.0, 1.0 / (2.0 * PI))).norm() < 1e-15);
        assert!(region.artifact_radius < region.disc_radius);

        let mut tested = 0;
        for k in 0..96 {
            let phi = 2.0 * PI * k as f64 / 96.0;
            let dir = Complex64::from_polar(1.0, phi);
            let inside = region.disc_center + dir * (0.85 * region.disc_radius);
            let outside = region.disc_center + dir * (1.15 * region.disc_radius);
            if inside.norm() > 1.05 * region.artifact_radius && inside.im > 0.0 {
                assert!(region.gamma_insoluble(inside), "missed interior point {inside}");
                tested += 1;
            }
            if outside.norm() > 1.05 * region.artifact_radius && outside.im > 0.0 {
                assert!(!region.gamma_insoluble(outside), "false positive at {outside}");
            }
        }
        assert!(tested > 40, "artifact mask left only {tested} interior samples");
        assert!(region.gamma_insoluble(region.disc_center));
        assert!(!region.gamma_insoluble(c(0.0, 2.0)));
        // Range of m_∞ for f ≡ 1 is the strip 0 < Im z < π.
        assert!(region.z_in_range(c(0.5, PI / 2.0)));
        assert!(!region.z_in_range(c(0.5, 1.1 * PI)));
        assert!(!region.z_in_range(c(0.5, -0.3)));
    }

    #[test]
    fn disc_scales_with_the_sup_norm() {
        let model = LimitModel::sampled(vec![2.0; 8]).unwrap();
        let region = forbidden_region(&model, 1e-6, 20.0).unwrap();
        assert!((region.disc_radius - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((region.disc_center - c(0.0, 1.0 / (4.0 * PI))).norm() < 1e-15);
    }

    #[test]
    fn linear_ramp_gamma_curve_spans_minus_one_to_zero() {
        let model = LimitModel::linear_ramp();
        let region = forbidden_region(&model, 1e-8, 50.0).unwrap();
        // m_∞ → 1 as λ → 0 (the ramp kills the left-endpoint divergence),
        // so the coupling curve reaches −1; near λ = 1 it dives toward 0.
        let to_minus_one = region
            .gamma_curve
            .iter()
            .map(|g| (g - c(-1.0, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(to_minus_one < 0.05, "curve misses −1 by {to_minus_one}");
        let to_zero = region.gamma_curve.iter().map(|g| g.norm()).fold(f64::INFINITY, f64::min);
        assert!(to_zero < 0.08, "curve stops {to_zero} short of 0");
    }

    #[test]
    fn classification_grid_reports_a_boundary_ring() {
        let model = LimitModel::uniform();
        let region = forbidden_region(&model, 1e-6, 20.0).unwrap();
        let grid = region.classify_grid(c(-0.3, 1e-3), c(0.3, 0.4), 61, 41);
        let boundary = grid.boundary_points();
        assert!(!boundary.is_empty());
        for g in &boundary {
            if g.norm() < region.artifact_radius {
                continue;
            }
            let d = ((g - region.disc_center).norm() - region.disc_radius).abs();
            assert!(d < 0.03, "boundary point {g} sits {d:.3} from the disc edge");
        }
    }

    #[test]
    fn quadrature_depth_exhaustion_is_reported() {
        let model = LimitModel::uniform();
        let err = model.m_infty_quadrature(c(0.5, 1e-280));
        assert!(matches!(err, Err(LimitsError::QuadratureFailure { .. })));
    }
}
