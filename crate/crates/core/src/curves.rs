//! Spectral curve continuation along rays γ = t·e^{iθ}: predictor from
//! implicit differentiation of the secular identity p(γ,λ) = 0, Newton
//! corrector, eigensolver audits, endpoint classification against the
//! β_r/δ_r targets, the monodromy permutation τ(θ), and bisection
//! bracketing of the exceptional angle set T where τ jumps.
//!
//! Permutation convention: targets 0..N−M−1 are the δ_r ascending, and
//! target N−M+k is the divergent slot of β_k (β ordered by ascending |β|
//! then ascending arg). For rank one this is the classical δ_N = ∞ slot.

use num_complex::Complex64;
use thiserror::Error;

use crate::herglotz::secular_pair;
use crate::linalg::{
    general_eig, pair_multisets, poly_from_roots, LinalgError, Poly, CHAR_POLY_CAP,
};
use crate::problem::PerturbationProblem;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("hypothesis violated: {detail}")]
    HypothesisViolated { detail: String },
    #[error("curves became indistinguishable at θ = {theta:.12}, t = {t:.6e}; θ is likely exceptional")]
    CollisionDetected { theta: f64, t: f64, partial: Box<SpectralCurveSet> },
    #[error("continuation exceeded {steps} steps at t = {t:.6e}")]
    MaxStepsExceeded { t: f64, steps: usize },
    #[error("audit at t = {t:.6e} disagreed with the eigensolver: defect {defect:.3e} > {tolerance:.3e}")]
    AuditFailed { t: f64, defect: f64, tolerance: f64 },
    #[error("endpoint assignment ambiguous: {detail}")]
    AmbiguousMatch { detail: String },
    #[error("secular polynomial failed its determinant cross-check: relative error {relative_error:.3e}")]
    SecularMismatch { relative_error: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Bivariate secular polynomial p(γ,λ) = det(A + γB − λI) stored as
/// λ-polynomials c_k with p = Σ_k γ^k c_k(λ); degree in γ is rank(B).
#[derive(Debug, Clone)]
pub struct SecularPolynomial {
    /// c_k, index k = power of γ.
    pub gamma_coeffs: Vec<Poly>,
    d_lambda: Vec<Poly>,
    d2_lambda: Vec<Poly>,
    /// |coefficients| of c_k for the running-error majorant.
    abs_coeffs: Vec<Vec<f64>>,
}

impl SecularPolynomial {
    /// Interpolate det(A + γB − λI) in γ at rank+1 circle nodes; falls
    /// back to the rank-one secular pair when N exceeds the
    /// characteristic-polynomial cap.
    pub fn build(problem: &PerturbationProblem) -> Result<Self, TraceError> {
        let n = problem.dimension();
        let m = problem.rank();
        let coeffs: Vec<Poly> = if n <= CHAR_POLY_CAP {
            let rho = (1.0 + problem.a.frobenius_norm()) / (1.0 + problem.b.frobenius_norm());
            let nodes = m + 1;
            let omega = Complex64::from_polar(1.0, std::f64::consts::TAU / nodes as f64);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let mut node_polys = Vec::with_capacity(nodes);
            for j in 0..nodes {
                let gamma_j = omega.powu(j as u32) * rho;
                // Expand from eigenvalues rather than the trace recurrence:
                // the recurrence carries an absolute noise floor set by the
                // largest coefficient of the node matrix, which buries the
                // small low-order coefficients once the node spectrum is
                // stretched; root products keep every coefficient accurate
                // in relative terms.
                let eig = general_eig(&problem.a_gamma(gamma_j), false)?;
                let monic = poly_from_roots(&eig.eigenvalues);
                node_polys.push(monic.scale(Complex64::new(sign, 0.0)));
            }
            (0..nodes)
                .map(|k| {
                    let mut acc = Poly::new(vec![Complex64::new(0.0, 0.0)]);
                    for (j, pj) in node_polys.iter().enumerate() {
                        let twiddle = omega.powu(((nodes - k % nodes) * j % nodes) as u32);
                        acc = acc.add(&pj.scale(twiddle));
                    }
                    let scaled =
                        acc.scale(Complex64::new(1.0 / (nodes as f64 * rho.powi(k as i32)), 0.0));
                    // deg_λ c_k = N−k exactly; the DFT leaves ~ε residue in
                    // the higher bins which |λ|^N would amplify, so drop it.
                    let keep = (n - k + 1).min(scaled.coeffs.len());
                    Poly::new(scaled.coeffs[..keep].to_vec())
                })
                .collect()
        } else if m == 1 {
            // Large N, rank one: p = p₀ + γ·α·p₁ with B = α·ee*.
            let e = problem.sectorial.range_basis.column(0);
            let alpha = crate::linalg::cdot(&e, &problem.b.matvec(&e));
            let pair = secular_pair(&problem.a, &e)
                .map_err(|err| TraceError::HypothesisViolated { detail: err.to_string() })?;
            vec![pair.p0, pair.p1.scale(alpha)]
        } else {
            return Err(TraceError::HypothesisViolated {
                detail: format!(
                    "rank-{m} tracing needs the characteristic polynomial, capped at N = {CHAR_POLY_CAP}; got N = {n}"
                ),
            });
        };

        let d_lambda: Vec<Poly> = coeffs.iter().map(Poly::derivative).collect();
        let d2_lambda: Vec<Poly> = d_lambda.iter().map(Poly::derivative).collect();
        let abs_coeffs: Vec<Vec<f64>> =
            coeffs.iter().map(|p| p.coeffs.iter().map(|c| c.norm()).collect()).collect();
        let sp = Self { gamma_coeffs: coeffs, d_lambda, d2_lambda, abs_coeffs };
        sp.cross_check(problem)?;
        Ok(sp)
    }

    /// Probe the interpolation against LU determinants at four points.
    fn cross_check(&self, problem: &PerturbationProblem) -> Result<(), TraceError> {
        let scale_l = 1.0 + problem.a.frobenius_norm();
        let rho = scale_l / (1.0 + problem.b.frobenius_norm());
        let probes = [
            (Complex64::new(0.31, 0.53), Complex64::new(-0.4, 0.9)),
            (Complex64::new(0.48, 0.64), Complex64::new(-0.17, 1.2)),
            (Complex64::new(0.65, 0.75), Complex64::new(0.06, 1.5)),
            // Deep inside the spectral scale, where low-order coefficient
            // noise would otherwise hide behind the dominant terms.
            (Complex64::new(0.21, 0.37), Complex64::new(0.02, 0.03)),
        ];
        for (gk, lk) in probes {
            let gamma = gk * rho;
            let lambda = lk * scale_l;
            let direct = problem.a_gamma(gamma).add_scalar_diag(-lambda).det();
            let interp = self.eval(gamma, lambda);
            let denom = direct.norm().max(interp.norm());
            if !denom.is_finite() {
                continue;
            }
            let rel = (direct - interp).norm() / denom.max(1e-300);
            if rel > 1e-8 {
                return Err(TraceError::SecularMismatch { relative_error: rel });
            }
        }
        Ok(())
    }

    pub fn degree_gamma(&self) -> usize {
        self.gamma_coeffs.len() - 1
    }

    pub fn eval(&self, gamma: Complex64, lambda: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ck in self.gamma_coeffs.iter().rev() {
            acc = acc * gamma + ck.eval(lambda);
        }
        acc
    }

    /// (p, ∂p/∂λ, ∂p/∂γ) in one pass.
    pub fn eval_all(&self, gamma: Complex64, lambda: Complex64) -> (Complex64, Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut pl = Complex64::new(0.0, 0.0);
        let mut pg = Complex64::new(0.0, 0.0);
        for k in (0..self.gamma_coeffs.len()).rev() {
            let c = self.gamma_coeffs[k].eval(lambda);
            p = p * gamma + c;
            pl = pl * gamma + self.d_lambda[k].eval(lambda);
            if k > 0 {
                pg = pg * gamma + c * k as f64;
            }
        }
        (p, pl, pg)
    }

    pub fn eval_d2(&self, gamma: Complex64, lambda: Complex64) -> (Complex64, Complex64) {
        let mut pll = Complex64::new(0.0, 0.0);
        let mut plg = Complex64::new(0.0, 0.0);
        for k in (0..self.gamma_coeffs.len()).rev() {
            pll = pll * gamma + self.d2_lambda[k].eval(lambda);
            if k > 0 {
                plg = plg * gamma + self.d_lambda[k].eval(lambda) * k as f64;
            }
        }
        (pll, plg)
    }

    /// Σ_k |γ|^k Σ_i |c_{k,i}| |λ|^i, the natural floating-point scale of
    /// an evaluation; residuals are judged relative to this.
    pub fn scale_majorant(&self, gamma: Complex64, lambda: Complex64) -> f64 {
        let gl = gamma.norm();
        let ll = lambda.norm();
        let mut acc = 0.0f64;
        for k in (0..self.abs_coeffs.len()).rev() {
            let mut inner = 0.0f64;
            for a in self.abs_coeffs[k].iter().rev() {
                inner = inner * ll + a;
            }
            acc = acc * gl + inner;
        }
        acc.max(1e-300)
    }
}

/// Parameters of one ray trace.
#[derive(Debug, Clone)]
pub struct RaySpec {
    pub theta: f64,
    pub t0: f64,
    pub t_max: f64,
    pub max_step: f64,
    /// Corrector stops at |p| ≤ corrector_tol · scale_majorant.
    pub corrector_tol: f64,
    pub audit_every: usize,
    pub max_steps: usize,
    /// Skip the hypothesis gate (degenerate inputs, diagnostics).
    pub force: bool,
}

impl RaySpec {
    pub fn for_problem(problem: &PerturbationProblem, theta: f64) -> Self {
        let na = problem.a.frobenius_norm();
        let nb = problem.b.frobenius_norm();
        let t0 = if nb > 0.0 { 1e-6 * na.max(1e-6) / nb } else { 1e-6 * na.max(1.0) };
        let t_max = 1e3 * na.max(1.0);
        RaySpec {
            theta,
            t0,
            t_max,
            max_step: t_max / 200.0,
            corrector_tol: 1e-12,
            audit_every: 25,
            max_steps: 500_000,
            force: false,
        }
    }
}

/// Endpoint of one curve after classification.
#[derive(Debug, Clone, PartialEq)]
pub enum EndClass {
    Divergent { beta_index: usize, slope: Complex64, offset: Complex64 },
    Convergent { delta_index: usize, limit: f64 },
    Unclassified,
}

#[derive(Debug, Clone)]
pub struct TracedCurve {
    /// Index into the ascending eigenvalues of A where the curve starts.
    pub start_index: usize,
    /// (t, λ(t)) at every accepted step, t increasing; shared t grid
    /// across all curves of a set.
    pub samples: Vec<(f64, Complex64)>,
    pub end_class: EndClass,
}

#[derive(Debug, Clone)]
pub struct SpectralCurveSet {
    pub theta: f64,
    pub curves: Vec<TracedCurve>,
    /// r ↦ τ(r), zero-based, in the convention at the top of this module.
    pub permutation: Option<Vec<usize>>,
    pub collision_flag: bool,
    /// Smallest pairwise curve distance seen, and the t where it happened.
    pub nearest_approach: f64,
    pub nearest_approach_t: f64,
    /// Smallest |λ′(t)| over accepted steps and curves.
    pub min_abs_velocity: f64,
    /// Smallest Im λ over all samples with t > 0.
    pub min_imag_observed: f64,
    pub audits: usize,
    pub max_audit_defect: f64,
}

fn min_pairwise_distance(points: &[Complex64]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            min = min.min((points[i] - points[j]).norm());
        }
    }
    min
}

/// Newton in λ at fixed γ; returns the corrected root and a radius
/// estimate (size of the last correction).
fn newton_correct(
    sp: &SecularPolynomial,
    gamma: Complex64,
    start: Complex64,
    tol: f64,
) -> Option<(Complex64, f64)> {
    let mut lambda = start;
    let mut radius = f64::INFINITY;
    for _ in 0..40 {
        let (p, pl, _) = sp.eval_all(gamma, lambda);
        let scale = sp.scale_majorant(gamma, lambda);
        if p.norm() <= tol * scale {
            // One polishing step: quadratic convergence squares the error.
            if pl.norm() > 0.0 {
                let step = p / pl;
                if (lambda - step).is_finite() {
                    lambda -= step;
                    radius = step.norm();
                }
            }
            return Some((lambda, radius.max(f64::EPSILON * (1.0 + lambda.norm()))));
        }
        if pl.norm() == 0.0 {
            return None;
        }
        let step = p / pl;
        lambda -= step;
        radius = step.norm();
        if !lambda.is_finite() {
            return None;
        }
    }
    None
}

/// Trace all N eigenvalue curves of t ↦ A + t·e^{iθ}B from t₀ to t_max.
pub fn trace_ray(
    problem: &PerturbationProblem,
    ray: &RaySpec,
) -> Result<SpectralCurveSet, TraceError> {
    if !ray.force && !problem.hypotheses.all_pass() {
        return Err(TraceError::HypothesisViolated {
            detail: format!("hypothesis report: {:?}", problem.hypotheses),
        });
    }
    let (lo, hi) = problem.sector.theta_interval();
    if !ray.force && !(ray.theta > lo && ray.theta < hi) {
        return Err(TraceError::HypothesisViolated {
            detail: format!("θ = {} outside the open sector interval ({lo}, {hi})", ray.theta),
        });
    }
    assert!(ray.t0 > 0.0 && ray.t_max > ray.t0, "ray needs 0 < t₀ < t_max");

    let sp = SecularPolynomial::build(problem)?;
    let n = problem.dimension();
    let dir = Complex64::from_polar(1.0, ray.theta);

    // First-order seeds λ_r(t₀) ≈ α_r + t₀e^{iθ}⟨Bu_r, u_r⟩, then correct.
    let mut lambdas = Vec::with_capacity(n);
    let gamma0 = dir * ray.t0;
    for r in 0..n {
        let u = problem.a_eig.eigenvector(r);
        let shift = crate::linalg::cdot(&u, &problem.b.matvec(&u));
        let seed = Complex64::new(problem.a_eig.eigenvalues[r], 0.0) + gamma0 * shift;
        let (corrected, _) = newton_correct(&sp, gamma0, seed, ray.corrector_tol).ok_or(
            TraceError::HypothesisViolated {
                detail: format!("corrector failed on the t₀ seed of curve {r}"),
            },
        )?;
        lambdas.push(corrected);
    }

    let mut set = SpectralCurveSet {
        theta: ray.theta,
        curves: (0..n)
            .map(|r| TracedCurve {
                start_index: r,
                samples: vec![(ray.t0, lambdas[r])],
                end_class: EndClass::Unclassified,
            })
            .collect(),
        permutation: None,
        collision_flag: false,
        nearest_approach: min_pairwise_distance(&lambdas),
        nearest_approach_t: ray.t0,
        min_abs_velocity: f64::INFINITY,
        min_imag_observed: lambdas.iter().map(|l| l.im).fold(f64::INFINITY, f64::min),
        audits: 0,
        max_audit_defect: 0.0,
    };

    let audit = |set: &mut SpectralCurveSet,
                 lambdas: &[Complex64],
                 t: f64|
     -> Result<(), TraceError> {
        let oracle = general_eig(&problem.a_gamma(dir * t), false)?.eigenvalues;
        let pairing = pair_multisets(lambdas, &oracle);
        let tolerance =
            1e-7 * (problem.a.frobenius_norm() + t * problem.b.frobenius_norm());
        set.audits += 1;
        set.max_audit_defect = set.max_audit_defect.max(pairing.max_distance);
        if pairing.max_distance > tolerance {
            return Err(TraceError::AuditFailed { t, defect: pairing.max_distance, tolerance });
        }
        Ok(())
    };

    let mut t = ray.t0;
    let mut dt = ray.t0;
    let mut streak = 0usize;
    let mut accepted = 0usize;

    while t < ray.t_max {
        if accepted >= ray.max_steps {
            return Err(TraceError::MaxStepsExceeded { t, steps: accepted });
        }
        let dt_eff = dt.min(ray.t_max - t);
        let t_next = t + dt_eff;
        let gamma = dir * t;
        let gamma_next = dir * t_next;

        let mut candidate = Vec::with_capacity(n);
        let mut max_radius = 0.0f64;
        let mut min_velocity = f64::INFINITY;
        let mut ok = true;
        for &l in &lambdas {
            let (_, pl, pg) = sp.eval_all(gamma, l);
            if pl.norm() == 0.0 {
                ok = false;
                break;
            }
            let velocity = -(pg * dir) / pl;
            min_velocity = min_velocity.min(velocity.norm());
            let predicted = l + velocity * dt_eff;
            match newton_correct(&sp, gamma_next, predicted, ray.corrector_tol) {
                Some((corrected, radius)) => {
                    candidate.push(corrected);
                    max_radius = max_radius.max(radius);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }

        let mut collision = false;
        if ok {
            let d_min = min_pairwise_distance(&candidate);
            if d_min < set.nearest_approach {
                set.nearest_approach = d_min;
                set.nearest_approach_t = t_next;
            }
            if d_min < 10.0 * max_radius {
                collision = true;
            }
        }

        if !ok || collision {
            dt /= 2.0;
            streak = 0;
            if dt < t * 1e-13 {
                set.collision_flag = true;
                return Err(TraceError::CollisionDetected {
                    theta: ray.theta,
                    t,
                    partial: Box::new(set),
                });
            }
            continue;
        }

        t = t_next;
        lambdas = candidate;
        accepted += 1;
        streak += 1;
        set.min_abs_velocity = set.min_abs_velocity.min(min_velocity);
        for (r, &l) in lambdas.iter().enumerate() {
            set.curves[r].samples.push((t, l));
            set.min_imag_observed = set.min_imag_observed.min(l.im);
        }
        if streak >= 3 {
            dt = (dt * 1.6).min(ray.max_step);
            streak = 0;
        }
        if accepted % ray.audit_every == 0 {
            audit(&mut set, &lambdas, t)?;
        }
    }

    audit(&mut set, &lambdas, t)?;
    Ok(set)
}

/// Asymptotic offsets ⟨Af_r, g_r⟩/⟨f_r, g_r⟩ per β_r, from right/left
/// eigenvectors of B; the divergent branch behaves as γβ_r + offset.
fn divergence_offsets(problem: &PerturbationProblem) -> Result<Vec<Complex64>, TraceError> {
    let right = general_eig(&problem.b, true)?;
    let left = general_eig(&problem.b.adjoint(), true)?;
    let rv = right.eigenvectors.as_ref().expect("vectors requested");
    let lv = left.eigenvectors.as_ref().expect("vectors requested");
    let mut offsets = Vec::with_capacity(problem.beta.len());
    for &beta in &problem.beta {
        let pick = |eigs: &[Complex64], target: Complex64| -> usize {
            let mut best = 0;
            let mut dist = f64::INFINITY;
            for (i, &ev) in eigs.iter().enumerate() {
                let d = (ev - target).norm();
                if d < dist {
                    dist = d;
                    best = i;
                }
            }
            best
        };
        let f = rv.column(pick(&right.eigenvalues, beta));
        let g = lv.column(pick(&left.eigenvalues, beta.conj()));
        let denom = crate::linalg::cdot(&g, &f);
        let offset = if denom.norm() > 1e-12 {
            crate::linalg::cdot(&g, &problem.a.matvec(&f)) / denom
        } else {
            Complex64::new(0.0, 0.0)
        };
        offsets.push(offset);
    }
    Ok(offsets)
}

/// Nearest-target assignment with a 10× separation requirement between
/// the best and second-best candidate.
fn assign_unique(
    values: &[Complex64],
    targets: &[Complex64],
    what: &str,
) -> Result<Vec<usize>, TraceError> {
    let mut used = vec![false; targets.len()];
    let mut out = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let mut best = usize::MAX;
        let mut d1 = f64::INFINITY;
        let mut d2 = f64::INFINITY;
        for (j, &tgt) in targets.iter().enumerate() {
            let d = (v - tgt).norm();
            if d < d1 {
                d2 = d1;
                d1 = d;
                best = j;
            } else if d < d2 {
                d2 = d;
            }
        }
        if best == usize::MAX {
            return Err(TraceError::AmbiguousMatch {
                detail: format!("{what}: no target available for value {v}"),
            });
        }
        if d2 <= 10.0 * d1 {
            return Err(TraceError::AmbiguousMatch {
                detail: format!(
                    "{what} endpoint {i}: nearest target gap {d1:.3e} vs runner-up {d2:.3e} (needs 10×); raise t_max"
                ),
            });
        }
        if used[best] {
            return Err(TraceError::AmbiguousMatch {
                detail: format!("{what}: target {best} claimed twice"),
            });
        }
        used[best] = true;
        out.push(best);
    }
    Ok(out)
}

/// Tag every curve as Divergent (toward γβ_r) or Convergent (toward δ_r)
/// and assemble the permutation τ.
pub fn classify_endpoints(
    mut set: SpectralCurveSet,
    problem: &PerturbationProblem,
) -> Result<SpectralCurveSet, TraceError> {
    let m = problem.rank();
    let n = problem.dimension();
    assert_eq!(set.curves.len(), n);
    let dir = Complex64::from_polar(1.0, set.theta);
    let (t_end, _) = *set.curves[0].samples.last().expect("nonempty trace");

    let min_beta = problem.beta.iter().map(|b| b.norm()).fold(f64::INFINITY, f64::min);
    let mut divergent_idx = Vec::new();
    let mut convergent_idx = Vec::new();
    for (r, curve) in set.curves.iter().enumerate() {
        let (_, l_end) = *curve.samples.last().unwrap();
        if m > 0 && l_end.norm() > 0.5 * t_end * min_beta {
            divergent_idx.push(r);
        } else {
            convergent_idx.push(r);
        }
    }
    if divergent_idx.len() != m {
        return Err(TraceError::AmbiguousMatch {
            detail: format!(
                "{} curves diverge but rank(B) = {m}; raise t_max or review the threshold",
                divergent_idx.len()
            ),
        });
    }

    let offsets = if m > 0 { divergence_offsets(problem)? } else { Vec::new() };
    let slopes: Vec<Complex64> = divergent_idx
        .iter()
        .map(|&r| {
            let (t, l) = *set.curves[r].samples.last().unwrap();
            l / (dir * t)
        })
        .collect();
    let beta_assign = assign_unique(&slopes, &problem.beta, "divergent slope")?;

    let limits: Vec<Complex64> =
        convergent_idx.iter().map(|&r| *set.curves[r].samples.last().map(|(_, l)| l).unwrap()).collect();
    let delta_targets: Vec<Complex64> =
        problem.delta.iter().map(|&d| Complex64::new(d, 0.0)).collect();
    let delta_assign = assign_unique(&limits, &delta_targets, "convergent limit")?;

    let mut tau = vec![usize::MAX; n];
    for (pos, &r) in divergent_idx.iter().enumerate() {
        let k = beta_assign[pos];
        set.curves[r].end_class =
            EndClass::Divergent { beta_index: k, slope: slopes[pos], offset: offsets[k] };
        tau[r] = (n - m) + k;
    }
    for (pos, &r) in convergent_idx.iter().enumerate() {
        let k = delta_assign[pos];
        set.curves[r].end_class = EndClass::Convergent { delta_index: k, limit: problem.delta[k] };
        tau[r] = k;
    }
    set.permutation = Some(tau);
    Ok(set)
}

/// One bracketed exceptional angle with the critical pair localized by a
/// two-variable Newton on (p, ∂p/∂λ) = 0 where available.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub gamma: Complex64,
    pub lambda: Complex64,
    /// max of the two residuals, relative to the evaluation scale.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ExceptionalBracket {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub critical: Option<CriticalPoint>,
}

#[derive(Debug, Clone, Default)]
pub struct ExceptionalAngles {
    pub brackets: Vec<ExceptionalBracket>,
}

impl ExceptionalAngles {
    pub fn contains(&self, theta: f64) -> bool {
        self.brackets.iter().any(|b| theta >= b.theta_lo && theta <= b.theta_hi)
    }
}

fn tau_at(
    problem: &PerturbationProblem,
    theta: f64,
) -> Result<Option<(Vec<usize>, SpectralCurveSet)>, TraceError> {
    let ray = RaySpec::for_problem(problem, theta);
    match trace_ray(problem, &ray) {
        Ok(set) => {
            let set = classify_endpoints(set, problem)?;
            let tau = set.permutation.clone().expect("classified");
            Ok(Some((tau, set)))
        }
        Err(TraceError::CollisionDetected { .. }) => Ok(None),
        Err(other) => Err(other),
    }
}

/// Newton refinement of the multiplicity-two point (γ_c, λ_c) from a seed.
fn refine_critical(
    sp: &SecularPolynomial,
    mut gamma: Complex64,
    mut lambda: Complex64,
) -> Option<CriticalPoint> {
    for _ in 0..60 {
        let (p, pl, pg) = sp.eval_all(gamma, lambda);
        let (pll, plg) = sp.eval_d2(gamma, lambda);
        let scale = sp.scale_majorant(gamma, lambda);
        let scale_l = scale / (1.0 + lambda.norm());
        let res = (p.norm() / scale).max(pl.norm() / scale_l);
        if res <= 1e-10 {
            return Some(CriticalPoint { gamma, lambda, residual: res });
        }
        // Solve [pg pl; plg pll]·(dγ, dλ) = −(p, pl).
        let det = pg * pll - pl * plg;
        if det.norm() == 0.0 {
            return None;
        }
        let dg = -(p * pll - pl * pl) / det;
        let dl = -(pg * pl - plg * p) / det;
        gamma += dg;
        lambda += dl;
        if !gamma.is_finite() || !lambda.is_finite() {
            return None;
        }
    }
    None
}

/// Seed for the critical-point Newton: the closest pair over a trace.
fn collision_seed(set: &SpectralCurveSet, theta: f64) -> (Complex64, Complex64) {
    let dir = Complex64::from_polar(1.0, theta);
    let steps = set.curves.iter().map(|c| c.samples.len()).min().unwrap_or(0);
    let mut best = (f64::INFINITY, 0.0, Complex64::new(0.0, 0.0));
    for k in 0..steps {
        let t = set.curves[0].samples[k].0;
        for i in 0..set.curves.len() {
            for j in i + 1..set.curves.len() {
                let a = set.curves[i].samples[k].1;
                let b = set.curves[j].samples[k].1;
                let d = (a - b).norm();
                if d < best.0 {
                    best = (d, t, (a + b) * 0.5);
                }
            }
        }
    }
    (dir * best.1, best.2)
}

/// Scan (θ_lo, θ_hi) for permutation changes and bisect each change down
/// to `resolution`, attaching critical-point data per bracket.
pub fn find_exceptional_angles(
    problem: &PerturbationProblem,
    theta_range: (f64, f64),
    resolution: f64,
) -> Result<ExceptionalAngles, TraceError> {
    let (range_lo, range_hi) = theta_range;
    assert!(range_hi > range_lo && resolution > 0.0);
    let sp = SecularPolynomial::build(problem)?;

    let coarse = ((range_hi - range_lo) / 18.0).max(resolution);
    let mut grid = Vec::new();
    let mut theta = range_lo + coarse / 2.0;
    while theta < range_hi {
        grid.push(theta);
        theta += coarse;
    }

    let mut samples: Vec<(f64, Option<Vec<usize>>)> = Vec::with_capacity(grid.len());
    for &th in &grid {
        let tau = tau_at(problem, th)?.map(|(tau, _)| tau);
        samples.push((th, tau));
    }

    let mut out = ExceptionalAngles::default();
    let mut pending: Vec<(f64, f64, Vec<usize>, Vec<usize>)> = Vec::new();
    for w in samples.windows(2) {
        let (th_a, tau_a) = (&w[0].0, &w[0].1);
        let (th_b, tau_b) = (&w[1].0, &w[1].1);
        match (tau_a, tau_b) {
            (Some(a), Some(b)) if a != b => pending.push((*th_a, *th_b, a.clone(), b.clone())),
            (None, _) | (_, None) => {
                // A grid angle landed in T itself; record a minimal bracket.
                let bad = if tau_a.is_none() { *th_a } else { *th_b };
                out.brackets.push(ExceptionalBracket {
                    theta_lo: bad - resolution / 2.0,
                    theta_hi: bad + resolution / 2.0,
                    critical: None,
                });
            }
            _ => {}
        }
    }

    while let Some((mut lo, mut hi, tau_lo, tau_hi)) = pending.pop() {
        while hi - lo > resolution {
            let mid = 0.5 * (lo + hi);
            let tau_mid = match tau_at(problem, mid)? {
                Some((tau, _)) => tau,
                None => {
                    // Landed on the angle itself: the bracket is found.
                    lo = mid - resolution / 2.0;
                    hi = mid + resolution / 2.0;
                    break;
                }
            };
            if tau_mid == tau_lo {
                lo = mid;
            } else if tau_mid == tau_hi {
                hi = mid;
            } else {
                // Two separate changes inside: split the interval.
                pending.push((lo, mid, tau_lo.clone(), tau_mid.clone()));
                pending.push((mid, hi, tau_mid, tau_hi));
                lo = f64::NAN;
                break;
            }
        }
        if lo.is_nan() {
            continue;
        }

        // Critical data from the midpoint trace's closest approach.
        let mid = 0.5 * (lo + hi);
        let ray = RaySpec::for_problem(problem, mid);
        let seed = match trace_ray(problem, &ray) {
            Err(TraceError::CollisionDetected { partial, .. }) => {
                Some(collision_seed(&partial, mid))
            }
            Ok(set) => Some(collision_seed(&set, mid)),
            Err(_) => None,
        };
        let critical = seed.and_then(|(g, l)| refine_critical(&sp, g, l));
        // A bisection endpoint can land exactly on the jump angle; half a
        // resolution of padding keeps the exceptional angle interior.
        out.brackets.push(ExceptionalBracket {
            theta_lo: lo - resolution / 2.0,
            theta_hi: hi + resolution / 2.0,
            critical,
        });
    }

    out.brackets.sort_by(|x, y| x.theta_lo.total_cmp(&y.theta_lo));
    Ok(out)
}

/// τ(θ_a) == τ(θ_b); both angles must avoid the exceptional brackets.
pub fn homotopy_invariance_check(
    problem: &PerturbationProblem,
    theta_a: f64,
    theta_b: f64,
    exceptional: &ExceptionalAngles,
) -> Result<bool, TraceError> {
    for &theta in &[theta_a, theta_b] {
        if exceptional.contains(theta) {
            return Err(TraceError::HypothesisViolated {
                detail: format!("θ = {theta} lies inside an exceptional bracket"),
            });
        }
    }
    let tau_a = tau_at(problem, theta_a)?;
    let tau_b = tau_at(problem, theta_b)?;
    match (tau_a, tau_b) {
        (Some((a, _)), Some((b, _))) => Ok(a == b),
        _ => Err(TraceError::HypothesisViolated {
            detail: "collision on a supposedly regular angle".into(),
        }),
    }
}
