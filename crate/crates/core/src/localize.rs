//! Interval compression of operator-valued Herglotz measures and Rouché
//! certification of zero counts. Compression collapses the atoms of Q in
//! [a,b] into a single pair (X, Y) with X = Q([a,b]) and X^{1/2}YX^{1/2}
//! = ∫_a^b s Q(ds), giving m̃(λ) = m_out(λ) + X^{1/2}(Y−λI)^{−1}X^{1/2}
//! with error ≤ 2(b−a)²‖X‖/L³ at distance L from the interval. The
//! certifier checks the normalized-coordinate hypotheses (monic p, simple
//! roots ≥ 2 apart, |p| > ε on the collar, |p−q| < ε throughout) by grid
//! sweep with Lipschitz slack, then counts zeros by winding numbers.

use num_complex::Complex64;
use thiserror::Error;

use crate::herglotz::SpectralMeasure;
use crate::linalg::{hermitian_eig, poly_roots, ComplexMatrix, LinalgError, Poly};

#[derive(Debug, Error)]
pub enum LocalizeError {
    #[error("no atoms to compress in [{a}, {b}]")]
    EmptyInterval { a: f64, b: f64 },
    #[error("certificate hypothesis failed: {detail}")]
    HypothesisUnverifiable { detail: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Herglotz data after collapsing the atoms inside `interval` into the
/// single block (X, Y); atoms outside the interval survive unchanged.
#[derive(Debug, Clone)]
pub struct CompressedHerglotz {
    pub kept_atoms: Vec<(f64, ComplexMatrix)>,
    /// X = Q([a,b]), PSD.
    pub x: ComplexMatrix,
    /// Hermitian with spectrum in [a,b]; midpoint on Ker(X).
    pub y: ComplexMatrix,
    pub interval: (f64, f64),
    x_half: ComplexMatrix,
    /// ∫_a^b s Q(ds), retained for the moment identity check.
    z: ComplexMatrix,
}

impl CompressedHerglotz {
    pub fn dimension(&self) -> usize {
        self.x.rows()
    }

    /// m̃(λ) = Σ_{s∉[a,b]} Q_j/(s_j−λ) + X^{1/2}(Y−λI)^{−1}X^{1/2}.
    pub fn eval(&self, lambda: Complex64) -> Result<ComplexMatrix, LocalizeError> {
        let k = self.dimension();
        let mut out = ComplexMatrix::zeros(k, k);
        for (s, q) in &self.kept_atoms {
            let w = (Complex64::new(*s, 0.0) - lambda).inv();
            for i in 0..k {
                for j in 0..k {
                    out[(i, j)] += q[(i, j)] * w;
                }
            }
        }
        let resolvent = self.y.add_scalar_diag(-lambda).lu()?.solve_mat(&self.x_half)?;
        let block = self.x_half.matmul(&resolvent);
        for i in 0..k {
            for j in 0..k {
                out[(i, j)] += block[(i, j)];
            }
        }
        Ok(out)
    }

    /// How far eig(Y) protrudes from [a,b]; 0 when aI ≤ Y ≤ bI holds.
    pub fn interval_defect(&self) -> f64 {
        if self.dimension() == 0 {
            return 0.0;
        }
        let eig = hermitian_eig(&self.y).expect("Y hermitian by construction");
        let lo = *eig.eigenvalues.first().unwrap();
        let hi = *eig.eigenvalues.last().unwrap();
        (self.interval.0 - lo).max(hi - self.interval.1).max(0.0)
    }

    /// ‖X^{1/2}YX^{1/2} − ∫_a^b s Q(ds)‖_F.
    pub fn moment_defect(&self) -> f64 {
        let lhs = self.x_half.matmul(&self.y).matmul(&self.x_half);
        let k = self.dimension();
        ComplexMatrix::from_fn(k, k, |i, j| lhs[(i, j)] - self.z[(i, j)]).frobenius_norm()
    }

    /// The compressed data as a measure again: kept atoms plus one atom
    /// per eigenvalue of Y carrying X^{1/2}Π X^{1/2}.
    pub fn as_measure(&self) -> SpectralMeasure {
        let k = self.dimension();
        let mut atoms = self.kept_atoms.clone();
        let eig = hermitian_eig(&self.y).expect("Y hermitian by construction");
        for (idx, &yv) in eig.eigenvalues.iter().enumerate() {
            let u = eig.eigenvector(idx);
            let xu = self.x_half.matvec(&u);
            let q = ComplexMatrix::from_fn(k, k, |i, j| xu[i] * xu[j].conj());
            if q.frobenius_norm() > 0.0 {
                atoms.push((yv, q));
            }
        }
        atoms.sort_by(|p, q| p.0.total_cmp(&q.0));
        SpectralMeasure { atoms, dimension: k }
    }
}

/// Collapse the atoms of `measure` inside [a,b] (inclusive) into (X, Y).
/// Y on Ran(X) comes from the pseudo-inverse square root; on Ker(X) it is
/// filled with the interval midpoint so aI ≤ Y ≤ bI holds everywhere.
pub fn compress(
    measure: &SpectralMeasure,
    a: f64,
    b: f64,
) -> Result<CompressedHerglotz, LocalizeError> {
    if a > b {
        return Err(LocalizeError::EmptyInterval { a, b });
    }
    let k = measure.dimension;
    let mut kept_atoms = Vec::new();
    let mut x = ComplexMatrix::zeros(k, k);
    let mut z = ComplexMatrix::zeros(k, k);
    let mut captured = 0usize;
    for (s, q) in &measure.atoms {
        if *s < a || *s > b {
            kept_atoms.push((*s, q.clone()));
            continue;
        }
        captured += 1;
        for i in 0..k {
            for j in 0..k {
                x[(i, j)] += q[(i, j)];
                z[(i, j)] += q[(i, j)] * *s;
            }
        }
    }
    if captured == 0 {
        return Err(LocalizeError::EmptyInterval { a, b });
    }

    let eig = hermitian_eig(&x)?;
    let threshold = 1e-12 * x.frobenius_norm();
    let u = &eig.eigenvectors;
    let w = u.adjoint().matmul(&z).matmul(u);
    let midpoint = 0.5 * (a + b);
    let range = |i: usize| eig.eigenvalues[i] > threshold;
    let y_small = ComplexMatrix::from_fn(k, k, |i, j| {
        if range(i) && range(j) {
            w[(i, j)] / (eig.eigenvalues[i] * eig.eigenvalues[j]).sqrt()
        } else if i == j {
            Complex64::new(midpoint, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let y = u.matmul(&y_small).matmul(&u.adjoint()).hermitian_part();
    let x_half = ComplexMatrix::from_fn(k, k, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..k {
            let root = eig.eigenvalues[r].max(0.0).sqrt();
            acc += u[(i, r)] * root * u[(j, r)].conj();
        }
        acc
    });
    Ok(CompressedHerglotz { kept_atoms, x, y, interval: (a, b), x_half, z })
}

/// A-priori sup bound 2(b−a)²·‖X‖/L³ on ‖m − m̃‖ at dist(λ,[a,b]) ≥ L.
pub fn compression_error_bound(comp: &CompressedHerglotz, l: f64) -> f64 {
    assert!(l > 0.0, "distance L must be positive");
    let (a, b) = comp.interval;
    if comp.dimension() == 0 {
        return 0.0;
    }
    let norm = hermitian_eig(&comp.x)
        .expect("X hermitian by construction")
        .eigenvalues
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    2.0 * (b - a).powi(2) * norm / l.powi(3)
}

/// ‖∫_a^b f dQ‖ ≤ ‖f‖_∞·‖Q([a,b])‖, returned as the right-hand side.
pub fn q_interval_bound(measure: &SpectralMeasure, f_sup: f64, a: f64, b: f64) -> f64 {
    let k = measure.dimension;
    let mut x = ComplexMatrix::zeros(k, k);
    for (s, q) in &measure.atoms {
        if *s >= a && *s <= b {
            for i in 0..k {
                for j in 0..k {
                    x[(i, j)] += q[(i, j)];
                }
            }
        }
    }
    if x.frobenius_norm() == 0.0 {
        return 0.0;
    }
    let norm = hermitian_eig(&x)
        .expect("interval mass hermitian")
        .eigenvalues
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    f_sup * norm
}

/// Open region for zero counting.
#[derive(Debug, Clone, Copy)]
pub enum Region {
    Disc { center: Complex64, radius: f64 },
    /// Axis-aligned, corners lo = (re_min, im_min), hi = (re_max, im_max).
    Rectangle { lo: Complex64, hi: Complex64 },
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Disc { center, radius } => (z - center).norm() < radius,
            Region::Rectangle { lo, hi } => {
                z.re > lo.re && z.re < hi.re && z.im > lo.im && z.im < hi.im
            }
        }
    }

    /// dist(z, U); zero inside.
    fn dist_outside(&self, z: Complex64) -> f64 {
        match *self {
            Region::Disc { center, radius } => ((z - center).norm() - radius).max(0.0),
            Region::Rectangle { lo, hi } => {
                let dx = (lo.re - z.re).max(z.re - hi.re).max(0.0);
                let dy = (lo.im - z.im).max(z.im - hi.im).max(0.0);
                (dx * dx + dy * dy).sqrt()
            }
        }
    }

    /// dist(z, ∂U) for z inside U; meaningless outside.
    fn inner_boundary_dist(&self, z: Complex64) -> f64 {
        match *self {
            Region::Disc { center, radius } => radius - (z - center).norm(),
            Region::Rectangle { lo, hi } => (z.re - lo.re)
                .min(hi.re - z.re)
                .min(z.im - lo.im)
                .min(hi.im - z.im),
        }
    }

    fn bounding_box(&self, pad: f64) -> (f64, f64, f64, f64) {
        match *self {
            Region::Disc { center, radius } => (
                center.re - radius - pad,
                center.re + radius + pad,
                center.im - radius - pad,
                center.im + radius + pad,
            ),
            Region::Rectangle { lo, hi } => (lo.re - pad, hi.re + pad, lo.im - pad, hi.im + pad),
        }
    }

    /// Closed positively oriented polygonal contour with n nodes on ∂U.
    fn contour(&self, n: usize) -> Vec<Complex64> {
        match *self {
            Region::Disc { center, radius } => (0..n)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / n as f64;
                    center + Complex64::from_polar(radius, t)
                })
                .collect(),
            Region::Rectangle { lo, hi } => {
                let w = hi.re - lo.re;
                let h = hi.im - lo.im;
                let perimeter = 2.0 * (w + h);
                (0..n)
                    .map(|i| {
                        let mut s = perimeter * i as f64 / n as f64;
                        if s < w {
                            return Complex64::new(lo.re + s, lo.im);
                        }
                        s -= w;
                        if s < h {
                            return Complex64::new(hi.re, lo.im + s);
                        }
                        s -= h;
                        if s < w {
                            return Complex64::new(hi.re - s, hi.im);
                        }
                        s -= w;
                        Complex64::new(lo.re, hi.im - s)
                    })
                    .collect()
            }
        }
    }
}

/// z ↦ (z − center)/scale, the coordinate change that puts root sets into
/// the normalized frame the certifier hypotheses are stated in.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub center: Complex64,
    pub scale: f64,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap { center: Complex64::new(0.0, 0.0), scale: 1.0 }
    }

    /// Centroid shift plus scaling so the closest root pair lands exactly
    /// 2 apart; a single root maps to the origin at unit scale.
    pub fn for_roots(roots: &[Complex64]) -> Self {
        assert!(!roots.is_empty());
        let center = roots.iter().sum::<Complex64>() / roots.len() as f64;
        let mut min_dist = f64::INFINITY;
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                min_dist = min_dist.min((roots[i] - roots[j]).norm());
            }
        }
        let scale = if min_dist.is_finite() { min_dist / 2.0 } else { 1.0 };
        AffineMap { center, scale: if scale > 0.0 { scale } else { 1.0 } }
    }

    pub fn forward(&self, z: Complex64) -> Complex64 {
        (z - self.center) / self.scale
    }

    pub fn backward(&self, w: Complex64) -> Complex64 {
        self.center + w * self.scale
    }

    /// p(center + scale·w)/scale^deg; keeps monic polynomials monic.
    pub fn push_monic(&self, p: &Poly) -> Poly {
        let lin = Poly::new(vec![self.center, Complex64::new(self.scale, 0.0)]);
        let mut rev = p.coeffs.iter().rev();
        let mut acc = Poly::new(vec![*rev.next().expect("nonempty polynomial")]);
        for &c in rev {
            acc = acc.mul(&lin).add(&Poly::new(vec![c]));
        }
        acc.scale(Complex64::new(self.scale.powi(-(p.degree() as i32)), 0.0))
    }
}

/// One disc of radius ε that isolates a matched (p, q) zero pair.
#[derive(Debug, Clone)]
pub struct IsolatingDisc {
    pub center: Complex64,
    pub radius: f64,
    pub p_count: i64,
    pub q_count: i64,
}

#[derive(Debug, Clone)]
pub struct RoucheCertificate {
    pub region: Region,
    pub epsilon: f64,
    pub p_count: i64,
    pub q_count: i64,
    pub discs: Vec<IsolatingDisc>,
    /// The coordinate change the caller applied before certifying.
    pub map: Option<AffineMap>,
}

impl RoucheCertificate {
    pub fn with_map(mut self, map: AffineMap) -> Self {
        self.map = Some(map);
        self
    }
}

const WINDING_TOL: f64 = 0.25;
const CONTOUR_START: usize = 256;
const CONTOUR_CAP: usize = 8192;

/// Winding number of f along the closed polygon, by phase unwrapping;
/// None when a node hits a zero or a phase step reaches π/2.
fn winding_once(f: &mut impl FnMut(Complex64) -> Complex64, contour: &[Complex64]) -> Option<f64> {
    let vals: Vec<Complex64> = contour.iter().map(|&z| f(z)).collect();
    if vals.iter().any(|v| v.norm() == 0.0 || !v.is_finite()) {
        return None;
    }
    let mut total = 0.0;
    for i in 0..vals.len() {
        let step = (vals[(i + 1) % vals.len()] / vals[i]).arg();
        if step.abs() >= std::f64::consts::FRAC_PI_2 {
            return None;
        }
        total += step;
    }
    Some(total / std::f64::consts::TAU)
}

fn count_zeros(
    mut f: impl FnMut(Complex64) -> Complex64,
    contour_of: impl Fn(usize) -> Vec<Complex64>,
    label: &str,
) -> Result<i64, LocalizeError> {
    let mut nodes = CONTOUR_START;
    while nodes <= CONTOUR_CAP {
        if let Some(w) = winding_once(&mut f, &contour_of(nodes)) {
            if (w - w.round()).abs() <= WINDING_TOL {
                return Ok(w.round() as i64);
            }
        }
        nodes *= 2;
    }
    Err(LocalizeError::HypothesisUnverifiable {
        detail: format!("winding number for {label} did not settle within {CONTOUR_CAP} nodes"),
    })
}

fn disc_contour(center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| center + Complex64::from_polar(radius, std::f64::consts::TAU * i as f64 / n as f64))
        .collect()
}

/// Certify that the monic polynomial p and the analytic approximant q
/// have matching zero counts in U, with every zero pair isolated in a
/// radius-ε disc. Hypotheses are the normalized-coordinate ones: roots
/// of p simple and ≥ 2 apart, 0 < ε < 1/2, |p| > ε on U_ε∖U and
/// |p − q| < ε on U_ε; the grid sweep verifies the latter two with a
/// Lipschitz margin (rigorous for p, difference-quotient estimate for
/// p − q).
pub fn rouche_certify(
    p: &Poly,
    q: impl Fn(Complex64) -> Complex64,
    region: Region,
    epsilon: f64,
) -> Result<RoucheCertificate, LocalizeError> {
    assert!(epsilon > 0.0 && epsilon < 0.5, "margin must sit in (0, 1/2)");
    let lead = p.coeffs.last().copied().unwrap_or(Complex64::new(0.0, 0.0));
    if (lead - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(LocalizeError::HypothesisUnverifiable {
            detail: format!("p is not monic: leading coefficient {lead}"),
        });
    }

    let roots = poly_roots(&p.coeffs)?;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let d = (roots[i] - roots[j]).norm();
            if d < 2.0 * (1.0 - 1e-9) {
                return Err(LocalizeError::HypothesisUnverifiable {
                    detail: format!(
                        "roots {} and {} are {d:.6} apart; normalized coordinates need ≥ 2",
                        roots[i], roots[j]
                    ),
                });
            }
        }
    }

    grid_sweep(p, &q, region, epsilon)?;

    let p_count = count_zeros(|z| p.eval(z), |n| region.contour(n), "p on ∂U")?;
    let q_count = count_zeros(&q, |n| region.contour(n), "q on ∂U")?;
    let inside: Vec<Complex64> = roots.iter().copied().filter(|&r| region.contains(r)).collect();
    if p_count != inside.len() as i64 {
        return Err(LocalizeError::HypothesisUnverifiable {
            detail: format!(
                "∂U winding counts {p_count} zeros of p but {} roots lie inside",
                inside.len()
            ),
        });
    }
    if q_count != p_count {
        return Err(LocalizeError::HypothesisUnverifiable {
            detail: format!("zero counts differ: p has {p_count}, q has {q_count}"),
        });
    }

    let mut discs = Vec::with_capacity(inside.len());
    for &root in &inside {
        let pc = count_zeros(|z| p.eval(z), |n| disc_contour(root, epsilon, n), "p on C(λ,ε)")?;
        let qc = count_zeros(&q, |n| disc_contour(root, epsilon, n), "q on C(λ,ε)")?;
        if pc != 1 || qc != 1 {
            return Err(LocalizeError::HypothesisUnverifiable {
                detail: format!(
                    "isolating disc at {root} holds {pc} zeros of p and {qc} of q; expected one each"
                ),
            });
        }
        discs.push(IsolatingDisc { center: root, radius: epsilon, p_count: pc, q_count: qc });
    }

    Ok(RoucheCertificate { region, epsilon, p_count, q_count, discs, map: None })
}

/// Grid checks of |p| > ε on the collar U_ε∖U and |p − q| < ε on U_ε.
fn grid_sweep(
    p: &Poly,
    q: &impl Fn(Complex64) -> Complex64,
    region: Region,
    epsilon: f64,
) -> Result<(), LocalizeError> {
    let mut n = 96usize;
    let mut last_failure = String::new();
    while n <= 384 {
        let (re_lo, re_hi, im_lo, im_hi) = region.bounding_box(2.0 * epsilon);
        let hx = (re_hi - re_lo) / (n - 1) as f64;
        let hy = (im_hi - im_lo) / (n - 1) as f64;
        let cover = 0.5 * (hx * hx + hy * hy).sqrt();

        let r_max = re_lo.abs().max(re_hi.abs()).hypot(im_lo.abs().max(im_hi.abs()));
        let mut lipschitz_p = 0.0;
        for (i, c) in p.coeffs.iter().enumerate().skip(1) {
            lipschitz_p += i as f64 * c.norm() * r_max.powi(i as i32 - 1);
        }

        let mut collar_min = f64::INFINITY;
        let mut collar_argmin = Complex64::new(0.0, 0.0);
        let mut diff_max = 0.0f64;
        let mut diff_argmax = Complex64::new(0.0, 0.0);
        let mut diff_vals: Vec<Option<Complex64>> = vec![None; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let z = Complex64::new(re_lo + hx * ix as f64, im_lo + hy * iy as f64);
                let near_ue = region.dist_outside(z) <= 2.0 * epsilon + cover;
                if !near_ue {
                    continue;
                }
                let pv = p.eval(z);
                let in_collar = if region.contains(z) {
                    region.inner_boundary_dist(z) <= cover
                } else {
                    true
                };
                if in_collar && pv.norm() < collar_min {
                    collar_min = pv.norm();
                    collar_argmin = z;
                }
                let d = pv - q(z);
                diff_vals[iy * n + ix] = Some(d);
                if d.norm() > diff_max {
                    diff_max = d.norm();
                    diff_argmax = z;
                }
            }
        }

        // Empirical modulus of continuity of p − q from grid quotients,
        // doubled; rigorous only for p, which dominates in practice.
        let mut lipschitz_diff = 0.0f64;
        for iy in 0..n {
            for ix in 0..n {
                let Some(v) = diff_vals[iy * n + ix] else { continue };
                if ix + 1 < n {
                    if let Some(r) = diff_vals[iy * n + ix + 1] {
                        lipschitz_diff = lipschitz_diff.max((r - v).norm() / hx);
                    }
                }
                if iy + 1 < n {
                    if let Some(u) = diff_vals[(iy + 1) * n + ix] {
                        lipschitz_diff = lipschitz_diff.max((u - v).norm() / hy);
                    }
                }
            }
        }
        lipschitz_diff *= 2.0;

        let collar_ok = collar_min - lipschitz_p * cover > epsilon;
        let diff_ok = diff_max + lipschitz_diff * cover < epsilon;
        if collar_ok && diff_ok {
            return Ok(());
        }
        last_failure = if !collar_ok {
            format!(
                "|p| ≤ {:.6e} near {collar_argmin} on the collar (needs > ε = {epsilon})",
                collar_min
            )
        } else {
            format!(
                "|p − q| ≥ {:.6e} near {diff_argmax} (needs < ε = {epsilon})",
                diff_max
            )
        };
        n *= 2;
    }
    Err(LocalizeError::HypothesisUnverifiable { detail: last_failure })
}
