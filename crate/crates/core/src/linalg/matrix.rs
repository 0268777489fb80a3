//! Dense complex matrices with the factorizations the rest of the crate
//! needs: LU with partial pivoting (determinants, resolvent solves) and a
//! power-iteration operator norm. Storage is row-major `Vec<Complex64>`.

use num_complex::Complex64;

use super::LinalgError;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:>11.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f, "{}", if self.cols > 8 { "…" } else { "" })?;
        }
        if self.rows > 8 {
            writeln!(f, "  …")?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from nested rows. Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.concat() }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let converted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn diagonal(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &z) in d.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn real_diagonal(d: &[f64]) -> Self {
        let entries: Vec<Complex64> = d.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&entries)
    }

    /// Column vectors assembled into an n×k matrix. Panics on length mismatch.
    pub fn from_columns(cols: &[Vec<Complex64>]) -> Self {
        let k = cols.len();
        let n = if k == 0 { 0 } else { cols[0].len() };
        let mut m = Self::zeros(n, k);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), n, "ragged columns");
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose A*.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// A + z·I on a square matrix.
    pub fn add_scalar_diag(&self, z: Complex64) -> Self {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)] += z;
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        // ikj order keeps the inner loop contiguous in both `other` and `out`.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let base = i * out.cols;
                for j in 0..other.cols {
                    out.data[base + j] += a * orow[j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// A* v without forming the adjoint.
    pub fn adjoint_matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for (j, a) in self.row(i).iter().enumerate() {
                out[j] += a.conj() * vi;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (j, a) in self.row(i).iter().enumerate() {
                sums[j] += a.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|a| a.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn hermitian_residual(&self) -> f64 {
        assert!(self.is_square());
        let mut acc = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    /// (A + A*)/2, the Hermitian real part.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// (A - A*)/(2i), Hermitian for any square A.
    pub fn skew_part(&self) -> Self {
        assert!(self.is_square());
        let half_over_i = Complex64::new(0.0, -0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] - self[(j, i)].conj()) * half_over_i)
    }

    /// V* A V for a basis V with orthonormal columns: the truncation of A to Ran(V).
    pub fn compress_to_basis(&self, v: &ComplexMatrix) -> Self {
        assert_eq!(self.rows, v.rows());
        v.adjoint().matmul(&self.matmul(v))
    }

    pub fn submatrix(&self, row_range: std::ops::Range<usize>, col_range: std::ops::Range<usize>) -> Self {
        Self::from_fn(row_range.len(), col_range.len(), |i, j| {
            self[(row_range.start + i, col_range.start + j)]
        })
    }

    pub fn lu(&self) -> Result<LuFactors, LinalgError> {
        LuFactors::new(self)
    }

    /// det(A) through the LU pivots. Zero when a pivot vanishes exactly.
    pub fn det(&self) -> Complex64 {
        match self.lu() {
            Ok(f) => f.det(),
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting, PA = LU.
pub struct LuFactors {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    swaps: usize,
    exactly_singular: bool,
}

impl LuFactors {
    fn new(a: &ComplexMatrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0usize;
        let mut exactly_singular = false;
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if piv != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
                perm.swap(k, piv);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            if pivot.norm() == 0.0 {
                exactly_singular = true;
                continue;
            }
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Ok(Self { lu, perm, swaps, exactly_singular })
    }

    pub fn det(&self) -> Complex64 {
        let mut d = if self.swaps % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) };
        for i in 0..self.lu.rows() {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// log|det| and the phase factor, overflow-safe for large dimensions.
    pub fn log_abs_det(&self) -> (f64, Complex64) {
        let mut log_abs = 0.0f64;
        let mut phase = if self.swaps % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) };
        for i in 0..self.lu.rows() {
            let p = self.lu[(i, i)];
            let r = p.norm();
            if r == 0.0 {
                return (f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
            }
            log_abs += r.ln();
            phase *= p / r;
        }
        (log_abs, phase)
    }

    pub fn is_singular(&self) -> bool {
        self.exactly_singular
    }

    /// (min, max) pivot magnitudes; a tiny ratio flags near-singularity.
    pub fn pivot_extremes(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..self.lu.rows() {
            let r = self.lu[(i, i)].norm();
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        if self.exactly_singular {
            return Err(LinalgError::SingularMatrix);
        }
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
            x[i] /= self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn solve_mat(&self, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        let mut cols = Vec::with_capacity(b.cols());
        for j in 0..b.cols() {
            cols.push(self.solve_vec(&b.column(j))?);
        }
        Ok(ComplexMatrix::from_columns(&cols))
    }

    pub fn inverse(&self) -> Result<ComplexMatrix, LinalgError> {
        self.solve_mat(&ComplexMatrix::identity(self.lu.rows()))
    }
}

/// ⟨x, y⟩ = Σ conj(x_i) y_i, linear in the second argument.
pub fn cdot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_scale(x: &[Complex64], s: Complex64) -> Vec<Complex64> {
    x.iter().map(|z| z * s).collect()
}

pub fn vec_sub(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn vec_axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Deterministic pseudo-random unit vector (splitmix64 stream); keeps the
/// power iteration reproducible without an RNG dependency.
fn seeded_unit_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    let mut next = move || {
        state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z = z ^ (z >> 31);
        (z as f64 / u64::MAX as f64) * 2.0 - 1.0
    };
    let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
    let nrm = vec_norm(&v);
    if nrm > 0.0 {
        for z in &mut v {
            *z /= nrm;
        }
    } else {
        v[0] = Complex64::new(1.0, 0.0);
    }
    v
}

/// Largest singular value by power iteration on A*A.
///
/// Converges when successive σ estimates agree to relative 1e-10; restarts
/// from a fresh deterministic vector on stall before giving up.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    let fro = a.frobenius_norm();
    if fro == 0.0 {
        return 0.0;
    }
    let rel_tol = 1e-10;
    let max_iters = 20_000;
    let mut best = 0.0f64;
    for restart in 0..3u64 {
        let mut v = seeded_unit_vector(a.cols(), 0x5EED + restart);
        let mut sigma_prev = 0.0f64;
        for _ in 0..max_iters {
            let w = a.matvec(&v);
            let sigma = vec_norm(&w);
            if sigma == 0.0 {
                break;
            }
            let mut u = a.adjoint_matvec(&w);
            let unorm = vec_norm(&u);
            if unorm == 0.0 {
                break;
            }
            for z in &mut u {
                *z /= unorm;
            }
            v = u;
            if (sigma - sigma_prev).abs() <= rel_tol * sigma {
                sigma_prev = sigma;
                break;
            }
            sigma_prev = sigma;
        }
        best = best.max(sigma_prev);
        // Frobenius/√n lower-bounds σ₁; a healthy estimate ends the restarts.
        if best >= fro / (a.cols().min(a.rows()) as f64).sqrt() * 0.999 {
            break;
        }
    }
    best
}
