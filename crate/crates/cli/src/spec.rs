//! Problem ingestion: JSON specs → validated matrices and run defaults.
//!
//! A problem spec carries A (dense Hermitian or a diagonal shorthand),
//! B (dense, rank-one ⟨·,e⟩e with unit e, or a vector sum Σ⟨·,eᵢ⟩eᵢ),
//! optionally declared sector constants, and default run parameters that
//! command-line flags override. A family spec names a density on [0, 1]
//! and the truncation size N for the limit commands.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use perturbatrix_core::linalg::ComplexMatrix;
use perturbatrix_core::limits::LimitModel;
use perturbatrix_core::problem::ProblemError;
use perturbatrix_core::PerturbationProblem;
use serde::Deserialize;
use thiserror::Error;

/// Hard cap on problem size; dense solves beyond this are out of scope.
pub const MAX_DIMENSION: usize = 512;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Shape(String),
    #[error("A is not Hermitian: entry ({i},{j}) vs ({j},{i}) differ by {defect:.3e}")]
    NotHermitian { i: usize, j: usize, defect: f64 },
    #[error("rank_one coupling vector must be unit: ‖e‖ = {norm:.17}")]
    NotUnit { norm: f64 },
}

/// A complex scalar: either a bare real or an [re, im] pair.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Pair([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> Complex64 {
        match self {
            Scalar::Real(x) => Complex64::new(x, 0.0),
            Scalar::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Diagonal { diagonal: Vec<f64> },
    Dense(Vec<Vec<Scalar>>),
}

#[derive(Debug, Deserialize)]
pub struct RankOneSpec {
    pub e: Vec<Scalar>,
}

#[derive(Debug, Deserialize)]
pub struct RankKSpec {
    pub vectors: Vec<Vec<Scalar>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum CouplingSpec {
    RankOne { rank_one: RankOneSpec },
    RankK { rank_k: RankKSpec },
    Dense(Vec<Vec<Scalar>>),
}

/// Sector constants a spec may declare for B, in degrees.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredSector {
    pub sigma1_deg: f64,
    pub sigma2_deg: f64,
}

/// Run defaults; any command-line flag wins over these.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunParams {
    pub theta_deg: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub theta_grid: Option<usize>,
    pub corrector_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub a: MatrixSpec,
    pub b: CouplingSpec,
    #[serde(default)]
    pub sector: Option<DeclaredSector>,
    #[serde(default)]
    pub run: RunParams,
}

/// A spec realized as matrices, before hypothesis analysis.
pub struct LoadedSpec {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub sector: Option<DeclaredSector>,
    pub run: RunParams,
}

fn dense_matrix(rows: &[Vec<Scalar>], what: &str) -> Result<ComplexMatrix, SpecError> {
    let n = rows.len();
    if n == 0 {
        return Err(SpecError::Shape(format!("{what} is empty")));
    }
    if n > MAX_DIMENSION {
        return Err(SpecError::Shape(format!("{what} is {n}×{n}; the cap is {MAX_DIMENSION}")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(SpecError::Shape(format!(
                "{what} row {i} has {} entries in a {n}-row matrix",
                row.len()
            )));
        }
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j].value()))
}

fn check_hermitian(m: &ComplexMatrix) -> Result<(), SpecError> {
    let scale = m.frobenius_norm().max(1.0);
    for i in 0..m.rows() {
        for j in i..m.cols() {
            let defect = (m[(i, j)] - m[(j, i)].conj()).norm();
            if defect > 1e-12 * scale {
                return Err(SpecError::NotHermitian { i, j, defect });
            }
        }
    }
    Ok(())
}

fn vector_sum(vectors: &[Vec<Complex64>], n: usize) -> Result<ComplexMatrix, SpecError> {
    for (k, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(SpecError::Shape(format!(
                "coupling vector {k} has length {}, problem dimension is {n}",
                v.len()
            )));
        }
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        vectors.iter().map(|v| v[i] * v[j].conj()).sum()
    }))
}

pub fn parse_problem(text: &str) -> Result<LoadedSpec, SpecError> {
    let spec: ProblemSpec = serde_json::from_str(text)?;

    let a = match &spec.a {
        MatrixSpec::Diagonal { diagonal } => {
            if diagonal.is_empty() {
                return Err(SpecError::Shape("A diagonal is empty".into()));
            }
            if diagonal.len() > MAX_DIMENSION {
                return Err(SpecError::Shape(format!(
                    "A is {0}×{0}; the cap is {MAX_DIMENSION}",
                    diagonal.len()
                )));
            }
            ComplexMatrix::real_diagonal(diagonal)
        }
        MatrixSpec::Dense(rows) => {
            let m = dense_matrix(rows, "A")?;
            check_hermitian(&m)?;
            m
        }
    };
    let n = a.rows();

    let b = match &spec.b {
        CouplingSpec::Dense(rows) => {
            let m = dense_matrix(rows, "B")?;
            if m.rows() != n {
                return Err(SpecError::Shape(format!(
                    "B is {}×{}, A is {n}×{n}",
                    m.rows(),
                    m.cols()
                )));
            }
            m
        }
        CouplingSpec::RankOne { rank_one } => {
            let e: Vec<Complex64> = rank_one.e.iter().map(|s| s.value()).collect();
            // The rank-one form means a coupling *direction*; scaling
            // belongs in γ. General strengths go through rank_k or dense.
            let norm = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(SpecError::NotUnit { norm });
            }
            vector_sum(std::slice::from_ref(&e), n)?
        }
        CouplingSpec::RankK { rank_k } => {
            if rank_k.vectors.is_empty() {
                return Err(SpecError::Shape("rank_k needs at least one vector".into()));
            }
            let vs: Vec<Vec<Complex64>> = rank_k
                .vectors
                .iter()
                .map(|v| v.iter().map(|s| s.value()).collect())
                .collect();
            vector_sum(&vs, n)?
        }
    };

    if let Some(sec) = &spec.sector {
        for (name, deg) in [("sigma1_deg", sec.sigma1_deg), ("sigma2_deg", sec.sigma2_deg)] {
            if !(0.0..90.0).contains(&deg) {
                return Err(SpecError::Shape(format!(
                    "declared {name} = {deg} must lie in [0, 90)"
                )));
            }
        }
    }

    Ok(LoadedSpec { a, b, sector: spec.sector, run: spec.run })
}

pub fn load_problem_spec(path: &Path) -> Result<LoadedSpec, SpecError> {
    let text = fs::read_to_string(path)
        .map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
    parse_problem(&text)
}

impl LoadedSpec {
    /// Full hypothesis analysis; construction failures surface the violated
    /// hypothesis rather than a parse error.
    pub fn build(&self) -> Result<PerturbationProblem, ProblemError> {
        PerturbationProblem::new(self.a.clone(), self.b.clone())
    }

    /// Declared sector constants in radians, when present.
    pub fn declared_sector(&self) -> Option<(f64, f64)> {
        self.sector.map(|s| (s.sigma1_deg.to_radians(), s.sigma2_deg.to_radians()))
    }

    /// Whether B's minimal sector fits inside the declared one.
    pub fn declared_sector_ok(&self, problem: &PerturbationProblem) -> Option<bool> {
        self.declared_sector()
            .map(|(s1, s2)| cone_membership(&problem.sectorial, s1, s2).is_ok())
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum DensityField {
    Named(String),
    Sampled { sampled: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilySpecRaw {
    density: DensityField,
    n: usize,
    epsilon: Option<f64>,
    radius: Option<f64>,
}

/// A density family f on [0, 1] with the truncation size for μ_N grids.
pub struct FamilySpec {
    pub model: LimitModel,
    pub n: usize,
    pub epsilon: f64,
    pub radius: f64,
}

pub fn parse_family(text: &str) -> Result<FamilySpec, SpecError> {
    let raw: FamilySpecRaw = serde_json::from_str(text)?;
    let model = match &raw.density {
        DensityField::Named(name) => match name.as_str() {
            "uniform" => LimitModel::uniform(),
            "linear_ramp" => LimitModel::linear_ramp(),
            other => {
                return Err(SpecError::Shape(format!(
                    "unknown density \"{other}\"; use \"uniform\", \"linear_ramp\", or {{\"sampled\": [...]}}"
                )))
            }
        },
        DensityField::Sampled { sampled } => LimitModel::sampled(sampled.clone())
            .map_err(|e| SpecError::Shape(e.to_string()))?,
    };
    if raw.n == 0 || raw.n > MAX_DIMENSION {
        return Err(SpecError::Shape(format!("n = {} must lie in 1..={MAX_DIMENSION}", raw.n)));
    }
    let epsilon = raw.epsilon.unwrap_or(1e-8);
    if !(epsilon > 0.0 && epsilon <= 1e-2) {
        return Err(SpecError::Shape(format!("epsilon = {epsilon} must lie in (0, 1e-2]")));
    }
    let radius = raw.radius.unwrap_or(50.0);
    if radius < 10.0 {
        return Err(SpecError::Shape(format!("radius = {radius} must be at least 10")));
    }
    Ok(FamilySpec { model, n: raw.n, epsilon, radius })
}

pub fn load_family_spec(path: &Path) -> Result<FamilySpec, SpecError> {
    let text = fs::read_to_string(path)
        .map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
    parse_family(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_shorthand_and_rank_one() {
        let s = 1.0 / 5f64.sqrt();
        let text = format!(
            r#"{{"a": {{"diagonal": [1, 2, 3, 4, 5]}}, "b": {{"rank_one": {{"e": [{s}, {s}, {s}, {s}, {s}]}}}}}}"#
        );
        let loaded = parse_problem(&text).unwrap();
        assert_eq!(loaded.a.rows(), 5);
        assert!((loaded.b[(0, 4)].re - 0.2).abs() < 1e-12);
        assert!(loaded.build().unwrap().hypotheses.all_pass());
    }

    #[test]
    fn dense_entries_accept_pairs_and_reals() {
        let text = r#"{
            "a": [[1, [0, 0.5]], [[0, -0.5], 2]],
            "b": [[1, 0], [0, 1]]
        }"#;
        let loaded = parse_problem(text).unwrap();
        assert_eq!(loaded.a[(0, 1)], Complex64::new(0.0, 0.5));
        assert_eq!(loaded.a[(1, 0)], Complex64::new(0.0, -0.5));
    }

    #[test]
    fn non_hermitian_dense_a_rejected() {
        let text = r#"{"a": [[1, 1], [0, 2]], "b": [[1, 0], [0, 1]]}"#;
        assert!(matches!(parse_problem(text), Err(SpecError::NotHermitian { .. })));
    }

    #[test]
    fn rank_one_requires_unit_vector() {
        let text = r#"{"a": {"diagonal": [1, 2]}, "b": {"rank_one": {"e": [1, 1]}}}"#;
        assert!(matches!(parse_problem(text), Err(SpecError::NotUnit { .. })));
    }

    #[test]
    fn rank_k_vectors_may_be_unnormalized() {
        let text = r#"{
            "a": {"diagonal": [1, 2, 3, 4, 5]},
            "b": {"rank_k": {"vectors": [[2, 2, 2, 2, 2], [3, 3, -2, -2, -2]]}}
        }"#;
        let loaded = parse_problem(text).unwrap();
        let p = loaded.build().unwrap();
        assert_eq!(p.rank(), 2);
        assert!((p.beta[0].re - 20.0).abs() < 1e-8);
        assert!((p.beta[1].re - 30.0).abs() < 1e-8);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let text = r#"{"a": {"diagonal": [1, 2, 3]}, "b": [[1, 0], [0, 1]]}"#;
        assert!(matches!(parse_problem(text), Err(SpecError::Shape(_))));
        let text = r#"{"a": {"diagonal": [1, 2]}, "b": {"rank_k": {"vectors": [[1, 0, 0]]}}}"#;
        assert!(matches!(parse_problem(text), Err(SpecError::Shape(_))));
    }

    #[test]
    fn ragged_rows_rejected() {
        let text = r#"{"a": [[1, 0], [0]], "b": [[1, 0], [0, 1]]}"#;
        assert!(parse_problem(text).is_err());
    }

    #[test]
    fn run_params_and_sector_pass_through() {
        let text = r#"{
            "a": {"diagonal": [1, -1]},
            "b": {"rank_one": {"e": [0.8660254037844386, 0.5]}},
            "sector": {"sigma1_deg": 10, "sigma2_deg": 15},
            "run": {"theta_deg": [119, 121], "t_max": 4.0}
        }"#;
        let loaded = parse_problem(text).unwrap();
        assert_eq!(loaded.run.theta_deg.as_deref(), Some(&[119.0, 121.0][..]));
        assert_eq!(loaded.run.t_max, Some(4.0));
        let p = loaded.build().unwrap();
        // B is PSD rank one, so any nondegenerate declared cone contains it.
        assert_eq!(loaded.declared_sector_ok(&p), Some(true));
    }

    #[test]
    fn family_specs() {
        let fam = parse_family(r#"{"density": "uniform", "n": 100}"#).unwrap();
        assert_eq!(fam.n, 100);
        assert_eq!(fam.epsilon, 1e-8);
        let fam = parse_family(r#"{"density": {"sampled": [0, 1, 0.5]}, "n": 8, "radius": 12}"#)
            .unwrap();
        assert_eq!(fam.radius, 12.0);
        assert!(parse_family(r#"{"density": "gaussian", "n": 4}"#).is_err());
        assert!(parse_family(r#"{"density": "uniform", "n": 0}"#).is_err());
        assert!(parse_family(r#"{"density": "uniform", "n": 4, "epsilon": 0.5}"#).is_err());
    }
}
