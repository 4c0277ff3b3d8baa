//! Vector families, their analysis, synthesis and frame operators, and the
//! Bessel and frame certificates.

pub mod divergence;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh, singular_values, LinearMap};
use crate::spaces::{HVector, MeasureSpace};
use crate::{CMatrix, CVector, C64, DEFAULT_FRAME_RTOL};

/// A sampled function `x -> psi_x` from a measure space into `C^d`.
/// Row `i` of [`VectorFamily::vectors`] holds the coordinates of `psi_{x_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFamily {
    space: MeasureSpace,
    vectors: CMatrix,
}

impl VectorFamily {
    pub fn new(space: MeasureSpace, vectors: CMatrix) -> Result<Self> {
        check_dim("family rows against sample points", space.len(), vectors.nrows())?;
        if vectors.ncols() == 0 {
            return Err(Error::InvalidParameter("family dimension must be positive".into()));
        }
        if vectors.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("family has non-finite entries".into()));
        }
        Ok(Self { space, vectors })
    }

    /// The standard basis of `C^d` on `d` points with counting measure.
    pub fn orthonormal_basis(d: usize) -> Result<Self> {
        Self::new(MeasureSpace::counting(d)?, CMatrix::identity(d, d))
    }

    /// Family whose analysis operator is `c` (`m x d`, `sqrt(w)` embedded).
    pub fn from_analysis(space: MeasureSpace, c: &CMatrix) -> Result<Self> {
        check_dim("analysis rows against sample points", space.len(), c.nrows())?;
        let mut vectors = c.conjugate();
        for (i, w) in space.weights().iter().enumerate() {
            vectors.row_mut(i).unscale_mut(w.sqrt());
        }
        Self::new(space, vectors)
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    /// Number of sample points.
    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.nrows() == 0
    }

    /// Dimension of the Hilbert space.
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.row(i).transpose()
    }

    /// The family `x -> T psi_x` for a matrix `T` with `d` columns.
    pub fn transformed(&self, t: &CMatrix) -> Result<Self> {
        check_dim("family transform (columns)", self.dim(), t.ncols())?;
        Self::new(self.space.clone(), &self.vectors * t.transpose())
    }

    /// Same vectors over a different measure on the same number of points.
    pub fn with_space(&self, space: MeasureSpace) -> Result<Self> {
        Self::new(space, self.vectors.clone())
    }

    /// Disjoint union of the sample sets.
    pub fn append(&self, other: &VectorFamily) -> Result<Self> {
        check_dim("appended family dimension", self.dim(), other.dim())?;
        let space = self.space.concat(&other.space)?;
        let mut vectors = CMatrix::zeros(self.len() + other.len(), self.dim());
        vectors.rows_mut(0, self.len()).copy_from(&self.vectors);
        vectors.rows_mut(self.len(), other.len()).copy_from(&other.vectors);
        Self::new(space, vectors)
    }

    /// Unweighted samples `<h, psi_{x_i}>`.
    pub fn samples(&self, h: &CVector) -> Result<CVector> {
        check_dim("sampled vector dimension", self.dim(), h.len())?;
        Ok(self.vectors.conjugate() * h)
    }
}

/// Analysis operator `C`, `C[i, .] = sqrt(w_i) conj(psi_{x_i})^T`, so that
/// `||Ch||^2 = sum_i w_i |<h, psi_{x_i}>|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOperator {
    matrix: CMatrix,
}

impl AnalysisOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_inner(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, h: &HVector) -> Result<CVector> {
        check_dim("analysis operator input", self.matrix.ncols(), h.dim())?;
        Ok(&self.matrix * h.coords())
    }

    /// Synthesis operator `C^*` as a matrix.
    pub fn synthesis(&self) -> CMatrix {
        self.matrix.adjoint()
    }
}

pub fn analysis_operator(psi: &VectorFamily) -> AnalysisOperator {
    let mut matrix = psi.vectors.conjugate();
    for (i, s) in psi.space.sqrt_weights().iter().enumerate() {
        matrix.row_mut(i).scale_mut(*s);
    }
    AnalysisOperator { matrix }
}

/// `sum_i w_i a_i psi_{x_i}`, the synthesis of an unweighted sampled function.
pub fn synthesis_apply(psi: &VectorFamily, a: &[C64]) -> Result<HVector> {
    check_dim("synthesis coefficients", psi.len(), a.len())?;
    let weighted = CVector::from_iterator(
        a.len(),
        a.iter().zip(psi.space.weights()).map(|(ai, w)| ai * *w),
    );
    HVector::from_vector(psi.vectors.transpose() * weighted)
}

/// Frame operator `S = C^* C = sum_i w_i psi_i psi_i^*`.
pub fn frame_operator(psi: &VectorFamily) -> LinearMap {
    let c = analysis_operator(psi).matrix;
    let s = c.adjoint() * &c;
    LinearMap::new((&s + s.adjoint()).scale(0.5)).expect("dimension is positive")
}

/// `Psi(f, g) = <Cf, Cg> = sum_i w_i <f, psi_i> <psi_i, g>`.
pub fn sesquilinear_form(psi: &VectorFamily, f: &HVector, g: &HVector) -> Result<C64> {
    let c = analysis_operator(psi);
    let cf = c.apply(f)?;
    let cg = c.apply(g)?;
    Ok(cg.dotc(&cf))
}

/// What a certificate asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertKind {
    Bessel,
    Frame,
    KFrame,
    WeakAFrame,
    GraphAFrame,
    AtomicSystem,
}

impl CertKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertKind::Bessel => "bessel",
            CertKind::Frame => "frame",
            CertKind::KFrame => "k_frame",
            CertKind::WeakAFrame => "weak_a_frame",
            CertKind::GraphAFrame => "graph_a_frame",
            CertKind::AtomicSystem => "atomic_system",
        }
    }
}

/// A named residual together with the threshold it must not exceed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub value: f64,
    pub threshold: f64,
}

impl Residual {
    pub fn passes(&self) -> bool {
        self.value <= self.threshold
    }
}

/// Outcome of a bound certification.
///
/// `alpha_raw` is the computed optimal lower bound; `alpha` equals it when it
/// clears `alpha_floor` and is 0 otherwise. Bessel certificates ignore the
/// lower bound in their verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameCertificate {
    pub kind: CertKind,
    pub alpha: f64,
    pub alpha_raw: f64,
    pub alpha_floor: f64,
    pub beta: f64,
    pub residuals: BTreeMap<String, Residual>,
    pub rtol: f64,
    pub verdict: bool,
    /// Unthresholded quantities reported for inspection only.
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl FrameCertificate {
    /// Builds a certificate and derives `alpha` and `verdict`.
    pub fn assemble(
        kind: CertKind,
        alpha_raw: f64,
        alpha_floor: f64,
        beta: f64,
        rtol: f64,
        residuals: BTreeMap<String, Residual>,
        notes: Vec<String>,
    ) -> Self {
        let lower_ok = alpha_raw > alpha_floor;
        let alpha = if lower_ok { alpha_raw } else { 0.0 };
        let upper_ok = beta.is_finite();
        let residuals_ok = residuals.values().all(Residual::passes);
        let verdict = match kind {
            CertKind::Bessel => upper_ok && residuals_ok,
            _ => lower_ok && upper_ok && residuals_ok,
        };
        Self {
            kind,
            alpha,
            alpha_raw,
            alpha_floor,
            beta,
            residuals,
            rtol,
            verdict,
            diagnostics: BTreeMap::new(),
            notes,
        }
    }

    /// Largest residual value, 0 when there are none.
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .values()
            .map(|r| r.value)
            .fold(0.0, f64::max)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.get(name).map(|r| r.value)
    }
}

pub(crate) fn residual_map<const N: usize>(items: [(&str, f64, f64); N]) -> BTreeMap<String, Residual> {
    items
        .into_iter()
        .map(|(k, value, threshold)| (k.to_string(), Residual { value, threshold }))
        .collect()
}

/// Relative disagreement tolerated between `lambda_max(S)` and `||C||^2`.
pub const NORM_CROSSCHECK_TOL: f64 = 1e-8;

fn extreme_eigenvalues(psi: &VectorFamily) -> (f64, f64) {
    let (values, _) = eigh(&frame_operator(psi));
    (values[0], values[values.len() - 1])
}

fn norm_crosscheck(psi: &VectorFamily, beta: f64) -> f64 {
    let s = singular_values(analysis_operator(psi).matrix());
    let smax = s.first().copied().unwrap_or(0.0);
    (smax * smax - beta).abs() / beta.max(f64::MIN_POSITIVE)
}

/// Optimal Bessel bound `beta = lambda_max(S)`, cross-checked against the
/// largest singular value of the analysis operator.
pub fn certify_bessel(psi: &VectorFamily) -> FrameCertificate {
    let (lmin, beta) = extreme_eigenvalues(psi);
    let residuals = residual_map([(
        "norm_crosscheck",
        norm_crosscheck(psi, beta),
        NORM_CROSSCHECK_TOL,
    )]);
    FrameCertificate::assemble(
        CertKind::Bessel,
        lmin.max(0.0),
        DEFAULT_FRAME_RTOL * beta,
        beta,
        DEFAULT_FRAME_RTOL,
        residuals,
        Vec::new(),
    )
}

/// Optimal frame bounds `lambda_min(S)`, `lambda_max(S)`; passes iff
/// `alpha > rtol * beta`.
pub fn certify_frame(psi: &VectorFamily) -> FrameCertificate {
    certify_frame_with(psi, DEFAULT_FRAME_RTOL)
}

pub fn certify_frame_with(psi: &VectorFamily, rtol: f64) -> FrameCertificate {
    let (lmin, beta) = extreme_eigenvalues(psi);
    let residuals = residual_map([(
        "norm_crosscheck",
        norm_crosscheck(psi, beta),
        NORM_CROSSCHECK_TOL,
    )]);
    FrameCertificate::assemble(
        CertKind::Frame,
        lmin.max(0.0),
        rtol * beta,
        beta,
        rtol,
        residuals,
        Vec::new(),
    )
}
