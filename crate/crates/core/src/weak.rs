//! Weak A-frames for densely defined operators, realized on truncation
//! ladders `n -> A_n`, and the graph-norm view of `A` as a bounded map
//! `H_A -> H`.
//!
//! A family `psi` is a weak A-frame at truncation `n` when
//! `alpha ||A_n^* f||^2 <= sum_i w_i |<f, psi_i>|^2 <= beta ||f||^2`. Quality
//! of the weak A-frame is the uniformity of `alpha` along the ladder.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Cholesky;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::frame::{analysis_operator, certify_bessel, frame_operator, residual_map, CertKind, FrameCertificate, VectorFamily};
use crate::kframe::{
    operator_bound_certificate, rank_inclusion, schur_route, weak_expansion_residual,
    CoefficientMap, EquivalenceTable,
};
use crate::linalg::{
    douglas_matrix, hermitian_asymmetry, op_norm, pinv_matrix, rank, sqrt_psd_matrix, LinearMap,
    HERMITIAN_RTOL,
};
use crate::spaces::{graph_inner, GraphMetric, HVector, MeasureSpace};
use crate::{CMatrix, C64, DEFAULT_FRAME_RTOL, DEFAULT_RANK_RTOL, FACTORIZATION_THRESHOLD};

/// Declared boundedness class of a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthTag {
    Bounded,
    Unbounded,
}

/// Rule producing the truncation `A_n` of size `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum LadderRule {
    /// `I_n`.
    Identity,
    /// `diag(1, ..., n)`.
    Diagonal,
    /// `2 pi diag(0, ..., n-1)`: `-i d/dx` on the modes `e^{2 pi i k x}`, `k >= 0`.
    FrequencyDiagonal,
    /// `F^* diag(2 pi nu) F` on `n` periodic grid points, `nu` the centered
    /// DFT frequencies: spectral differentiation `-i d/dx`.
    FourierDerivative,
    /// `A e_k = sqrt(k) e_{k+1}` for `k = 1..n-1`: a non-normal weighted shift.
    WeightedShift,
    /// Explicit matrices per dimension.
    Explicit(BTreeMap<usize, CMatrix>),
}

/// Unitary DFT matrix `F[k, j] = e^{-2 pi i jk/n} / sqrt(n)`.
pub fn dft_matrix(n: usize) -> CMatrix {
    let s = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |k, j| {
        let phase = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
        C64::from_polar(s, phase)
    })
}

/// Centered DFT frequency of bin `k`.
pub fn centered_frequency(k: usize, n: usize) -> f64 {
    if 2 * k < n {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Spectral differentiation matrix `F^* diag(2 pi nu) F`.
pub fn fourier_derivative_matrix(n: usize) -> CMatrix {
    let f = dft_matrix(n);
    let mut scaled = f.clone();
    for k in 0..n {
        let nu = 2.0 * PI * centered_frequency(k, n);
        scaled.row_mut(k).scale_mut(nu);
    }
    let a = f.adjoint() * scaled;
    (&a + a.adjoint()).scale(0.5)
}

impl LadderRule {
    fn matrix(&self, n: usize) -> Option<CMatrix> {
        let real_diag = |f: &dyn Fn(usize) -> f64| {
            CMatrix::from_fn(n, n, |i, j| C64::new(if i == j { f(i) } else { 0.0 }, 0.0))
        };
        Some(match self {
            LadderRule::Identity => CMatrix::identity(n, n),
            LadderRule::Diagonal => real_diag(&|i| (i + 1) as f64),
            LadderRule::FrequencyDiagonal => real_diag(&|i| 2.0 * PI * i as f64),
            LadderRule::FourierDerivative => fourier_derivative_matrix(n),
            LadderRule::WeightedShift => CMatrix::from_fn(n, n, |i, j| {
                C64::new(if i == j + 1 { ((j + 1) as f64).sqrt() } else { 0.0 }, 0.0)
            }),
            LadderRule::Explicit(map) => return map.get(&n).cloned(),
        })
    }
}

/// Indexed family of square truncations modeling a densely defined operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorLadder {
    name: String,
    rule: LadderRule,
    growth: GrowthTag,
    sample_dims: Vec<usize>,
}

impl OperatorLadder {
    pub fn new(
        name: impl Into<String>,
        rule: LadderRule,
        growth: GrowthTag,
        sample_dims: Vec<usize>,
    ) -> Result<Self> {
        let name = name.into();
        let mut dims = sample_dims;
        dims.sort_unstable();
        dims.dedup();
        if dims.is_empty() {
            return Err(Error::EmptyLadder);
        }
        if dims[0] == 0 {
            return Err(Error::InvalidParameter("ladder dimensions must be positive".into()));
        }
        let ladder = Self {
            name,
            rule,
            growth,
            sample_dims: dims,
        };
        let mut last = f64::NEG_INFINITY;
        for &n in &ladder.sample_dims {
            let a = ladder.matrix(n)?;
            let norm = op_norm(&a);
            if ladder.growth == GrowthTag::Unbounded && norm <= last {
                return Err(Error::LadderNotGrowing {
                    name: ladder.name.clone(),
                    dim: n,
                });
            }
            last = norm;
        }
        Ok(ladder)
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        Self::new("identity", LadderRule::Identity, GrowthTag::Bounded, dims)
    }

    pub fn diagonal(dims: Vec<usize>) -> Result<Self> {
        Self::new("diagonal", LadderRule::Diagonal, GrowthTag::Unbounded, dims)
    }

    pub fn frequency_diagonal(dims: Vec<usize>) -> Result<Self> {
        Self::new(
            "frequency_diagonal",
            LadderRule::FrequencyDiagonal,
            GrowthTag::Unbounded,
            dims,
        )
    }

    pub fn fourier_derivative(dims: Vec<usize>) -> Result<Self> {
        Self::new(
            "fourier_derivative",
            LadderRule::FourierDerivative,
            GrowthTag::Unbounded,
            dims,
        )
    }

    pub fn weighted_shift(dims: Vec<usize>) -> Result<Self> {
        Self::new("weighted_shift", LadderRule::WeightedShift, GrowthTag::Unbounded, dims)
    }

    /// Ladder from its name as used in scenario files.
    pub fn by_name(name: &str, dims: Vec<usize>) -> Result<Self> {
        match name {
            "identity" => Self::identity(dims),
            "diagonal" => Self::diagonal(dims),
            "frequency_diagonal" => Self::frequency_diagonal(dims),
            "fourier_derivative" => Self::fourier_derivative(dims),
            "weighted_shift" => Self::weighted_shift(dims),
            other => Err(Error::InvalidParameter(format!("unknown ladder `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn growth(&self) -> GrowthTag {
        self.growth
    }

    pub fn sample_dims(&self) -> &[usize] {
        &self.sample_dims
    }

    /// `A_n`.
    pub fn matrix(&self, n: usize) -> Result<CMatrix> {
        if n == 0 {
            return Err(Error::InvalidParameter("ladder dimension must be positive".into()));
        }
        let a = self.rule.matrix(n).ok_or_else(|| {
            Error::InvalidParameter(format!("ladder `{}` has no matrix at dimension {n}", self.name))
        })?;
        check_dim("ladder matrix rows", n, a.nrows())?;
        check_dim("ladder matrix columns", n, a.ncols())?;
        Ok(a)
    }

    /// `A_n^*`.
    pub fn adjoint(&self, n: usize) -> Result<CMatrix> {
        Ok(self.matrix(n)?.adjoint())
    }

    pub fn norm(&self, n: usize) -> Result<f64> {
        Ok(op_norm(&self.matrix(n)?))
    }
}

/// Weak A-frame certificate at a single truncation.
pub fn certify_weak_at(psi: &VectorFamily, a_n: &CMatrix) -> Result<FrameCertificate> {
    certify_weak_at_with(psi, a_n, DEFAULT_FRAME_RTOL)
}

/// [`certify_weak_at`] with an explicit pass floor `alpha ||A_n||^2 > rtol beta`.
pub fn certify_weak_at_with(psi: &VectorFamily, a_n: &CMatrix, rtol: f64) -> Result<FrameCertificate> {
    check_dim("operator rows against family dimension", psi.dim(), a_n.nrows())?;
    check_dim("operator must be square", a_n.nrows(), a_n.ncols())?;
    check_rtol(rtol)?;
    let c = analysis_operator(psi).into_inner();
    Ok(operator_bound_certificate(CertKind::WeakAFrame, &c, a_n, rtol))
}

fn check_rtol(rtol: f64) -> Result<()> {
    if rtol > 0.0 && rtol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rtol must lie in (0, 1), got {rtol}")))
    }
}

/// Minimum-to-maximum ratio of per-dimension `alpha` required for `stable`.
pub const STABILITY_RATIO: f64 = 0.9;

/// Per-dimension certificates along a ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakFrameCertificate {
    pub ladder: String,
    pub per_dim: BTreeMap<usize, FrameCertificate>,
    pub norms: BTreeMap<usize, f64>,
    /// Minimum per-dimension `alpha` (0 if any dimension fails).
    pub uniform_alpha: f64,
    pub max_alpha: f64,
    /// Every dimension passes and `uniform_alpha >= 0.9 max_alpha`.
    pub stable: bool,
}

impl WeakFrameCertificate {
    fn from_parts(ladder: &str, parts: Vec<(usize, FrameCertificate, f64)>) -> Self {
        let all_pass = parts.iter().all(|(_, c, _)| c.verdict);
        let finite: Vec<f64> = parts
            .iter()
            .map(|(_, c, _)| c.alpha)
            .filter(|a| a.is_finite())
            .collect();
        let (min, max) = if finite.is_empty() {
            (f64::INFINITY, f64::INFINITY)
        } else {
            (
                finite.iter().copied().fold(f64::INFINITY, f64::min),
                finite.iter().copied().fold(0.0, f64::max),
            )
        };
        let uniform_alpha = if all_pass { min } else { 0.0 };
        let stable = all_pass && (finite.is_empty() || min >= STABILITY_RATIO * max);
        let mut per_dim = BTreeMap::new();
        let mut norms = BTreeMap::new();
        for (n, c, norm) in parts {
            per_dim.insert(n, c);
            norms.insert(n, norm);
        }
        Self {
            ladder: ladder.to_string(),
            per_dim,
            norms,
            uniform_alpha,
            max_alpha: max,
            stable,
        }
    }

    pub fn verdict(&self) -> bool {
        self.per_dim.values().all(|c| c.verdict)
    }
}

/// Certifies `psi_ladder(n)` against `A_n` for every sample dimension, in
/// parallel.
pub fn certify_weak_a_frame<F>(psi_ladder: F, ladder: &OperatorLadder) -> Result<WeakFrameCertificate>
where
    F: Fn(usize) -> Result<VectorFamily> + Sync,
{
    certify_weak_a_frame_with(psi_ladder, ladder, DEFAULT_FRAME_RTOL)
}

/// [`certify_weak_a_frame`] with an explicit pass floor.
pub fn certify_weak_a_frame_with<F>(psi_ladder: F, ladder: &OperatorLadder, rtol: f64) -> Result<WeakFrameCertificate>
where
    F: Fn(usize) -> Result<VectorFamily> + Sync,
{
    check_rtol(rtol)?;
    certify_ladder_with(ladder, rtol, |n| {
        let a = ladder.matrix(n)?;
        Ok((psi_ladder(n)?, a))
    })
}

fn certify_ladder_with<G>(ladder: &OperatorLadder, rtol: f64, build: G) -> Result<WeakFrameCertificate>
where
    G: Fn(usize) -> Result<(VectorFamily, CMatrix)> + Sync,
{
    let parts = ladder
        .sample_dims()
        .par_iter()
        .map(|&n| {
            let (psi, a) = build(n)?;
            let cert = certify_weak_at_with(&psi, &a, rtol)?;
            Ok((n, cert, op_norm(&a)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeakFrameCertificate::from_parts(ladder.name(), parts))
}

fn block_layout(sp: &MeasureSpace, n: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    let part = sp.partition().ok_or_else(|| {
        Error::InvalidMeasure("the ONB construction needs a partitioned measure space".into())
    })?;
    check_dim("partition blocks against operator dimension", n, part.len())?;
    Ok((part.block_of_points(sp.len()), part.block_measures().to_vec()))
}

/// Step family `psi_x = A e_k / sqrt(mu(X_k))` for `x` in block `X_k`.
pub fn onb_atomic_system_matrix(a: &CMatrix, sp: &MeasureSpace) -> Result<VectorFamily> {
    check_dim("operator must be square", a.nrows(), a.ncols())?;
    let n = a.ncols();
    let (owner, mu) = block_layout(sp, n)?;
    let mut rows = CMatrix::zeros(sp.len(), n);
    for (i, &k) in owner.iter().enumerate() {
        let col = a.column(k).unscale(mu[k].sqrt());
        rows.row_mut(i).copy_from(&col.transpose());
    }
    VectorFamily::new(sp.clone(), rows)
}

/// [`onb_atomic_system_matrix`] for the ladder truncation `A_n`.
pub fn onb_atomic_system(ladder: &OperatorLadder, n: usize, sp: &MeasureSpace) -> Result<VectorFamily> {
    onb_atomic_system_matrix(&ladder.matrix(n)?, sp)
}

/// Coefficients `a_f(x) = <f, e_k> / sqrt(mu(X_k))` on `X_k`, embedded:
/// `(Mf)_i = sqrt(w_i) f_k / sqrt(mu_k)`.
pub fn onb_coefficient_map(sp: &MeasureSpace, n: usize) -> Result<CoefficientMap> {
    let (owner, mu) = block_layout(sp, n)?;
    let w = sp.weights();
    let m = CMatrix::from_fn(sp.len(), n, |i, k| {
        C64::new(if owner[i] == k { (w[i] / mu[k]).sqrt() } else { 0.0 }, 0.0)
    });
    Ok(CoefficientMap::new(m))
}

/// Minimal-norm weak A-dual: `M = pinv(C^*) A_n` and its Riesz family `phi`,
/// with `<A h, u> = sum_i w_i <h, phi_i> <psi_i, u>`.
pub fn weak_a_dual(psi: &VectorFamily, a_n: &CMatrix, rtol: f64) -> Result<(VectorFamily, CoefficientMap)> {
    check_dim("operator rows against family dimension", psi.dim(), a_n.nrows())?;
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::InvalidParameter(format!("rtol must lie in (0, 1), got {rtol}")));
    }
    let cstar = analysis_operator(psi).synthesis();
    let (m, residual) = douglas_matrix(a_n, &cstar, rtol);
    if residual > FACTORIZATION_THRESHOLD {
        return Err(Error::NotAWeakAFrame { residual });
    }
    let phi = VectorFamily::from_analysis(psi.space().clone(), &m)?;
    Ok((phi, CoefficientMap::new(m)))
}

/// Residual of `<A^* u, h> = sum_i w_i <u, psi_i> <phi_i, h>` over basis pairs.
pub fn adjoint_decomposition_residual(psi: &VectorFamily, phi: &VectorFamily, a_n: &CMatrix) -> Result<f64> {
    weak_expansion_residual(psi, phi, &a_n.adjoint())
}

/// `theta_i = (A^+)^* phi_i` for a surjective truncation.
pub fn interchange_unbounded_matrix(
    psi: &VectorFamily,
    phi: &VectorFamily,
    a_n: &CMatrix,
    rtol: f64,
) -> Result<VectorFamily> {
    check_dim("operator must be square", a_n.nrows(), a_n.ncols())?;
    check_dim("family dimension against operator", a_n.nrows(), psi.dim())?;
    check_dim("dual dimension against operator", a_n.ncols(), phi.dim())?;
    check_dim("paired families (sample points)", psi.len(), phi.len())?;
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::InvalidParameter(format!("rtol must lie in (0, 1), got {rtol}")));
    }
    let r = rank(a_n, rtol);
    if r < a_n.nrows() {
        return Err(Error::NotSurjective {
            rank: r,
            dim: a_n.nrows(),
        });
    }
    phi.transformed(&pinv_matrix(a_n, rtol).adjoint())
}

/// [`interchange_unbounded_matrix`] at ladder dimension `n`.
pub fn interchange_unbounded(
    psi: &VectorFamily,
    phi: &VectorFamily,
    ladder: &OperatorLadder,
    n: usize,
    rtol: f64,
) -> Result<VectorFamily> {
    interchange_unbounded_matrix(psi, phi, &ladder.matrix(n)?, rtol)
}

/// Reconstruction residuals and Bessel bounds for [`interchange_unbounded`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnboundedInterchange {
    /// `<f, u> = sum w <f, theta> <psi, u>`.
    pub theta_psi: f64,
    /// `<f, u> = sum w <f, psi> <theta, u>`.
    pub psi_theta: f64,
    pub beta_theta: f64,
    /// `beta_phi ||A^+||^2`.
    pub beta_bound: f64,
}

pub fn unbounded_interchange_residuals(
    psi: &VectorFamily,
    phi: &VectorFamily,
    theta: &VectorFamily,
    a_n: &CMatrix,
    rtol: f64,
) -> Result<UnboundedInterchange> {
    let id = CMatrix::identity(psi.dim(), psi.dim());
    let pinv_norm = op_norm(&pinv_matrix(a_n, rtol));
    Ok(UnboundedInterchange {
        theta_psi: weak_expansion_residual(theta, psi, &id)?,
        psi_theta: weak_expansion_residual(psi, theta, &id)?,
        beta_theta: certify_bessel(theta).beta,
        beta_bound: certify_bessel(phi).beta * pinv_norm * pinv_norm,
    })
}

/// A base ladder certificate, a derived one, and whether the guaranteed
/// per-dimension lower bounds hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedLadderReport {
    pub base: WeakFrameCertificate,
    pub derived: WeakFrameCertificate,
    /// Guaranteed lower bound on the derived `alpha` per dimension.
    pub guaranteed: BTreeMap<usize, f64>,
    pub bounds_hold: bool,
}

const BOUND_SLACK: f64 = 1e-10;

fn bounds_hold(derived: &WeakFrameCertificate, guaranteed: &BTreeMap<usize, f64>) -> bool {
    guaranteed.iter().all(|(n, g)| {
        let a = derived.per_dim[n].alpha_raw;
        !g.is_finite() || a >= g - BOUND_SLACK * g.abs().max(1.0)
    })
}

/// `psi` against `A_n F_n`: the guaranteed bound is `alpha_n / ||F_n^*||^2`.
pub fn compose_bounded<P, F>(psi_ladder: P, ladder: &OperatorLadder, f_rule: F) -> Result<DerivedLadderReport>
where
    P: Fn(usize) -> Result<VectorFamily> + Sync,
    F: Fn(usize) -> Result<CMatrix> + Sync,
{
    let base = certify_weak_a_frame(&psi_ladder, ladder)?;
    let derived = certify_ladder_with(ladder, DEFAULT_FRAME_RTOL, |n| {
        let a = ladder.matrix(n)?;
        let f = f_rule(n)?;
        check_dim("F rows against operator", a.ncols(), f.nrows())?;
        check_dim("F must be square", f.nrows(), f.ncols())?;
        Ok((psi_ladder(n)?, a * f))
    })?;
    let mut guaranteed = BTreeMap::new();
    for &n in ladder.sample_dims() {
        let fnorm = op_norm(&f_rule(n)?);
        guaranteed.insert(n, base.per_dim[&n].alpha_raw / (fnorm * fnorm));
    }
    let ok = bounds_hold(&derived, &guaranteed);
    Ok(DerivedLadderReport {
        base,
        derived,
        guaranteed,
        bounds_hold: ok,
    })
}

/// `A^k psi` against `A^{k+1}` for self-adjoint `A`: same lower bound.
pub fn power_frame<P>(psi_ladder: P, ladder: &OperatorLadder, k: u32) -> Result<DerivedLadderReport>
where
    P: Fn(usize) -> Result<VectorFamily> + Sync,
{
    for &n in ladder.sample_dims() {
        let asymmetry = hermitian_asymmetry(&ladder.matrix(n)?);
        if asymmetry > HERMITIAN_RTOL {
            return Err(Error::NotHermitian { asymmetry });
        }
    }
    let base = certify_weak_a_frame(&psi_ladder, ladder)?;
    let mut derived = certify_ladder_with(ladder, DEFAULT_FRAME_RTOL, |n| {
        let a = ladder.matrix(n)?;
        let ak = matrix_power(&a, k);
        Ok((psi_ladder(n)?.transformed(&ak)?, &ak * a))
    })?;
    for (&n, cert) in derived.per_dim.iter_mut() {
        let a = ladder.matrix(n)?;
        if rank(&a, DEFAULT_RANK_RTOL) < n {
            cert.notes.push(format!(
                "A_{n} has a kernel: the quotient is taken over f with A^{} f != 0 only",
                k + 1
            ));
        }
    }
    let guaranteed = base
        .per_dim
        .iter()
        .map(|(&n, c)| (n, c.alpha_raw))
        .collect();
    let ok = bounds_hold(&derived, &guaranteed);
    Ok(DerivedLadderReport {
        base,
        derived,
        guaranteed,
        bounds_hold: ok,
    })
}

fn matrix_power(a: &CMatrix, k: u32) -> CMatrix {
    let mut out = CMatrix::identity(a.nrows(), a.ncols());
    for _ in 0..k {
        out = &out * a;
    }
    out
}

/// The operator `A_M = C^* M` for which `psi` is a weak atomic system with
/// dual `phi` read off `M`.
#[derive(Debug, Clone)]
pub struct AmConstruction {
    pub a_m: CMatrix,
    pub dual: VectorFamily,
    pub certificate: FrameCertificate,
}

/// Threshold on the defining identity of [`construct_a_m`].
pub const A_M_IDENTITY_TOL: f64 = 1e-10;

pub fn construct_a_m(psi: &VectorFamily, m: &CoefficientMap) -> Result<AmConstruction> {
    check_dim("coefficient rows against sample points", psi.len(), m.matrix().nrows())?;
    check_dim("coefficient domain against family dimension", psi.dim(), m.matrix().ncols())?;
    let a_m = analysis_operator(psi).synthesis() * m.matrix();
    let dual = VectorFamily::from_analysis(psi.space().clone(), m.matrix())?;
    let identity = weak_expansion_residual(&dual, psi, &a_m)?;
    let gamma = m.gamma();
    let alpha = if gamma > 0.0 { 1.0 / (gamma * gamma) } else { f64::INFINITY };
    let mut notes = Vec::new();
    if gamma == 0.0 {
        notes.push("M = 0: A_M = 0 and the lower inequality is vacuous".into());
    }
    let mut certificate = FrameCertificate::assemble(
        CertKind::AtomicSystem,
        alpha,
        0.0,
        certify_bessel(psi).beta,
        DEFAULT_RANK_RTOL,
        residual_map([("weak_identity", identity, A_M_IDENTITY_TOL)]),
        notes,
    );
    certificate.diagnostics.insert("gamma".into(), gamma);
    Ok(AmConstruction {
        a_m,
        dual,
        certificate,
    })
}

fn cholesky_of_graph(a: &CMatrix) -> Result<Cholesky<C64, nalgebra::Dyn>> {
    let gm = GraphMetric::new(a.clone())?;
    Cholesky::new(gm.gram().clone())
        .ok_or_else(|| Error::InvalidParameter("graph Gram matrix is not positive definite".into()))
}

/// `A^# = (I + A^* A)^{-1} A^*`, the adjoint of `A: H_A -> H`.
pub fn graph_adjoint(a: &CMatrix) -> Result<LinearMap> {
    check_dim("operator must be square", a.nrows(), a.ncols())?;
    let chol = cholesky_of_graph(a)?;
    LinearMap::new(chol.solve(&a.adjoint()))
}

/// `max |<A^# h, g>_A - <h, A g>|` over basis pairs, with the graph inner
/// product evaluated through [`GraphMetric`].
pub fn graph_adjoint_residual(a: &CMatrix, sharp: &CMatrix) -> Result<f64> {
    let gm = GraphMetric::new(a.clone())?;
    let basis = crate::spaces::standard_onb(a.nrows())?;
    let mut worst = 0.0f64;
    for h in &basis {
        let sh = HVector::from_vector(sharp * h.coords())?;
        for g in &basis {
            let ag = HVector::from_vector(a * g.coords())?;
            let lhs = graph_inner(&sh, g, &gm)?;
            let rhs = h.inner(&ag)?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// `T` with `||T^* h||^2 = ||A^# h||_A^2`, namely `T = A L^{-*}` for
/// `I + A^* A = L L^*`.
fn graph_effective_operator(a: &CMatrix) -> Result<CMatrix> {
    let chol = cholesky_of_graph(a)?;
    let tstar = chol
        .l()
        .solve_lower_triangular(&a.adjoint())
        .ok_or_else(|| Error::InvalidParameter("singular Cholesky factor".into()))?;
    Ok(tstar.adjoint())
}

/// `alpha ||A^# h||_A^2 <= sum_i w_i |<h, psi_i>|^2 <= beta ||h||^2`.
pub fn certify_graph_a_frame(psi: &VectorFamily, a_n: &CMatrix) -> Result<FrameCertificate> {
    certify_graph_a_frame_with(psi, a_n, DEFAULT_FRAME_RTOL)
}

/// [`certify_graph_a_frame`] with an explicit pass floor.
pub fn certify_graph_a_frame_with(psi: &VectorFamily, a_n: &CMatrix, rtol: f64) -> Result<FrameCertificate> {
    check_dim("operator rows against family dimension", psi.dim(), a_n.nrows())?;
    check_dim("operator must be square", a_n.nrows(), a_n.ncols())?;
    check_rtol(rtol)?;
    let t = graph_effective_operator(a_n)?;
    let c = analysis_operator(psi).into_inner();
    Ok(operator_bound_certificate(CertKind::GraphAFrame, &c, &t, rtol))
}

/// Evaluates the seven equivalent statements for a square truncation `A`:
///
/// 1. `atomic_system`: canonical-dual coefficients `a_f = <Af, S^+ psi_x>`
///    reproduce `A` through the explicit weak sum;
/// 2. `graph_frame`: [`certify_graph_a_frame`] passes;
/// 3. `graph_bessel_dual`: the dual `phi_x = G^{-1} conj(M_x) / sqrt(w_x)`
///    satisfies `<Af, u> = sum w <f, phi>_A <psi, u>` using graph inner products;
/// 4. `range_inclusion`: rank test;
/// 5. `factorization`: `A = C^* M`;
/// 6. `loewner`: `S >= alpha A A^#` (Schur route);
/// 7. `sqrt_factorization`: `A = S^{1/2} U`.
pub fn corollary_equivalences(psi: &VectorFamily, a_n: &CMatrix) -> Result<EquivalenceTable> {
    check_dim("operator rows against family dimension", psi.dim(), a_n.nrows())?;
    check_dim("operator must be square", a_n.nrows(), a_n.ncols())?;
    let c = analysis_operator(psi).into_inner();
    let cstar = c.adjoint();

    let cp = pinv_matrix(&c, DEFAULT_RANK_RTOL);
    let s_pinv = &cp * cp.adjoint();
    let canonical = psi.transformed(&(a_n.adjoint() * s_pinv))?;
    let r1 = weak_expansion_residual(&canonical, psi, a_n)?;

    let graph = certify_graph_a_frame(psi, a_n)?;

    let (m, r5) = douglas_matrix(a_n, &cstar, DEFAULT_RANK_RTOL);
    let r3 = graph_dual_residual(psi, a_n, &m)?;

    let p4 = rank_inclusion(&cstar, a_n);

    let sharp = graph_adjoint(a_n)?;
    let q = a_n * sharp.matrix();
    let q = (&q + q.adjoint()).scale(0.5);
    let (alpha6, p6) = schur_route(&c, &q, DEFAULT_FRAME_RTOL);

    let root = sqrt_psd_matrix(frame_operator(psi).matrix())?;
    let (_, r7) = douglas_matrix(a_n, &root, DEFAULT_RANK_RTOL);

    Ok(EquivalenceTable::new(
        vec![
            ("atomic_system", r1 <= FACTORIZATION_THRESHOLD),
            ("graph_frame", graph.verdict),
            ("graph_bessel_dual", r3 <= FACTORIZATION_THRESHOLD),
            ("range_inclusion", p4),
            ("factorization", r5 <= FACTORIZATION_THRESHOLD),
            ("loewner", p6),
            ("sqrt_factorization", r7 <= FACTORIZATION_THRESHOLD),
        ],
        vec![
            ("atomic_residual", r1),
            ("alpha_graph", graph.alpha_raw),
            ("graph_dual_residual", r3),
            ("factorization_residual", r5),
            ("alpha_loewner", alpha6),
            ("sqrt_factorization_residual", r7),
        ],
    ))
}

/// Residual of `<Af, u> = sum_i w_i <f, phi_i>_A <psi_i, u>` over basis pairs,
/// `phi_i = G^{-1} conj(M[i, .])^T / sqrt(w_i)`, relative to `||A||`.
fn graph_dual_residual(psi: &VectorFamily, a: &CMatrix, m: &CMatrix) -> Result<f64> {
    let d = psi.dim();
    let gm = GraphMetric::new(a.clone())?;
    let chol = cholesky_of_graph(a)?;
    let riesz = VectorFamily::from_analysis(psi.space().clone(), m)?;
    let phi_rows = chol.solve(&riesz.vectors().transpose());
    let basis = crate::spaces::standard_onb(d)?;
    let w = psi.space().weights();
    // <f, phi_i>_A for f = e_j.
    let mut coeff = CMatrix::zeros(psi.len(), d);
    for i in 0..psi.len() {
        let phi_i = HVector::from_vector(phi_rows.column(i).into_owned())?;
        for (j, e) in basis.iter().enumerate() {
            coeff[(i, j)] = graph_inner(e, &phi_i, &gm)?;
        }
    }
    let mut worst = 0.0f64;
    for j in 0..d {
        for k in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..psi.len() {
                acc += coeff[(i, j)] * psi.vectors()[(i, k)] * w[i];
            }
            worst = worst.max((acc - a[(k, j)]).norm());
        }
    }
    Ok(worst / op_norm(a).max(f64::MIN_POSITIVE))
}
